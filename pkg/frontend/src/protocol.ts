/** Wire types for the session WebSocket/HTTP protocol and parsing guards. */

export const PROTOCOL_VERSION = 1;

export type EntityId =
  | "viewer"
  | "player_head"
  | "player_feet"
  | "controller_left"
  | "controller_right"
  | "mirror";

export interface PoseMessageDoc {
  entity: EntityId;
  sender: number;
  seq: number;
  t_us: number;
  pos: [number, number, number];
  quat: [number, number, number, number];
}

export interface Capsule {
  a: [number, number];
  b: [number, number];
  r: number;
}

export interface FrameMsg {
  type: "frame";
  tick: number;
  t_us: number;
  view: number[]; // 16, column-major
  proj: number[]; // 16, column-major
  clip: number[]; // 4
  blit: { u_min: number; v_min: number; u_max: number; v_max: number };
  overscan: number;
  polygon: {
    outline: [number, number][];
    opacity: number;
    variant: string;
    capsules: Capsule[];
  };
  mirror: { width: number; height: number };
  fov: { h_fov_deg: number; v_fov_deg: number } | null;
  stale: Record<string, boolean>;
  frozen: boolean;
  events: { kind: string; tick: number | null; magnitude: number }[];
}

export interface ConfigMsg {
  type: "config";
  version: number;
  config: {
    mirror_width: number;
    mirror_height: number;
    mirror_origin: [number, number, number];
    cap_to_eye: [number, number, number];
    floor_y: number;
    room_half_extent: number;
    room_height: number;
    shape_variant: string;
    shoulder_half_width: number;
    head_radius: number;
    arm_radius: number;
    [key: string]: unknown;
  };
}

export interface ErrorMsg {
  type: "error";
  reason: string;
}

export type ServerMsg = FrameMsg | ConfigMsg | ErrorMsg | { type: "pong" };

export function parseServerMsg(data: string): ServerMsg | null {
  let doc: unknown;
  try {
    doc = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const type = (doc as { type?: unknown }).type;
  if (type === "frame") {
    const f = doc as FrameMsg;
    if (!Array.isArray(f.view) || f.view.length !== 16) return null;
    if (!Array.isArray(f.proj) || f.proj.length !== 16) return null;
    if (!f.polygon || !Array.isArray(f.polygon.outline)) return null;
    if (typeof f.tick !== "number") return null;
    return f;
  }
  if (type === "config") {
    const c = doc as ConfigMsg;
    if (typeof c.version !== "number" || typeof c.config !== "object") return null;
    return c;
  }
  if (type === "error") {
    const e = doc as ErrorMsg;
    return typeof e.reason === "string" ? e : null;
  }
  if (type === "pong") return { type: "pong" };
  return null;
}

export function frameIsFinite(frame: FrameMsg): boolean {
  const all = frame.view.concat(frame.proj, frame.clip);
  return all.every((v) => Number.isFinite(v));
}

/** Discards stale and out-of-order frames; renderers only move forward. */
export class FrameOrderGuard {
  private lastTick = -1;

  accept(frame: FrameMsg): boolean {
    if (frame.tick <= this.lastTick) return false;
    this.lastTick = frame.tick;
    return true;
  }

  reset(): void {
    this.lastTick = -1;
  }
}
