/** Viewport state: frame intake with ordering, screen presets, shape pick,
 * marker constraints. DOM-free so it is unit-testable in node. */

import {
  AnchorBox,
  PlaneFrame,
  Vec3,
  f32v,
  predictAnchorBox,
  predictNormalizedBox,
  panelDims,
  toLocal,
} from "./geometry.js";
import { ConfigMsg, EntityId, FrameMsg, FrameOrderGuard } from "./protocol.js";

export type ScreenPreset = "live" | "24in" | "50in" | "custom";

export const SHAPE_WIDTH_SCALE: Record<string, number> = {
  default_oval: 1.0,
  transparent_oval: 1.0,
  narrow_oval: 0.5,
  body_with_arms: 1.0,
};

export interface MarkerState {
  entity: EntityId;
  /** world-plan position: x across the room, z out of the glass */
  x: number;
  z: number;
  height: number;
  selected: boolean;
}

export class ViewportState {
  readonly guard = new FrameOrderGuard();
  frame: FrameMsg | null = null;
  whatIfFrame: FrameMsg | null = null;
  preset: ScreenPreset = "live";
  customDiagonalIn = 32;
  shape = "default_oval";
  dropped = 0;

  /** Returns true when the frame advanced the stream. */
  applyFrame(frame: FrameMsg): boolean {
    if (!this.guard.accept(frame)) {
      this.dropped += 1;
      return false;
    }
    this.frame = frame;
    return true;
  }

  fovReadoutDeg(): number | null {
    const source = this.preset === "live" ? this.frame : this.whatIfFrame;
    return source?.fov?.h_fov_deg ?? null;
  }

  presetDims(config: ConfigMsg["config"]): [number, number] | null {
    switch (this.preset) {
      case "live":
        return null; // session config rules
      case "24in":
        return panelDims(24);
      case "50in":
        return panelDims(50);
      case "custom":
        return panelDims(this.customDiagonalIn);
    }
  }
}

export interface RoomBounds {
  halfExtent: number;
  height: number;
}

/** Clamp a plan-view drag; viewer and player stay in front of the glass. */
export function clampMarker(
  entity: EntityId,
  desired: { x: number; z: number; height: number },
  room: RoomBounds,
  glassZ: number,
): { x: number; z: number; height: number; clamped: boolean } {
  let { x, z, height } = desired;
  let clamped = false;
  const limit = room.halfExtent;
  if (Math.abs(x) > limit) {
    x = Math.sign(x) * limit;
    clamped = true;
  }
  if (Math.abs(z) > limit) {
    z = Math.sign(z) * limit;
    clamped = true;
  }
  if (height < 0 || height > room.height) {
    height = Math.min(Math.max(height, 0), room.height);
    clamped = true;
  }
  if (entity === "viewer" || entity === "player_head") {
    const minZ = glassZ + 0.05;
    if (z < minZ) {
      z = minZ;
      clamped = true;
    }
  }
  return { x, z, height, clamped };
}

export interface PredictionInput {
  markers: Map<EntityId, MarkerState>;
  frame: PlaneFrame;
  capToEye: Vec3;
  floorY: number;
  body: { shoulderHalfWidth: number; headRadius: number };
  widthScale: number;
}

/** The box the served silhouette outline should span, from local state. */
export function predictOutlineBox(input: PredictionInput): AnchorBox | null {
  const viewer = input.markers.get("viewer");
  const player = input.markers.get("player_head");
  if (!viewer || !player) return null;
  const head = f32v([player.x, player.height, player.z]);
  const feetQ = f32v([player.x, 0, player.z]);
  // feet fall back to the configured floor height, like the service
  const feet: Vec3 = [feetQ[0], input.floorY, feetQ[2]];
  const viewerQ = f32v([viewer.x, viewer.height, viewer.z]);
  const eyeWorld: Vec3 = [
    viewerQ[0] + input.capToEye[0],
    viewerQ[1] + input.capToEye[1],
    viewerQ[2] + input.capToEye[2],
  ];
  const headL = toLocal(head, input.frame);
  const feetL = toLocal(feet, input.frame);
  const eyeL = toLocal(eyeWorld, input.frame);
  if (headL[2] <= 0 || eyeL[2] <= 0) return null;
  const box = predictAnchorBox(headL, feetL, eyeL, input.body);
  return predictNormalizedBox(box, input.frame, input.widthScale);
}

/** Max per-edge discrepancy between the served outline and the prediction,
 * in normalized screen units. Null when the comparison is not meaningful
 * (clipped overlay or missing markers). */
export function outlineDiscrepancy(
  frame: FrameMsg,
  predicted: AnchorBox | null,
): number | null {
  if (!predicted) return null;
  const pts = frame.polygon.outline;
  if (pts.length < 8) return null;
  const overhang = 1.49;
  if (
    predicted.xMin < -overhang || predicted.xMax > overhang ||
    predicted.yMin < -overhang || predicted.yMax > overhang
  ) {
    return null; // server clips the ellipse at the extended bounds
  }
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const [u, v] of pts) {
    xMin = Math.min(xMin, u);
    xMax = Math.max(xMax, u);
    yMin = Math.min(yMin, v);
    yMax = Math.max(yMax, v);
  }
  return Math.max(
    Math.abs(xMin - predicted.xMin),
    Math.abs(xMax - predicted.xMax),
    Math.abs(yMin - predicted.yMin),
    Math.abs(yMax - predicted.yMax),
  );
}

/** Tracks consecutive mismatches so drag transients do not flash warnings. */
export class ConsistencyMonitor {
  private misses = 0;
  threshold = 1e-4;
  patience = 10;
  worst = 0;

  update(discrepancy: number | null): boolean {
    if (discrepancy === null) {
      this.misses = 0;
      return false;
    }
    this.worst = Math.max(this.worst, discrepancy);
    if (discrepancy > this.threshold) {
      this.misses += 1;
    } else {
      this.misses = 0;
    }
    return this.misses >= this.patience;
  }
}
