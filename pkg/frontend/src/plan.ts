/** Top-down plan view: drag the viewer, player, controllers and the mirror
 * tracker around the room; a height slider adjusts the selected marker. */

import { PlaneFrame } from "./geometry.js";
import { EntityId } from "./protocol.js";
import { clampMarker, MarkerState, RoomBounds } from "./state.js";

const COLORS: Record<string, string> = {
  viewer: "#4da3ff",
  player_head: "#ffb14d",
  controller_left: "#6fdb87",
  controller_right: "#37b058",
  mirror: "#b9bdc7",
};

const LABELS: Record<string, string> = {
  viewer: "viewer",
  player_head: "player",
  controller_left: "L ctrl",
  controller_right: "R ctrl",
  mirror: "mirror",
};

export class PlanView {
  markers = new Map<EntityId, MarkerState>();
  selected: EntityId | null = null;
  private dragging: EntityId | null = null;
  private clampedCue = 0;
  private ctx: CanvasRenderingContext2D;

  constructor(
    private canvas: HTMLCanvasElement,
    private room: RoomBounds,
    private glass: () => PlaneFrame,
    private onChange: (entity: EntityId, marker: MarkerState, final: boolean) => void,
    private onSelect: (entity: EntityId | null) => void,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2D context unavailable");
    this.ctx = ctx;
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
    canvas.addEventListener("pointercancel", (e) => this.pointerUp(e));
  }

  setMarker(entity: EntityId, x: number, z: number, height: number): void {
    this.markers.set(entity, {
      entity, x, z, height, selected: this.selected === entity,
    });
  }

  /** world (x right, z toward the room camera bottom) <-> canvas pixels */
  private worldToPx(x: number, z: number): [number, number] {
    const w = this.canvas.width;
    const h = this.canvas.height;
    const he = this.room.halfExtent;
    const px = ((x + he) / (2 * he)) * w;
    const py = h - ((z + 0.8) / (2 * he + 0.8)) * h;
    return [px, py];
  }

  private pxToWorld(px: number, py: number): [number, number] {
    const w = this.canvas.width;
    const h = this.canvas.height;
    const he = this.room.halfExtent;
    const x = (px / w) * 2 * he - he;
    const z = ((h - py) / h) * (2 * he + 0.8) - 0.8;
    return [x, z];
  }

  private eventPx(e: PointerEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [
      ((e.clientX - rect.left) / rect.width) * this.canvas.width,
      ((e.clientY - rect.top) / rect.height) * this.canvas.height,
    ];
  }

  private hitTest(px: number, py: number): EntityId | null {
    for (const marker of this.markers.values()) {
      const [mx, my] = this.worldToPx(marker.x, marker.z);
      if (Math.hypot(mx - px, my - py) < 14) return marker.entity;
    }
    return null;
  }

  private pointerDown(e: PointerEvent): void {
    const [px, py] = this.eventPx(e);
    const hit = this.hitTest(px, py);
    this.selected = hit;
    this.dragging = hit;
    for (const marker of this.markers.values()) {
      marker.selected = marker.entity === hit;
    }
    this.onSelect(hit);
    if (hit) this.canvas.setPointerCapture(e.pointerId);
    this.draw();
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.dragging) return;
    this.moveTo(this.dragging, e, false);
  }

  private pointerUp(e: PointerEvent): void {
    if (!this.dragging) return;
    const entity = this.dragging;
    this.dragging = null;
    this.moveTo(entity, e, true); // release: final pose persists
  }

  private moveTo(entity: EntityId, e: PointerEvent, final: boolean): void {
    const marker = this.markers.get(entity);
    if (!marker) return;
    const [px, py] = this.eventPx(e);
    const [x, z] = this.pxToWorld(px, py);
    const clamp = clampMarker(
      entity, { x, z, height: marker.height }, this.room, this.glass().origin[2],
    );
    if (clamp.clamped) this.clampedCue = performance.now();
    marker.x = clamp.x;
    marker.z = clamp.z;
    this.onChange(entity, marker, final);
    this.draw();
  }

  setHeight(entity: EntityId, height: number): void {
    const marker = this.markers.get(entity);
    if (!marker) return;
    const clamp = clampMarker(
      entity, { x: marker.x, z: marker.z, height }, this.room,
      this.glass().origin[2],
    );
    marker.height = clamp.height;
    this.onChange(entity, marker, true);
    this.draw();
  }

  draw(): void {
    const ctx = this.ctx;
    const w = this.canvas.width;
    const h = this.canvas.height;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, w, h);

    // room bounds
    const [bx0, by0] = this.worldToPx(-this.room.halfExtent, -0.8);
    const [bx1, by1] = this.worldToPx(this.room.halfExtent, 2 * this.room.halfExtent);
    ctx.strokeStyle = "#2c3442";
    ctx.strokeRect(bx0, by1, bx1 - bx0, by0 - by1);

    // the glass, seen from above
    const glass = this.glass();
    const [gx0, gy0] = this.worldToPx(glass.origin[0], glass.origin[2]);
    const [gx1] = this.worldToPx(glass.origin[0] + glass.width, glass.origin[2]);
    ctx.strokeStyle = "#8fd7e8";
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(gx0, gy0);
    ctx.lineTo(gx1, gy0);
    ctx.stroke();
    ctx.lineWidth = 1;
    ctx.fillStyle = "#8fd7e8";
    ctx.font = "11px system-ui";
    ctx.fillText("glass", gx0, gy0 + 14);

    const flash = performance.now() - this.clampedCue < 350;
    for (const marker of this.markers.values()) {
      const [px, py] = this.worldToPx(marker.x, marker.z);
      ctx.beginPath();
      ctx.arc(px, py, 8, 0, 2 * Math.PI);
      ctx.fillStyle = COLORS[marker.entity] ?? "#999";
      ctx.fill();
      if (marker.selected) {
        ctx.beginPath();
        ctx.arc(px, py, 12, 0, 2 * Math.PI);
        ctx.strokeStyle = flash ? "#ff5d5d" : "#e7e7ef";
        ctx.lineWidth = 2;
        ctx.stroke();
        ctx.lineWidth = 1;
      }
      ctx.fillStyle = "#cfd4dd";
      ctx.fillText(
        `${LABELS[marker.entity]} (${marker.height.toFixed(2)} m)`,
        px + 12, py - 8,
      );
    }
  }
}
