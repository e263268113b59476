/** Wires the sandbox together: session connection, plan-view steering, the
 * live window, preset/shape what-if exploration and consistency badges. */

import { frameFromTopEdgeTracker, PlaneFrame, Vec3 } from "./geometry.js";
import { connect, PoseSender } from "./net.js";
import { ConfigMsg, EntityId, FrameMsg, frameIsFinite } from "./protocol.js";
import { PlanView } from "./plan.js";
import { WindowRenderer } from "./render.js";
import {
  ConsistencyMonitor,
  predictOutlineBox,
  outlineDiscrepancy,
  SHAPE_WIDTH_SCALE,
  ViewportState,
} from "./state.js";

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

const params = new URLSearchParams(location.search);
const serviceBase = params.get("service") ?? "http://127.0.0.1:47801";

const state = new ViewportState();
const monitor = new ConsistencyMonitor();
let config: ConfigMsg["config"] | null = null;
let renderer: WindowRenderer | null = null;
let plan: PlanView | null = null;
let sender: PoseSender | null = null;
let mirrorDragged = false;
let whatIfBusy = false;

function glassFrame(): PlaneFrame {
  const width = config?.mirror_width ?? 0.531;
  const height = config?.mirror_height ?? 0.299;
  const tracker = plan?.markers.get("mirror");
  if (tracker && mirrorDragged) {
    return frameFromTopEdgeTracker(
      [tracker.x, tracker.height, tracker.z], width, height,
    );
  }
  const origin = (config?.mirror_origin ?? [0, 0, 0]) as Vec3;
  return { origin, width, height };
}

function setBadge(id: string, on: boolean, text?: string): void {
  const el = $(id);
  el.classList.toggle("on", on);
  if (text !== undefined) el.textContent = text;
}

function pushMarker(entity: EntityId, marker: { x: number; height: number; z: number }): void {
  sender?.push(entity, [marker.x, marker.height, marker.z]);
  if (entity === "mirror") mirrorDragged = true;
}

function initMarkers(): void {
  if (!plan || !config) return;
  const w = config.mirror_width;
  plan.setMarker("viewer", w / 2, 1.0, 1.55);
  plan.setMarker("player_head", w / 2 - 0.1, 1.8, 1.7);
  plan.setMarker("controller_left", w / 2 - 0.45, 1.6, 1.1);
  plan.setMarker("controller_right", w / 2 + 0.3, 1.6, 1.1);
  plan.setMarker("mirror", w / 2, 0.0, config.mirror_height);
  for (const marker of plan.markers.values()) {
    if (marker.entity === "mirror") continue; // static frame until dragged
    pushMarker(marker.entity, marker);
  }
  void sender?.flush();
  plan.draw();
}

function renderFrame(frame: FrameMsg): void {
  if (!renderer) return;
  if (!frameIsFinite(frame)) {
    setBadge("badge-error", true, "non-finite matrix: frame skipped");
    return;
  }
  const showCorners = ($("corners") as HTMLInputElement).checked;
  renderer.render(frame, { corners: showCorners ? glassFrame() : null });

  const fov = frame.fov?.h_fov_deg;
  $("fov").textContent = fov ? `${fov.toFixed(1)} deg` : "-";
  $("tick").textContent = String(frame.tick);
  setBadge("badge-frozen", frame.frozen, "frozen: stale poses");
  const stale = Object.entries(frame.stale)
    .filter(([name, s]) => s && (name === "viewer" || name === "player_head"))
    .map(([name]) => name);
  setBadge("badge-stale", stale.length > 0, `stale: ${stale.join(", ")}`);

  if (plan && config && state.preset === "live" && state.shape === config.shape_variant) {
    const predicted = predictOutlineBox({
      markers: plan.markers,
      frame: glassFrame(),
      capToEye: config.cap_to_eye,
      floorY: config.floor_y,
      body: {
        shoulderHalfWidth: config.shoulder_half_width,
        headRadius: config.head_radius,
      },
      widthScale: SHAPE_WIDTH_SCALE[config.shape_variant] ?? 1,
    });
    const mismatch = monitor.update(outlineDiscrepancy(frame, predicted));
    setBadge("badge-consistency", mismatch,
      `geometry mismatch > 1e-4 (worst ${monitor.worst.toExponential(1)})`);
  }
}

async function refreshWhatIf(): Promise<void> {
  if (!config || whatIfBusy) return;
  const dims = state.presetDims(config);
  const shapeOverride = state.shape !== config.shape_variant ? state.shape : null;
  const live = dims === null && shapeOverride === null;
  setBadge("badge-whatif", !live, "what-if view");
  if (live) {
    state.whatIfFrame = null;
    return;
  }
  whatIfBusy = true;
  try {
    const body: Record<string, unknown> = {};
    if (dims) {
      body.mirror_width = dims[0];
      body.mirror_height = dims[1];
    }
    if (shapeOverride) body.shape_variant = shapeOverride;
    const res = await fetch(`${serviceBase}/what-if`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const doc = await res.json();
    if (doc.ok) {
      state.whatIfFrame = { type: "frame", ...doc.frame } as FrameMsg;
      const fov = state.whatIfFrame.fov?.h_fov_deg;
      if (fov) $("fov").textContent = `${fov.toFixed(1)} deg (what-if)`;
      renderWhatIf();
    }
  } catch {
    // service hiccups surface through the connection badge
  } finally {
    whatIfBusy = false;
  }
}

function renderWhatIf(): void {
  const frame = state.whatIfFrame;
  if (!frame || !renderer) return;
  const showCorners = ($("corners") as HTMLInputElement).checked;
  const dims = config ? state.presetDims(config) : null;
  const glass = glassFrame();
  const corners: PlaneFrame | null = showCorners
    ? {
        origin: glass.origin,
        width: dims?.[0] ?? glass.width,
        height: dims?.[1] ?? glass.height,
      }
    : null;
  renderer.render(frame, { corners });
}

function bindControls(): void {
  for (const preset of ["live", "24in", "50in", "custom"] as const) {
    $(`preset-${preset}`).addEventListener("click", () => {
      state.preset = preset;
      document.querySelectorAll(".preset").forEach((el) =>
        el.classList.toggle("active", el.id === `preset-${preset}`));
      void refreshWhatIf();
    });
  }
  ($("custom-diagonal") as HTMLInputElement).addEventListener("change", (e) => {
    state.customDiagonalIn = Number((e.target as HTMLInputElement).value) || 32;
    if (state.preset === "custom") void refreshWhatIf();
  });
  ($("shape") as HTMLSelectElement).addEventListener("change", (e) => {
    state.shape = (e.target as HTMLSelectElement).value;
    void refreshWhatIf();
  });
  ($("height") as HTMLInputElement).addEventListener("input", (e) => {
    const entity = plan?.selected;
    if (entity && plan) {
      plan.setHeight(entity, Number((e.target as HTMLInputElement).value));
    }
  });
}

function start(): void {
  renderer = new WindowRenderer(
    $("window-gl") as HTMLCanvasElement,
    $("window-overlay") as HTMLCanvasElement,
  );
  sender = new PoseSender(serviceBase);
  sender.start();
  plan = new PlanView(
    $("plan") as HTMLCanvasElement,
    { halfExtent: 3.0, height: 2.5 },
    glassFrame,
    (entity, marker) => pushMarker(entity, marker),
    (entity) => {
      const slider = $("height") as HTMLInputElement;
      const marker = entity && plan?.markers.get(entity);
      slider.disabled = !marker;
      if (marker) slider.value = String(marker.height);
    },
  );
  plan.draw();
  bindControls();

  connect(serviceBase, {
    onConfig(msg) {
      config = msg.config;
      $("shape").querySelectorAll("option").forEach((opt) => {
        opt.selected = opt.value === config!.shape_variant;
      });
      state.shape = config.shape_variant;
      initMarkers();
    },
    onFrame(msg) {
      if (!state.applyFrame(msg)) return;
      if (state.preset === "live" && state.shape === (config?.shape_variant ?? state.shape)) {
        renderFrame(msg);
      } else {
        void refreshWhatIf();
      }
    },
    onError(reason) {
      setBadge("badge-error", true, reason);
    },
    onStatus(status) {
      $("status").textContent = status;
      $("status").className = `status ${status}`;
    },
  });
}

start();
