/** Local mirror geometry used only as a consistency check and for plan-view
 * construction. The service remains the single authority; everything here
 * re-derives what the server should have produced from the same inputs so
 * the UI can flag discrepancies.
 *
 * Positions quantize through f32 (Math.fround) to match the pose wire.
 */

export type Vec3 = [number, number, number];

export interface PlaneFrame {
  /** bottom-left corner of the glass, world */
  origin: Vec3;
  width: number;
  height: number;
}

export function f32(v: number): number {
  return Math.fround(v);
}

export function f32v(v: Vec3): Vec3 {
  return [Math.fround(v[0]), Math.fround(v[1]), Math.fround(v[2])];
}

/** Glass frame from a top-edge-centered tracker marker (identity rotation). */
export function frameFromTopEdgeTracker(
  tracker: Vec3,
  width: number,
  height: number,
): PlaneFrame {
  return {
    origin: [tracker[0] - width / 2, tracker[1] - height, tracker[2]],
    width,
    height,
  };
}

export function toLocal(p: Vec3, frame: PlaneFrame): Vec3 {
  return [p[0] - frame.origin[0], p[1] - frame.origin[1], p[2] - frame.origin[2]];
}

/**
 * Glass coordinate where the viewer sees the reflection of a point, one
 * axis. Same quadratic-with-bound-selection construction the service uses;
 * implemented independently here.
 */
export function solveReflection1d(
  p: [number, number],
  v: [number, number],
): number {
  const [px, pz] = p;
  const [vx, vz] = v;
  if (pz <= 0 || vz <= 0) {
    throw new Error(`reflection undefined for depths ${pz}, ${vz}`);
  }
  const lo = Math.min(px, vx);
  const hi = Math.max(px, vx);
  let s: number;
  if (pz === vz) {
    s = 0.5 * (px + vx);
  } else {
    const a = pz * pz - vz * vz;
    const b = px * vz * vz - vx * pz * pz;
    const c = vx * vx * pz * pz - px * px * vz * vz;
    if (Math.abs(a) < 1e-9 * Math.max(pz * pz, vz * vz)) {
      s = b === 0 ? 0.5 * (px + vx) : -c / (2 * b);
    } else {
      const sq = Math.abs(pz * vz * (px - vx));
      const q = b >= 0 ? -(b + sq) : -(b - sq);
      const r1 = q / a;
      const r2 = q !== 0 ? c / q : r1;
      const in1 = r1 >= lo - 1e-9 && r1 <= hi + 1e-9;
      s = in1 ? r1 : r2;
    }
  }
  return Math.min(Math.max(s, lo), hi);
}

export interface BodyDims {
  shoulderHalfWidth: number;
  headRadius: number;
}

export interface AnchorBox {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

/** Mirror-local anchor box: reflected shoulder, head-top and feet extremes. */
export function predictAnchorBox(
  headLocal: Vec3,
  feetLocal: Vec3,
  eyeLocal: Vec3,
  body: BodyDims,
): AnchorBox {
  const [hx, hy, hz] = headLocal;
  const [, fy, fz] = feetLocal;
  const [vx, vy, vz] = eyeLocal;
  const xMin = solveReflection1d([hx - body.shoulderHalfWidth, hz], [vx, vz]);
  const xMax = solveReflection1d([hx + body.shoulderHalfWidth, hz], [vx, vz]);
  let yMax = solveReflection1d([hy + body.headRadius, hz], [vy, vz]);
  let yMin = solveReflection1d([fy, fz], [vy, vz]);
  if (yMin > yMax) [yMin, yMax] = [yMax, yMin];
  return { xMin, xMax, yMin, yMax };
}

/** Normalized [0,1]-screen box with the shape's width scaling applied. */
export function predictNormalizedBox(
  box: AnchorBox,
  frame: PlaneFrame,
  widthScale: number,
): AnchorBox {
  const cx = (box.xMin + box.xMax) / 2;
  const half = ((box.xMax - box.xMin) / 2) * widthScale;
  return {
    xMin: (cx - half) / frame.width,
    xMax: (cx + half) / frame.width,
    yMin: box.yMin / frame.height,
    yMax: box.yMax / frame.height,
  };
}

export function panelDims(diagonalInches: number, aspect = [16, 9]): [number, number] {
  const [ax, ay] = [aspect[0] ?? 16, aspect[1] ?? 9];
  const d = diagonalInches * 0.0254;
  const hyp = Math.hypot(ax, ay);
  return [(d * ax) / hyp, (d * ay) / hyp];
}

export function horizontalFovDeg(eyeLocal: Vec3, width: number): number {
  const [ex, , ez] = eyeLocal;
  return ((Math.atan2(ex, ez) + Math.atan2(width - ex, ez)) * 180) / Math.PI;
}

/** column-major 4x4 times vec4 */
export function mat4MulVec(m: number[], v: [number, number, number, number]) {
  const out: [number, number, number, number] = [0, 0, 0, 0];
  for (let row = 0; row < 4; row++) {
    out[row] =
      (m[row] ?? 0) * v[0] +
      (m[4 + row] ?? 0) * v[1] +
      (m[8 + row] ?? 0) * v[2] +
      (m[12 + row] ?? 0) * v[3];
  }
  return out;
}

/** Project a world point through served (view, projection) to NDC. */
export function projectNdc(proj: number[], view: number[], p: Vec3): Vec3 {
  const cam = mat4MulVec(view, [p[0], p[1], p[2], 1]);
  const clip = mat4MulVec(proj, cam);
  const w = clip[3];
  return [clip[0] / w, clip[1] / w, clip[2] / w];
}

export function glassCorners(frame: PlaneFrame): Vec3[] {
  const { origin, width, height } = frame;
  return [
    [origin[0], origin[1], origin[2]],
    [origin[0] + width, origin[1], origin[2]],
    [origin[0] + width, origin[1] + height, origin[2]],
    [origin[0], origin[1] + height, origin[2]],
  ];
}
