/** Bundled static demo scene, versioned with the repo so visual regressions
 * stay screenshot-testable. World coordinates; the virtual world occupies
 * the room side of the glass (z > 0 for the default glass placement).
 *
 * Landmarks are arranged so lateral viewer motion reveals things: a house
 * off to the right, a tower to the left, posts marching into the depth.
 */

export interface Tri {
  v: [number, number, number][];
  color: [number, number, number, number];
}

export interface Line {
  a: [number, number, number];
  b: [number, number, number];
  color: [number, number, number, number];
}

const GROUND: [number, number, number, number] = [0.16, 0.22, 0.18, 1];
const GRID: [number, number, number, number] = [0.28, 0.36, 0.3, 1];
const WALL: [number, number, number, number] = [0.55, 0.42, 0.28, 1];
const ROOF: [number, number, number, number] = [0.62, 0.2, 0.16, 1];
const TOWER: [number, number, number, number] = [0.4, 0.42, 0.52, 1];
const POST: [number, number, number, number] = [0.7, 0.65, 0.4, 1];

function quad(
  a: [number, number, number],
  b: [number, number, number],
  c: [number, number, number],
  d: [number, number, number],
  color: [number, number, number, number],
): Tri[] {
  return [
    { v: [a, b, c], color },
    { v: [a, c, d], color },
  ];
}

function box(
  cx: number, cz: number, w: number, d: number, y0: number, y1: number,
  color: [number, number, number, number],
): Tri[] {
  const x0 = cx - w / 2, x1 = cx + w / 2;
  const z0 = cz - d / 2, z1 = cz + d / 2;
  return [
    ...quad([x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0], color),
    ...quad([x1, y0, z1], [x0, y0, z1], [x0, y1, z1], [x1, y1, z1], color),
    ...quad([x0, y0, z1], [x0, y0, z0], [x0, y1, z0], [x0, y1, z1], color),
    ...quad([x1, y0, z0], [x1, y0, z1], [x1, y1, z1], [x1, y1, z0], color),
    ...quad([x0, y1, z0], [x1, y1, z0], [x1, y1, z1], [x0, y1, z1], color),
  ];
}

export function demoScene(): { tris: Tri[]; lines: Line[] } {
  const tris: Tri[] = [];
  const lines: Line[] = [];

  tris.push(...quad([-6, 0, 0.2], [6, 0, 0.2], [6, 0, 9], [-6, 0, 9], GROUND));
  for (let x = -6; x <= 6; x += 1) {
    lines.push({ a: [x, 0.001, 0.2], b: [x, 0.001, 9], color: GRID });
  }
  for (let z = 1; z <= 9; z += 1) {
    lines.push({ a: [-6, 0.001, z], b: [6, 0.001, z], color: GRID });
  }

  // the house in the right corner
  tris.push(...box(2.2, 3.2, 1.4, 1.1, 0, 1.0, WALL));
  tris.push(
    { v: [[1.5, 1.0, 2.65], [2.9, 1.0, 2.65], [2.2, 1.6, 3.2]], color: ROOF },
    { v: [[2.9, 1.0, 3.75], [1.5, 1.0, 3.75], [2.2, 1.6, 3.2]], color: ROOF },
    { v: [[1.5, 1.0, 2.65], [2.2, 1.6, 3.2], [1.5, 1.0, 3.75]], color: ROOF },
    { v: [[2.9, 1.0, 3.75], [2.2, 1.6, 3.2], [2.9, 1.0, 2.65]], color: ROOF },
  );

  // watchtower on the left
  tris.push(...box(-2.4, 4.6, 0.6, 0.6, 0, 2.2, TOWER));
  tris.push(...box(-2.4, 4.6, 0.9, 0.9, 2.2, 2.5, ROOF));

  // fence posts marching into the depth
  for (let i = 0; i < 6; i++) {
    tris.push(...box(-0.6 + 0.12 * i, 1.2 + i * 1.2, 0.08, 0.08, 0, 0.7, POST));
  }

  return { tris, lines };
}
