/** The live window: a WebGL pass that applies the served matrices verbatim
 * to the demo scene, plus a 2D overlay for the silhouette and diagnostics.
 *
 * The served view matrix contains the glass reflection (3x3 determinant
 * -1), which flips triangle winding; face culling stays off for that
 * reason. The demo scene lives entirely on the kept side of the oblique
 * clip plane, so no extra clipping pass is needed here.
 */

import { glassCorners, PlaneFrame, projectNdc, Vec3 } from "./geometry.js";
import { FrameMsg } from "./protocol.js";
import { demoScene, Line, Tri } from "./scene.js";

const VERT = `
attribute vec3 pos;
uniform mat4 uView;
uniform mat4 uProj;
void main() {
  gl_Position = uProj * uView * vec4(pos, 1.0);
}
`;

const FRAG = `
precision mediump float;
uniform vec4 uColor;
void main() {
  gl_FragColor = uColor;
}
`;

interface Batch {
  buffer: WebGLBuffer;
  count: number;
  mode: number;
  color: [number, number, number, number];
}

export class WindowRenderer {
  private gl: WebGLRenderingContext;
  private program: WebGLProgram;
  private posLoc: number;
  private viewLoc: WebGLUniformLocation;
  private projLoc: WebGLUniformLocation;
  private colorLoc: WebGLUniformLocation;
  private batches: Batch[] = [];
  private ctx2d: CanvasRenderingContext2D;

  constructor(
    private glCanvas: HTMLCanvasElement,
    private overlay: HTMLCanvasElement,
  ) {
    const gl = glCanvas.getContext("webgl");
    if (!gl) throw new Error("WebGL unavailable");
    this.gl = gl;
    this.program = this.compile();
    this.posLoc = gl.getAttribLocation(this.program, "pos");
    this.viewLoc = gl.getUniformLocation(this.program, "uView")!;
    this.projLoc = gl.getUniformLocation(this.program, "uProj")!;
    this.colorLoc = gl.getUniformLocation(this.program, "uColor")!;
    const ctx = overlay.getContext("2d");
    if (!ctx) throw new Error("2D context unavailable");
    this.ctx2d = ctx;
    this.loadScene();
  }

  private compile(): WebGLProgram {
    const gl = this.gl;
    const make = (type: number, src: string) => {
      const shader = gl.createShader(type)!;
      gl.shaderSource(shader, src);
      gl.compileShader(shader);
      if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
        throw new Error(String(gl.getShaderInfoLog(shader)));
      }
      return shader;
    };
    const program = gl.createProgram()!;
    gl.attachShader(program, make(gl.VERTEX_SHADER, VERT));
    gl.attachShader(program, make(gl.FRAGMENT_SHADER, FRAG));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(String(gl.getProgramInfoLog(program)));
    }
    return program;
  }

  private upload(data: number[], mode: number, color: Batch["color"]): void {
    const gl = this.gl;
    const buffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, buffer);
    gl.bufferData(gl.ARRAY_BUFFER, new Float32Array(data), gl.STATIC_DRAW);
    this.batches.push({ buffer, count: data.length / 3, mode, color });
  }

  private loadScene(): void {
    const { tris, lines } = demoScene();
    const byColor = new Map<string, { color: Tri["color"]; verts: number[] }>();
    for (const tri of tris) {
      const key = tri.color.join(",");
      const entry = byColor.get(key) ?? { color: tri.color, verts: [] };
      for (const v of tri.v) entry.verts.push(...v);
      byColor.set(key, entry);
    }
    for (const { color, verts } of byColor.values()) {
      this.upload(verts, this.gl.TRIANGLES, color);
    }
    const lineVerts: number[] = [];
    let lineColor: Line["color"] = [1, 1, 1, 1];
    for (const line of lines) {
      lineVerts.push(...line.a, ...line.b);
      lineColor = line.color;
    }
    if (lineVerts.length) this.upload(lineVerts, this.gl.LINES, lineColor);
  }

  /** Draw one frame; returns false when the matrices are not finite. */
  render(frame: FrameMsg, opts: { corners?: PlaneFrame | null } = {}): boolean {
    const all = frame.view.concat(frame.proj);
    if (!all.every(Number.isFinite)) return false;
    const gl = this.gl;
    const w = this.glCanvas.width;
    const h = this.glCanvas.height;
    gl.viewport(0, 0, w, h);
    gl.clearColor(0.09, 0.11, 0.16, 1);
    gl.enable(gl.DEPTH_TEST);
    gl.disable(gl.CULL_FACE); // reflected scene flips winding
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
    gl.useProgram(this.program);
    gl.uniformMatrix4fv(this.viewLoc, false, new Float32Array(frame.view));
    gl.uniformMatrix4fv(this.projLoc, false, new Float32Array(frame.proj));
    for (const batch of this.batches) {
      gl.bindBuffer(gl.ARRAY_BUFFER, batch.buffer);
      gl.enableVertexAttribArray(this.posLoc);
      gl.vertexAttribPointer(this.posLoc, 3, gl.FLOAT, false, 0, 0);
      gl.uniform4fv(this.colorLoc, batch.color);
      gl.drawArrays(batch.mode, 0, batch.count);
    }
    this.drawOverlay(frame, opts.corners ?? null);
    return true;
  }

  private drawOverlay(frame: FrameMsg, corners: PlaneFrame | null): void {
    const ctx = this.ctx2d;
    const w = this.overlay.width;
    const h = this.overlay.height;
    ctx.clearRect(0, 0, w, h);

    const toPx = (u: number, v: number): [number, number] => [u * w, (1 - v) * h];

    const outline = frame.polygon.outline;
    if (outline.length >= 3) {
      ctx.beginPath();
      const first = outline[0]!;
      ctx.moveTo(...toPx(first[0], first[1]));
      for (const [u, v] of outline.slice(1)) ctx.lineTo(...toPx(u, v));
      ctx.closePath();
      ctx.fillStyle = `rgba(0, 0, 0, ${frame.polygon.opacity})`;
      ctx.fill();
    }
    for (const cap of frame.polygon.capsules) {
      ctx.beginPath();
      ctx.moveTo(...toPx(cap.a[0], cap.a[1]));
      ctx.lineTo(...toPx(cap.b[0], cap.b[1]));
      ctx.lineWidth = Math.max(1, 2 * cap.r * w);
      ctx.lineCap = "round";
      ctx.strokeStyle = `rgba(0, 0, 0, ${frame.polygon.opacity})`;
      ctx.stroke();
    }

    if (corners) {
      // the glass corners must land exactly in the viewport corners
      ctx.strokeStyle = "rgba(120, 220, 140, 0.9)";
      ctx.lineWidth = 1.5;
      for (const corner of glassCorners(corners)) {
        const ndc = projectNdc(frame.proj, frame.view, corner as Vec3);
        const [px, py] = toPx((ndc[0] + 1) / 2, (ndc[1] + 1) / 2);
        ctx.beginPath();
        ctx.moveTo(px - 8, py);
        ctx.lineTo(px + 8, py);
        ctx.moveTo(px, py - 8);
        ctx.lineTo(px, py + 8);
        ctx.stroke();
      }
    }
  }
}
