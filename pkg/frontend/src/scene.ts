/** Scene rendering: robot marker, path corridor, goal box, hand marker.
 *
 * Drawing goes through the Draw2D subset of CanvasRenderingContext2D so
 * the render path is testable with a recording stub.
 */

import { StateMessage } from "./schema.js";
import { View, worldToScreen } from "./views.js";

export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface SceneState {
  latest: StateMessage | null;
  /** end-effector trail in world coordinates */
  trail: Array<[number, number, number]>;
  hand: [number, number, number] | null;
  dropped: number; // schema-invalid messages
}

export function makeScene(): SceneState {
  return { latest: null, trail: [], hand: null, dropped: 0 };
}

export function applyState(scene: SceneState, msg: StateMessage): void {
  scene.latest = msg;
  scene.trail.push([...msg.p_r]);
  if (scene.trail.length > 600) scene.trail.shift();
}

/** Corridor half-width drawn around the robot marker, from the bounds. */
export function corridorExtents(msg: StateMessage): [number, number] {
  const w1 = (msg.bounds.p1[1] - msg.bounds.p1[0]) / 2;
  const w2 = (msg.bounds.p2[1] - msg.bounds.p2[0]) / 2;
  return [w1, w2];
}

export function drawScene(ctx: Draw2D, view: View, scene: SceneState): void {
  const { vp } = view;
  ctx.clearRect(0, 0, vp.width, vp.height);
  const msg = scene.latest;
  if (!msg) return;

  // end-effector trail
  ctx.strokeStyle = "#888888";
  ctx.lineWidth = 1;
  ctx.beginPath();
  scene.trail.forEach((p, i) => {
    const [x, y] = worldToScreen(view, p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();

  // corridor box around the end effector (from the logged bound values)
  const [w1, w2] = corridorExtents(msg);
  const [ex, ey] = worldToScreen(view, msg.p_r);
  const sx = Math.max(w1 * vp.pixelsPerMeter, 1);
  const sy = Math.max(w2 * vp.pixelsPerMeter, 1);
  ctx.strokeStyle = "#999999";
  ctx.beginPath();
  ctx.rect(ex - sx, ey - sy, 2 * sx, 2 * sy);
  ctx.stroke();

  // robot end effector
  ctx.fillStyle = "#ba122b";
  ctx.beginPath();
  ctx.arc(ex, ey, 6, 0, 2 * Math.PI);
  ctx.fill();

  // hand marker
  if (scene.hand) {
    const [hx, hy] = worldToScreen(view, scene.hand);
    ctx.fillStyle = "#006599";
    ctx.beginPath();
    ctx.arc(hx, hy, 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  ctx.fillStyle = "#222222";
  ctx.fillText(
    `t=${msg.t.toFixed(1)}s  w=${msg.w_pred.toFixed(3)}  ${msg.status}`,
    8,
    14,
  );
}

/** Progress bars for robot / human / goal path parameters. */
export function progressFractions(msg: StateMessage): [number, number, number] {
  const span = Math.max(msg.phi_ho, msg.phi_h, msg.phi_c, 1e-9);
  return [msg.phi_c / span, msg.phi_h / span, msg.phi_ho / span];
}
