/** Operator console entry point: wires the canvases to the bridge. */

import { BridgeClient, Transport } from "./client.js";
import { PhiPlot } from "./plot.js";
import { parseLogCsv } from "./replay.js";
import { applyState, drawScene, makeScene, progressFractions } from "./scene.js";
import { View, screenToWorld } from "./views.js";

const CADENCE_MS = 100; // matches the planner control period

function canvasCtx(id: string): [HTMLCanvasElement, CanvasRenderingContext2D] {
  const canvas = document.getElementById(id) as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error(`no 2d context for #${id}`);
  return [canvas, ctx];
}

function makeView(kind: "top" | "side", canvas: HTMLCanvasElement, plane: number): View {
  return {
    kind,
    plane,
    vp: {
      width: canvas.width,
      height: canvas.height,
      centerX: 0.55,
      centerY: kind === "top" ? 0.05 : 0.65,
      pixelsPerMeter: 350,
    },
  };
}

function main(): void {
  const [topCanvas, topCtx] = canvasCtx("view-top");
  const [sideCanvas, sideCtx] = canvasCtx("view-side");
  const [plotCanvas, plotCtx] = canvasCtx("plot");
  const statusEl = document.getElementById("status")!;
  const barEls = ["bar-robot", "bar-human", "bar-goal"].map(
    (id) => document.getElementById(id) as HTMLDivElement,
  );

  const topView = makeView("top", topCanvas, 0.7);
  const sideView = makeView("side", sideCanvas, 0.1);
  const scene = makeScene();
  const plot = new PhiPlot();

  const params = new URLSearchParams(location.search);
  const replayUrl = params.get("replay");

  const render = () => {
    drawScene(topCtx, topView, scene);
    drawScene(sideCtx, sideView, scene);
    plot.draw(plotCtx, plotCanvas.width, plotCanvas.height);
    if (scene.latest) {
      const fractions = progressFractions(scene.latest);
      fractions.forEach((f, i) => {
        barEls[i].style.width = `${Math.min(100, Math.max(0, f * 100)).toFixed(1)}%`;
      });
    }
    requestAnimationFrame(render);
  };
  requestAnimationFrame(render);

  if (replayUrl) {
    statusEl.textContent = `replaying ${replayUrl}`;
    fetch(replayUrl)
      .then((r) => r.text())
      .then((text) => {
        const messages = parseLogCsv(text);
        let i = 0;
        const timer = setInterval(() => {
          if (i >= messages.length) {
            clearInterval(timer);
            return;
          }
          applyState(scene, messages[i]);
          plot.append(messages[i]);
          i += 1;
        }, CADENCE_MS);
      });
    return;
  }

  const port = params.get("port") ?? "8732";
  const ws = new WebSocket(`ws://${location.hostname || "127.0.0.1"}:${port}/ws`);
  const transport: Transport = { send: (d: string) => ws.send(d), onmessage: null };
  const client = new BridgeClient(transport, CADENCE_MS);
  ws.onmessage = (ev) => transport.onmessage?.({ data: String(ev.data) });
  client.onState = (msg) => {
    if (msg.type === "error") {
      statusEl.textContent = `error: ${msg.code} ${msg.detail ?? ""}`;
      return;
    }
    applyState(scene, msg);
    plot.append(msg);
    statusEl.textContent = `t=${msg.t.toFixed(1)} s  w_pred=${msg.w_pred.toFixed(3)}`;
  };
  client.onDrop = () => {
    statusEl.textContent = "dropped a malformed server message";
  };
  ws.onopen = () => client.control("start");

  let clock = 0;
  const drag = (view: View) => (ev: MouseEvent) => {
    if (ev.buttons !== 1) return;
    const target = ev.target as HTMLCanvasElement;
    const rect = target.getBoundingClientRect();
    const world = screenToWorld(view, ev.clientX - rect.left, ev.clientY - rect.top);
    scene.hand = world;
    clock += CADENCE_MS / 1000;
    client.sendHandPose(clock, world, [0.08, -0.04, 0.06]);
  };
  topCanvas.addEventListener("mousemove", drag(topView));
  sideCanvas.addEventListener("mousemove", drag(sideView));
  setInterval(() => client.tick(), CADENCE_MS / 2);
}

main();
