/** Planner-bridge client: schema-checked receive, throttled hand poses. */

import { ControlMessage, HandPoseMessage, ServerMessage, parseServerMessage } from "./schema.js";
import { Throttle } from "./throttle.js";

export interface Transport {
  send(data: string): void;
  onmessage: ((ev: { data: string }) => void) | null;
}

export class BridgeClient {
  private readonly throttle: Throttle<HandPoseMessage>;
  onState: ((msg: ServerMessage) => void) | null = null;
  onDrop: ((raw: string) => void) | null = null;

  constructor(
    private readonly transport: Transport,
    cadenceMs: number,
    now?: () => number,
  ) {
    this.throttle = new Throttle<HandPoseMessage>(
      cadenceMs,
      (msg) => this.transport.send(JSON.stringify(msg)),
      now,
    );
    transport.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      if (msg === null) {
        this.onDrop?.(ev.data);
        return;
      }
      this.onState?.(msg);
    };
  }

  control(action: ControlMessage["action"], scenario?: string): void {
    const msg: ControlMessage = { type: "control", action, scenario };
    this.transport.send(JSON.stringify(msg));
  }

  /** Queues a hand pose; the newest one goes out once per cadence. */
  sendHandPose(t: number, p: [number, number, number], rpy: [number, number, number]): void {
    this.throttle.push({ type: "hand_pose", t, p, rpy });
  }

  tick(): void {
    this.throttle.flush();
  }
}
