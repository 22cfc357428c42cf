/** Batch log CSV -> state messages, so the console runs without a planner. */

import { StateMessage } from "./schema.js";

const HEADER =
  "t,q1,q2,q3,q4,q5,q6,q7,dq1,dq2,dq3,dq4,dq5,dq6,dq7," +
  "prx,pry,prz,rr,rp,ry,phi_c,dphi,phi_h,phi_ho,w_pred," +
  "ep1,ep2,eo1,eo2," +
  "b_p1_lo,b_p1_up,b_p2_lo,b_p2_up,b_o1_lo,b_o1_up,b_o2_lo,b_o2_up," +
  "status,solve_ms";

export function parseLogCsv(text: string): StateMessage[] {
  const lines = text.trim().split(/\r?\n/);
  if (lines[0] !== HEADER) {
    throw new Error("unexpected log header");
  }
  const col = new Map(lines[0].split(",").map((name, i) => [name, i]));
  const at = (parts: string[], name: string) => Number(parts[col.get(name)!]);
  const out: StateMessage[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    out.push({
      type: "state",
      t: at(parts, "t"),
      q: [1, 2, 3, 4, 5, 6, 7].map((j) => at(parts, `q${j}`)),
      p_r: [at(parts, "prx"), at(parts, "pry"), at(parts, "prz")],
      rpy_r: [at(parts, "rr"), at(parts, "rp"), at(parts, "ry")],
      phi_c: at(parts, "phi_c"),
      phi_h: at(parts, "phi_h"),
      phi_ho: at(parts, "phi_ho"),
      w_pred: at(parts, "w_pred"),
      bounds: {
        p1: [at(parts, "b_p1_lo"), at(parts, "b_p1_up")],
        p2: [at(parts, "b_p2_lo"), at(parts, "b_p2_up")],
        o1: [at(parts, "b_o1_lo"), at(parts, "b_o1_up")],
        o2: [at(parts, "b_o2_lo"), at(parts, "b_o2_up")],
      },
      e_orth: [at(parts, "ep1"), at(parts, "ep2"), at(parts, "eo1"), at(parts, "eo2")],
      status: parts[col.get("status")!],
    });
  }
  return out;
}

/** Emits the messages on a timer, like the bridge's replay endpoint. */
export class MockReplayServer {
  private handlers: Array<(msg: StateMessage) => void> = [];

  constructor(private readonly messages: StateMessage[]) {}

  onState(fn: (msg: StateMessage) => void): void {
    this.handlers.push(fn);
  }

  /** Pushes every message synchronously (tests) or paced by the caller. */
  playAll(): number {
    for (const msg of this.messages) {
      for (const fn of this.handlers) fn(msg);
    }
    return this.messages.length;
  }

  get length(): number {
    return this.messages.length;
  }
}
