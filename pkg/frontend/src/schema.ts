/** Wire-format messages exchanged with the planner bridge. */

export interface Bounds {
  p1: [number, number];
  p2: [number, number];
  o1: [number, number];
  o2: [number, number];
}

export interface StateMessage {
  type: "state";
  t: number;
  q: number[];
  p_r: [number, number, number];
  rpy_r: [number, number, number];
  phi_c: number;
  phi_h: number;
  phi_ho: number;
  w_pred: number;
  bounds: Bounds;
  e_orth: [number, number, number, number];
  status: string;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail?: string;
}

export interface HandPoseMessage {
  type: "hand_pose";
  t: number;
  p: [number, number, number];
  rpy: [number, number, number];
}

export interface ControlMessage {
  type: "control";
  action: "start" | "pause" | "reset";
  scenario?: string;
}

export type ServerMessage = StateMessage | ErrorMessage;

function isVec(v: unknown, n: number): v is number[] {
  return Array.isArray(v) && v.length === n && v.every((x) => typeof x === "number" && isFinite(x));
}

function isPair(v: unknown): v is [number, number] {
  return isVec(v, 2);
}

/** Validates a decoded server frame; returns null when it is not usable. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (m.type === "error" && typeof m.code === "string") {
    return { type: "error", code: m.code, detail: typeof m.detail === "string" ? m.detail : undefined };
  }
  if (m.type !== "state") return null;
  const b = m.bounds as Record<string, unknown> | undefined;
  const ok =
    typeof m.t === "number" &&
    isVec(m.q, 7) &&
    isVec(m.p_r, 3) &&
    isVec(m.rpy_r, 3) &&
    typeof m.phi_c === "number" &&
    typeof m.phi_h === "number" &&
    typeof m.phi_ho === "number" &&
    typeof m.w_pred === "number" &&
    b !== undefined &&
    isPair(b.p1) &&
    isPair(b.p2) &&
    isPair(b.o1) &&
    isPair(b.o2) &&
    isVec(m.e_orth, 4) &&
    typeof m.status === "string";
  if (!ok) return null;
  return m as unknown as StateMessage;
}
