import { describe, expect, it } from "vitest";

import { parseServerMessage } from "../src/schema.js";

const valid = {
  type: "state",
  t: 0.4,
  q: [0, 0, 0, 0, 0, 0, 0],
  p_r: [0.4, -0.1, 0.6],
  rpy_r: [0, 0, 0],
  phi_c: 0.2,
  phi_h: 0.8,
  phi_ho: 0.5,
  w_pred: 0.9,
  bounds: { p1: [-0.3, 0.3], p2: [-0.3, 0.3], o1: [-0.6, 0.6], o2: [-0.6, 0.6] },
  e_orth: [0, 0, 0, 0],
  status: "ok",
};

describe("parseServerMessage", () => {
  it("accepts a valid state message", () => {
    const msg = parseServerMessage(JSON.stringify(valid));
    expect(msg?.type).toBe("state");
    if (msg?.type === "state") {
      expect(msg.phi_ho).toBeCloseTo(0.5, 12);
    }
  });

  it("accepts error messages", () => {
    const msg = parseServerMessage(JSON.stringify({ type: "error", code: "parse" }));
    expect(msg).toEqual({ type: "error", code: "parse", detail: undefined });
  });

  it("rejects malformed JSON and wrong shapes", () => {
    expect(parseServerMessage("{oops")).toBeNull();
    expect(parseServerMessage(JSON.stringify({ type: "state" }))).toBeNull();
    expect(
      parseServerMessage(JSON.stringify({ ...valid, q: [1, 2, 3] })),
    ).toBeNull();
    expect(
      parseServerMessage(JSON.stringify({ ...valid, bounds: { p1: [0] } })),
    ).toBeNull();
    expect(parseServerMessage(JSON.stringify({ type: "telemetry" }))).toBeNull();
  });
});
