/** Progress-curve panel: appends (t, phi_c, phi_h, phi_ho) per state. */

import { StateMessage } from "./schema.js";
import { Draw2D } from "./scene.js";

export interface PhiSample {
  t: number;
  phiC: number;
  phiH: number;
  phiHo: number;
}

export class PhiPlot {
  readonly samples: PhiSample[] = [];

  constructor(private readonly maxSamples = 2000) {}

  append(msg: StateMessage): void {
    this.samples.push({ t: msg.t, phiC: msg.phi_c, phiH: msg.phi_h, phiHo: msg.phi_ho });
    if (this.samples.length > this.maxSamples) {
      this.samples.shift();
    }
  }

  clear(): void {
    this.samples.length = 0;
  }

  /** Final spread between the three curves; small once the handover met. */
  finalSpread(): number {
    const last = this.samples[this.samples.length - 1];
    if (!last) return Infinity;
    return Math.max(
      Math.abs(last.phiC - last.phiHo),
      Math.abs(last.phiH - last.phiHo),
    );
  }

  draw(ctx: Draw2D, width: number, height: number): void {
    ctx.clearRect(0, 0, width, height);
    if (this.samples.length < 2) return;
    const t0 = this.samples[0].t;
    const t1 = this.samples[this.samples.length - 1].t;
    let lo = Infinity;
    let hi = -Infinity;
    for (const s of this.samples) {
      lo = Math.min(lo, s.phiC, s.phiH, s.phiHo);
      hi = Math.max(hi, s.phiC, s.phiH, s.phiHo);
    }
    const pad = 0.05 * (hi - lo || 1);
    lo -= pad;
    hi += pad;
    const px = (t: number) => ((t - t0) / (t1 - t0 || 1)) * (width - 10) + 5;
    const py = (v: number) => height - ((v - lo) / (hi - lo)) * (height - 10) - 5;
    const series: Array<[keyof PhiSample, string]> = [
      ["phiC", "#ba122b"],
      ["phiH", "#006599"],
      ["phiHo", "#fccc47"],
    ];
    for (const [key, color] of series) {
      ctx.strokeStyle = color;
      ctx.beginPath();
      this.samples.forEach((s, i) => {
        const x = px(s.t);
        const y = py(s[key] as number);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    }
  }
}
