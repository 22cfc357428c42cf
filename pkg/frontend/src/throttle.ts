/** Latest-wins throttle: at most one send per period, newest value wins. */

export class Throttle<T> {
  private pending: T | null = null;
  private lastSent = -Infinity;

  constructor(
    private readonly periodMs: number,
    private readonly send: (value: T) => void,
    private readonly now: () => number = () => performance.now(),
  ) {}

  push(value: T): void {
    this.pending = value;
    this.flush();
  }

  /** Sends the newest pending value if the period has elapsed. */
  flush(): boolean {
    if (this.pending === null) return false;
    const t = this.now();
    if (t - this.lastSent < this.periodMs) return false;
    this.send(this.pending);
    this.pending = null;
    this.lastSent = t;
    return true;
  }
}
