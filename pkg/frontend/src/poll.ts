/** Fixed-interval poller. Ticks never overlap: while one request is in
 * flight, later interval firings are dropped, so concurrent polls coalesce.
 */

export const POLL_INTERVAL_MS = 2000;

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private busy = false;

  constructor(
    private readonly tick: () => Promise<void>,
    private readonly intervalMs = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.fire(), this.intervalMs);
  }

  stop(): void {
    if (this.timer === null) return;
    clearInterval(this.timer);
    this.timer = null;
  }

  get running(): boolean {
    return this.timer !== null;
  }

  private async fire(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.tick();
    } catch {
      // a failed poll is retried on the next interval
    } finally {
      this.busy = false;
    }
  }
}
