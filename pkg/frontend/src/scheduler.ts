/**
 * Debounced, serialized preview rendering.
 *
 * Slider drags fire many times per second; the scheduler coalesces them
 * into at most one in-flight render, always sending the newest pending
 * request and dropping results that were superseded before they landed.
 */

export interface SchedulerOptions<Req, Res> {
  /** Performs the actual render round-trip. */
  send: (req: Req) => Promise<Res>;
  /** Receives results, in order; never called with a stale result. */
  onResult: (res: Res, req: Req) => void;
  onError?: (err: unknown, req: Req) => void;
  /** Debounce window in ms; 0 sends on the next tick. */
  delayMs?: number;
}

export class PreviewScheduler<Req, Res> {
  private readonly send: (req: Req) => Promise<Res>;
  private readonly onResult: (res: Res, req: Req) => void;
  private readonly onError: (err: unknown, req: Req) => void;
  private readonly delayMs: number;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: Req | null = null;
  private inFlight = false;
  private seq = 0;
  private disposed = false;

  constructor(opts: SchedulerOptions<Req, Res>) {
    this.send = opts.send;
    this.onResult = opts.onResult;
    this.onError = opts.onError ?? (() => undefined);
    this.delayMs = opts.delayMs ?? 150;
  }

  /** True while a render is on the wire or queued behind one. */
  get busy(): boolean {
    return this.inFlight || this.pending !== null || this.timer !== null;
  }

  /** Schedule a render after the debounce window; replaces any queued one. */
  request(req: Req): void {
    if (this.disposed) return;
    this.pending = req;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.drain();
    }, this.delayMs);
  }

  /** Send the newest request immediately (e.g. on slider release). */
  flush(req?: Req): void {
    if (this.disposed) return;
    if (req !== undefined) this.pending = req;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.drain();
  }

  /** Cancels queued work; an in-flight result is dropped when it lands. */
  dispose(): void {
    this.disposed = true;
    this.pending = null;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private drain(): void {
    if (this.inFlight || this.pending === null || this.disposed) return;
    const req = this.pending;
    this.pending = null;
    const ticket = ++this.seq;
    this.inFlight = true;
    this.send(req).then(
      (res) => this.settle(ticket, req, res, null),
      (err) => this.settle(ticket, req, null, err),
    );
  }

  private settle(ticket: number, req: Req, res: Res | null, err: unknown): void {
    this.inFlight = false;
    if (this.disposed) return;
    // A newer request was issued while this one was in flight: its
    // result is stale, so drop it and start the newer one instead.
    const stale = ticket !== this.seq || this.pending !== null;
    if (!stale) {
      if (err !== null) this.onError(err, req);
      else this.onResult(res as Res, req);
    }
    this.drain();
  }
}
