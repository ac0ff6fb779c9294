/** Periodic heartbeat while the tab is visible; feeds dwell-time metrics. */
import type { EventSink } from "./types.js";

export const HEARTBEAT_INTERVAL_MS = 15_000;

export interface VisibilitySource {
  visibilityState: DocumentVisibilityState;
}

export class Heartbeat {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly sink: EventSink,
    private readonly intervalMs: number = HEARTBEAT_INTERVAL_MS,
    private readonly doc: VisibilitySource = document,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => {
      if (this.doc.visibilityState === "visible") {
        this.sink.emit("heartbeat");
      }
    }, this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
