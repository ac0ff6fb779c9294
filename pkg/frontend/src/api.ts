/** HTTP client for the recommendation service and the batching event queue. */
import type {
  EventKind,
  EventPayload,
  EventSink,
  Portrait,
  RecsResponse,
  SignUpResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const JSON_HEADERS = { "Content-Type": "application/json" };

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const err = (body ?? {}) as { code?: string; message?: string };
      throw new ApiError(
        response.status,
        err.code ?? "error",
        err.message ?? `request failed with status ${response.status}`,
      );
    }
    return body as T;
  }

  signUp(userId: string): Promise<SignUpResponse> {
    return this.request<SignUpResponse>("/users", {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({ user_id: userId }),
    });
  }

  portrait(userId: string): Promise<Portrait> {
    return this.request<Portrait>(`/portrait/${encodeURIComponent(userId)}`);
  }

  recommendations(userId: string): Promise<RecsResponse> {
    return this.request<RecsResponse>(`/recommendations/${encodeURIComponent(userId)}`);
  }

  postEvents(events: EventPayload[]): Promise<{ accepted: number }> {
    return this.request<{ accepted: number }>("/events", {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify(events),
    });
  }
}

export interface EventQueueOptions {
  flushIntervalMs?: number;
  maxBatch?: number;
  clock?: () => Date;
}

/** Fire-and-forget event buffer.
 *
 * emit() never blocks the UI: events accumulate and are posted in batches on
 * a timer (or as soon as the buffer reaches maxBatch). A failed post puts the
 * batch back at the front of the buffer, so it is retried on the next flush.
 */
export class EventQueue implements EventSink {
  private pending: EventPayload[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  readonly flushIntervalMs: number;
  readonly maxBatch: number;
  private readonly clock: () => Date;

  constructor(
    private readonly client: ApiClient,
    readonly userId: string,
    options: EventQueueOptions = {},
  ) {
    this.flushIntervalMs = options.flushIntervalMs ?? 2000;
    this.maxBatch = options.maxBatch ?? 25;
    this.clock = options.clock ?? (() => new Date());
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  emit(kind: EventKind, target?: string): void {
    const payload: EventPayload = {
      user_id: this.userId,
      kind,
      client_ts: this.clock().toISOString(),
    };
    if (target !== undefined) payload.target = target;
    this.pending.push(payload);
    if (this.pending.length >= this.maxBatch) {
      void this.flush();
    }
  }

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => {
      void this.flush();
    }, this.flushIntervalMs);
  }

  /** Stop the timer and drain whatever is still buffered. */
  async stop(): Promise<void> {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    await this.flush();
  }

  /** Post everything buffered; returns true when a batch was delivered. */
  async flush(): Promise<boolean> {
    if (this.inFlight || this.pending.length === 0) return false;
    const batch = this.pending.splice(0, this.pending.length);
    this.inFlight = true;
    try {
      await this.client.postEvents(batch);
      return true;
    } catch {
      this.pending = batch.concat(this.pending);
      return false;
    } finally {
      this.inFlight = false;
    }
  }
}
