/** Session connection with reconnect backoff, plus the simulated-tracker
 * pose sender. WebSocket/fetch are injectable so node tests can drive it. */

import { ConfigMsg, EntityId, FrameMsg, PoseMessageDoc, parseServerMsg } from "./protocol.js";

export interface ConnectionHandlers {
  onConfig(msg: ConfigMsg): void;
  onFrame(msg: FrameMsg): void;
  onError(reason: string): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
}

export interface ConnectionOptions {
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  makeSocket?: (url: string) => WebSocket;
}

export interface Connection {
  close(): void;
}

export function wsUrl(serviceBase: string): string {
  return serviceBase.replace(/^http/, "ws").replace(/\/$/, "") + "/ws";
}

export function connect(
  serviceBase: string,
  handlers: ConnectionHandlers,
  opts: ConnectionOptions = {},
): Connection {
  const make = opts.makeSocket ?? ((url: string) => new WebSocket(url));
  let backoff = opts.initialBackoffMs ?? 500;
  const maxBackoff = opts.maxBackoffMs ?? 4000;
  let closed = false;
  let socket: WebSocket | null = null;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const open = () => {
    if (closed) return;
    handlers.onStatus("connecting");
    socket = make(wsUrl(serviceBase));
    socket.onopen = () => {
      backoff = opts.initialBackoffMs ?? 500;
      handlers.onStatus("open");
    };
    socket.onmessage = (event) => {
      const msg = parseServerMsg(String(event.data));
      if (!msg) return;
      if (msg.type === "config") handlers.onConfig(msg);
      else if (msg.type === "frame") handlers.onFrame(msg);
      else if (msg.type === "error") handlers.onError(msg.reason);
    };
    socket.onclose = () => {
      handlers.onStatus("closed");
      if (!closed) {
        timer = setTimeout(open, backoff);
        backoff = Math.min(backoff * 2, maxBackoff);
      }
    };
    socket.onerror = () => {
      // onclose follows and handles the retry
    };
  };

  open();
  return {
    close() {
      closed = true;
      if (timer) clearTimeout(timer);
      socket?.close();
    },
  };
}

type FetchLike = (url: string, init: {
  method: string;
  headers: Record<string, string>;
  body: string;
}) => Promise<{ ok: boolean; status: number }>;

/**
 * Latest-wins pose emission: dragging overwrites the pending pose per
 * entity and a fixed-rate flusher posts batches to /simulated-pose, at or
 * above the 30 Hz the live window needs to feel attached to the cursor.
 */
export class PoseSender {
  private pending = new Map<EntityId, [number, number, number]>();
  private seq = new Map<EntityId, number>();
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  sent = 0;
  failed = 0;

  constructor(
    private serviceBase: string,
    private rateHz = 45,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private now: () => number = () => performance.now(),
  ) {}

  start(): void {
    if (this.timer) return;
    this.timer = setInterval(() => void this.flush(), 1000 / this.rateHz);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  /** Queue the newest pose for an entity (older queued poses are superseded). */
  push(entity: EntityId, pos: [number, number, number]): void {
    this.pending.set(entity, pos);
  }

  async flush(): Promise<void> {
    if (this.inFlight || this.pending.size === 0) return;
    const batch: PoseMessageDoc[] = [];
    const t_us = Math.round(this.now() * 1000);
    for (const [entity, pos] of this.pending) {
      const seq = (this.seq.get(entity) ?? 0) + 1;
      this.seq.set(entity, seq);
      batch.push({
        entity,
        sender: 7,
        seq,
        t_us,
        pos,
        quat: [1, 0, 0, 0],
      });
    }
    this.pending.clear();
    this.inFlight = true;
    try {
      const res = await this.fetchImpl(`${this.serviceBase}/simulated-pose`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(batch),
      });
      if (res.ok) this.sent += batch.length;
      else this.failed += batch.length;
    } catch {
      this.failed += batch.length;
    } finally {
      this.inFlight = false;
    }
  }
}
