// Streaming session: ack-gated frame pacing, reconnect, rolling stats.
//
// The client never holds more than one un-acknowledged frame: offerFrame
// drops frames while a mask (or error reply) is outstanding, mirroring
// the service's one-slot latest-wins mailbox. On reconnect the sequence
// restarts at 1 under a fresh stream id.

import { decodeMaskPacket, encodeFramePacket, MaskPacket } from "./protocol.js";
import { Action, initialState, reduce, SessionState } from "./state.js";

export interface WsLike {
  binaryType: string;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: Uint8Array): void;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export interface SessionOptions {
  url: string;
  wsFactory?: WsFactory;
  now?: () => number;
  reconnectDelayMs?: number;
  onMask?: (packet: MaskPacket) => void;
  onState?: (state: SessionState) => void;
}

const FPS_WINDOW_MS = 2000;

export class StreamSession {
  state: SessionState = initialState;

  private ws: WsLike | null = null;
  private stopped = false;
  private inFlight = false;
  private sequence = 0;
  private maskTimes: number[] = [];
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(private options: SessionOptions) {}

  private get now(): number {
    return (this.options.now ?? Date.now)();
  }

  private dispatch(action: Action): void {
    this.state = reduce(this.state, action);
    this.options.onState?.(this.state);
  }

  connect(): void {
    this.stopped = false;
    this.openSocket();
  }

  close(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.ws?.close();
    this.ws = null;
    this.dispatch({ type: "stream-status", status: "disconnected" });
  }

  /** Offer one encoded frame; returns true when actually sent. */
  offerFrame(image: Uint8Array): boolean {
    if (this.inFlight || this.ws === null || this.state.streamStatus !== "connected") {
      return false;
    }
    this.sequence += 1;
    this.inFlight = true;
    this.ws.send(encodeFramePacket(this.sequence, this.now, image));
    this.dispatch({ type: "frame-sent" });
    return true;
  }

  private openSocket(): void {
    const factory: WsFactory =
      this.options.wsFactory ??
      ((url) => new WebSocket(url) as unknown as WsLike);
    this.dispatch({ type: "stream-status", status: "connecting" });
    let ws: WsLike;
    try {
      ws = factory(this.options.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.sequence = 0;
      this.inFlight = false;
      this.maskTimes = [];
      this.dispatch({
        type: "stream-status",
        status: "connected",
        streamId: this.state.streamId + 1,
      });
    };
    ws.onmessage = (ev) => this.handleMessage(ev.data);
    ws.onerror = () => {
      // close follows; nothing to do here
    };
    ws.onclose = () => {
      if (this.ws !== ws) return;
      this.ws = null;
      this.inFlight = false;
      this.dispatch({ type: "stream-status", status: "disconnected" });
      this.scheduleReconnect();
    };
    this.ws = ws;
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    const delay = this.options.reconnectDelayMs ?? 250;
    this.reconnectTimer = setTimeout(() => this.openSocket(), delay);
  }

  private handleMessage(data: unknown): void {
    this.inFlight = false;
    if (typeof data === "string") {
      try {
        const body = JSON.parse(data);
        this.dispatch({
          type: "protocol-error",
          error: String(body.error ?? data),
        });
      } catch {
        this.dispatch({ type: "protocol-error", error: data });
      }
      return;
    }
    let packet: MaskPacket;
    try {
      packet = decodeMaskPacket(data as ArrayBuffer);
    } catch (err) {
      // reject the packet; the operator keeps seeing the untinted frame
      this.dispatch({ type: "protocol-error", error: String(err) });
      return;
    }
    const t = this.now;
    this.maskTimes.push(t);
    while (this.maskTimes.length && this.maskTimes[0] < t - FPS_WINDOW_MS) {
      this.maskTimes.shift();
    }
    const fps = (this.maskTimes.length * 1000) / FPS_WINDOW_MS;
    this.dispatch({ type: "mask-received", inferenceMs: packet.inferenceMs, fps });
    this.options.onMask?.(packet);
  }
}
