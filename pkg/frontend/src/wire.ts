// Session link: WebSocket connection, hello handshake, outbound message
// hygiene (monotone timestamps, clamped deflections). The console is a pure
// input/visualization client; it never mutates trial state directly.

import type { OutboundMessage, Snapshot } from './types';
import { WIRE_VERSION } from './types';

// minimal constructor surface so tests can inject the `ws` package in Node
export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WebSocketCtor = new (url: string) => WebSocketLike;

export interface SessionInfo {
  session: string;
  configHash: string;
}

export class SessionLink {
  private socket: WebSocketLike | null = null;
  private lastSent = -Infinity;
  info: SessionInfo | null = null;
  connected = false;
  onSnapshot: ((snap: Snapshot) => void) | null = null;
  onEvent: ((ev: Record<string, unknown>) => void) | null = null;
  onClose: (() => void) | null = null;

  constructor(private readonly ctor: WebSocketCtor) {}

  connect(url: string, timeoutMs = 5000): Promise<SessionInfo> {
    return new Promise((resolve, reject) => {
      const sock = new this.ctor(url);
      this.socket = sock;
      const timer = setTimeout(() => {
        sock.close();
        reject(new Error(`handshake timed out after ${timeoutMs} ms`));
      }, timeoutMs);
      sock.onerror = (e) => {
        clearTimeout(timer);
        reject(new Error(`connection failed: ${String(e)}`));
      };
      sock.onmessage = (ev) => {
        const msg = JSON.parse(String(ev.data));
        if (!this.connected) {
          if (msg.type !== 'hello') return;
          if (msg.version !== WIRE_VERSION) {
            clearTimeout(timer);
            sock.close();
            reject(new Error(`wire version ${msg.version} != supported ${WIRE_VERSION}`));
            return;
          }
          this.connected = true;
          this.info = { session: msg.session, configHash: msg.config_hash };
          sock.send(JSON.stringify({ type: 'hello', version: WIRE_VERSION }));
          clearTimeout(timer);
          resolve(this.info);
          return;
        }
        if (msg.type === 'snapshot') this.onSnapshot?.(msg as Snapshot);
        else if (msg.type === 'event') this.onEvent?.(msg);
      };
      sock.onclose = () => {
        this.connected = false;
        this.onClose?.();
      };
    });
  }

  /** Clamp helpers shared by every outbound path. */
  private hygiene(msg: OutboundMessage): OutboundMessage {
    if ('t' in msg && typeof msg.t === 'number') {
      if (msg.t <= this.lastSent) msg.t = this.lastSent + 1e-6;
      this.lastSent = msg.t;
    }
    if (msg.type === 'joystick') {
      msg.deflection = msg.deflection.map((v) => Math.max(-1, Math.min(1, v)));
    }
    return msg;
  }

  send(msg: OutboundMessage): void {
    if (!this.socket || !this.connected) return;
    this.socket.send(JSON.stringify(this.hygiene(msg)));
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
    this.connected = false;
  }
}

export function sessionUrl(params: URLSearchParams): string {
  const host = params.get('host') ?? '127.0.0.1';
  const port = params.get('port') ?? '8701';
  return `ws://${host}:${port}/`;
}
