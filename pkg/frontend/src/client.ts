/**
 * Connects a Session to a websocket. A reconnect builds a fresh Session,
 * so the step buffer resets; the old session is handed to the change
 * listener for teardown-free rendering.
 */

import { ClientMessage } from "./protocol.js";
import { Session } from "./session.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((event?: unknown) => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event?: unknown) => void) | null;
  onerror: ((event?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class ConsoleClient {
  session: Session;
  private socket: SocketLike | null = null;
  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly changeListeners: Array<(session: Session) => void> = [];

  constructor(url: string, factory?: SocketFactory) {
    this.url = url;
    this.factory = factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.session = this.freshSession();
  }

  onChange(listener: (session: Session) => void): void {
    this.changeListeners.push(listener);
    this.session.onChange(() => listener(this.session));
  }

  private freshSession(): Session {
    const session = new Session((message: ClientMessage) => {
      this.socket?.send(JSON.stringify(message));
    });
    for (const listener of this.changeListeners) {
      session.onChange(() => listener(session));
    }
    return session;
  }

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      /* handshake is server-initiated: hello arrives first */
    };
    socket.onmessage = (event) => {
      this.session.handleRaw(String(event.data));
    };
    socket.onclose = () => {
      this.session.markClosed("connection closed; use retry to reconnect");
    };
    socket.onerror = () => {
      this.session.markError("connection error");
    };
  }

  /** Reconnect with a fresh session (buffer reset). */
  retry(): void {
    try {
      this.socket?.close();
    } catch {
      /* already closed */
    }
    this.session = this.freshSession();
    this.connect();
  }

  close(): void {
    this.socket?.close();
  }
}
