// Thin session client over the protocol-1 websocket. Holds the latest
// snapshot plus transient UI state; all engine logic stays server-side.

import { freshTransient, type Transient } from './render.js'
import { gestureToMessage, type Gesture } from './gestures.js'
import type { ClientMessage, ServerMessage, Snapshot, TagView } from './types.js'

// Minimal socket surface so tests can substitute a fake.
export interface SocketLike {
  send(data: string): void
  close(): void
  onmessage?: ((ev: { data: unknown }) => void) | null
  onclose?: (() => void) | null
}

export interface ClientHandlers {
  onSnapshot?: (s: Snapshot) => void
  onSuggestion?: (tag: TagView) => void
  onError?: (message: string) => void
}

export class SessionClient {
  snapshot: Snapshot | null = null
  transient: Transient = freshTransient()
  readonly sent: ClientMessage[] = []

  constructor(
    private socket: SocketLike,
    private handlers: ClientHandlers = {},
    private clock: () => number = () => Date.now() / 1000,
  ) {
    socket.onmessage = (ev) => this.receive(String(ev.data))
    socket.onclose = () => {
      // degraded mode: keep rendering the last snapshot, marked stale
      this.transient.stale = true
    }
  }

  hello(clientId: string): void {
    this.send({ type: 'hello', client_id: clientId, t: this.clock() })
  }

  gesture(g: Gesture): void {
    const msg = gestureToMessage(g, this.clock())
    if (msg.type === 'request_summary') this.transient.summaryPending = true
    if (msg.type === 'hover_expand' && 'tag_id' in msg)
      this.transient.hoveredTagId = msg.tag_id
    this.send(msg)
  }

  pushSegment(seg: { start: number; end: number; speaker: string; text: string; final: boolean }): void {
    this.send({ type: 'segment', t: seg.end, ...seg })
  }

  send(msg: ClientMessage): void {
    this.sent.push(msg)
    this.socket.send(JSON.stringify(msg))
  }

  receive(raw: string): void {
    let msg: ServerMessage
    try {
      msg = JSON.parse(raw)
    } catch {
      this.handlers.onError?.('unparseable frame')
      return
    }
    switch (msg.type) {
      case 'snapshot':
        this.snapshot = msg.state
        this.transient.stale = false
        if (this.snapshot.tags.some((t) => t.kind === 'summary'))
          this.transient.summaryPending = false
        this.handlers.onSnapshot?.(msg.state)
        break
      case 'suggestion':
        this.handlers.onSuggestion?.(msg.event.payload.tag)
        break
      case 'error':
        this.transient.summaryPending = false
        this.handlers.onError?.(msg.message)
        break
    }
  }

  close(): void {
    this.socket.close()
  }
}
