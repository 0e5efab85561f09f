/** Server-sent-events client over fetch streaming.
 *
 * Works in browsers and Node 20+ (no EventSource dependency), resumes from
 * the last seen sequence after a drop, and reports liveness so the UI can
 * show a stale-stream indicator.
 */

import type { ChainEvent } from "./types.js";

export interface StreamHandlers {
  onEvent(event: ChainEvent): void;
  onStatus?(live: boolean): void;
}

export class EventStream {
  lastSequence = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(private readonly baseUrl: string,
              private readonly handlers: StreamHandlers,
              private readonly fetchImpl: typeof fetch = fetch,
              private readonly retryMs = 1000) {}

  start(fromSequence = 1): void {
    this.lastSequence = fromSequence - 1;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.consumeOnce();
      } catch {
        // drop through to the retry path
      }
      this.handlers.onStatus?.(false);
      if (this.stopped) return;
      await new Promise((resolve) => setTimeout(resolve, this.retryMs));
    }
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const response = await this.fetchImpl(
      `${this.baseUrl}/events?from_sequence=${this.lastSequence + 1}`,
      { signal: this.controller.signal });
    if (!response.ok || !response.body) throw new Error(`stream ${response.status}`);
    this.handlers.onStatus?.(true);

    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let boundary;
      while ((boundary = buffer.indexOf("\n\n")) >= 0) {
        const frame = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const event = parseFrame(frame);
        if (event) {
          this.lastSequence = event.sequence;
          this.handlers.onEvent(event);
        }
      }
    }
  }
}

export function parseFrame(frame: string): ChainEvent | null {
  let id = 0;
  let kind = "";
  let data = "";
  for (const line of frame.split("\n")) {
    if (line.startsWith("id:")) id = Number(line.slice(3).trim());
    else if (line.startsWith("event:")) kind = line.slice(6).trim();
    else if (line.startsWith("data:")) data += line.slice(5).trim();
  }
  if (!kind || !data) return null;  // comment/keepalive frames
  return { sequence: id, kind: kind as ChainEvent["kind"],
           payload: JSON.parse(data) };
}
