/**
 * Protocol loop: reads request lines from a stream, answers on another.
 *
 * Up to maxInFlight requests run concurrently per connection; responses go
 * out in completion order (ids carry the correlation, so reordering is
 * fine).  Malformed lines and unavailable ops are answered with ok=false
 * and never close the connection.
 */

import { createInterface } from "node:readline";
import type { Readable, Writable } from "node:stream";

import type { Models } from "./models.js";
import {
  BackendResponse,
  TextPayload,
  TranscribePayload,
  decodeAudio,
  encodeResponse,
  parseRequestLine,
} from "./protocol.js";

export class ModelServer {
  constructor(
    private models: Models,
    private maxInFlight: number = 4,
  ) {
    if (maxInFlight < 1) throw new Error("max_in_flight must be >= 1");
  }

  /** Serve one connection until its input ends. */
  async attach(input: Readable, output: Writable): Promise<void> {
    const reader = createInterface({ input, crlfDelay: Infinity });
    const inFlight = new Set<Promise<void>>();

    const send = (resp: BackendResponse) => {
      output.write(encodeResponse(resp));
    };

    for await (const line of reader) {
      if (!line.trim()) continue;
      const outcome = parseRequestLine(line);
      if (!outcome.ok) {
        send({ id: outcome.id, ok: false, error: outcome.error });
        continue;
      }
      const task = this.answer(outcome.request)
        .then(send)
        .catch((err) => send({ id: outcome.request.id, ok: false, error: String(err) }));
      const tracked = task.finally(() => inFlight.delete(tracked));
      inFlight.add(tracked);
      if (inFlight.size >= this.maxInFlight) {
        await Promise.race(inFlight);
      }
    }
    await Promise.allSettled(inFlight);
  }

  private async answer(req: {
    op: string;
    id: number;
    payload: TranscribePayload | TextPayload;
  }): Promise<BackendResponse> {
    try {
      if (req.op === "transcribe") {
        if (!this.models.transcriber) return this.unavailable(req.id, req.op);
        const payload = req.payload as TranscribePayload;
        const text = await this.models.transcriber.transcribe(
          decodeAudio(payload),
          payload.chunk_index,
        );
        return { id: req.id, ok: true, result: text };
      }
      if (req.op === "classify") {
        if (!this.models.classifier) return this.unavailable(req.id, req.op);
        const result = await this.models.classifier.classify((req.payload as TextPayload).text);
        return { id: req.id, ok: true, result };
      }
      if (!this.models.summarizer) return this.unavailable(req.id, req.op);
      const summary = await this.models.summarizer.summarize((req.payload as TextPayload).text);
      return { id: req.id, ok: true, result: summary };
    } catch (err) {
      return { id: req.id, ok: false, error: `model error: ${String(err)}` };
    }
  }

  private unavailable(id: number, op: string): BackendResponse {
    return { id, ok: false, error: `op unavailable: ${op}` };
  }
}
