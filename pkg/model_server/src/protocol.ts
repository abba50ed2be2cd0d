/**
 * Wire protocol (v1): newline-delimited JSON, strict schema on both sides.
 * See PROTOCOL.md at the repository root for byte-level examples.
 */

export const PROTOCOL_VERSION = 1;
export const CHUNK_SAMPLES = 480000;
export const SAMPLE_RATE = 16000;
const AUDIO_BYTES = CHUNK_SAMPLES * 4;

export type Op = "transcribe" | "classify" | "summarize";
export const OPS: Op[] = ["transcribe", "classify", "summarize"];

export interface TranscribePayload {
  audio: string;
  sample_rate: number;
  chunk_index: number;
}

export interface TextPayload {
  text: string;
}

export interface BackendRequest {
  v: number;
  op: Op;
  id: number;
  payload: TranscribePayload | TextPayload;
}

export type ClassifyResult = { label: 0 | 1; prob: number };
export type OkResult = string | ClassifyResult;

export interface BackendResponse {
  id: number;
  ok: boolean;
  result?: OkResult;
  error?: string;
}

export type ParseOutcome =
  | { ok: true; request: BackendRequest }
  | { ok: false; id: number; error: string };

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

const BASE64_RE = /^[A-Za-z0-9+/]*={0,2}$/;

/**
 * Parse and validate one request line. Never throws: malformed input comes
 * back as an error outcome carrying the request id when it was recoverable
 * (else -1), so the server can answer and keep the connection open.
 */
export function parseRequestLine(line: string): ParseOutcome {
  let doc: unknown;
  try {
    doc = JSON.parse(line);
  } catch {
    return { ok: false, id: -1, error: "protocol error: line is not valid JSON" };
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    return { ok: false, id: -1, error: "protocol error: message must be a JSON object" };
  }
  const obj = doc as Record<string, unknown>;
  const id = isInt(obj.id) && (obj.id as number) >= 0 ? (obj.id as number) : -1;

  const fail = (error: string): ParseOutcome => ({ ok: false, id, error: `protocol error: ${error}` });

  const keys = Object.keys(obj).sort();
  const expected = ["id", "op", "payload", "v"];
  const extra = keys.filter((k) => !expected.includes(k));
  if (extra.length) return fail(`unexpected request keys [${extra.join(", ")}]`);
  const missing = expected.filter((k) => !(k in obj));
  if (missing.length) return fail(`request missing keys [${missing.join(", ")}]`);

  if (obj.v !== PROTOCOL_VERSION) return fail(`unsupported protocol version ${JSON.stringify(obj.v)}`);
  if (typeof obj.op !== "string" || !OPS.includes(obj.op as Op)) {
    return fail(`unknown op ${JSON.stringify(obj.op)}`);
  }
  if (!isInt(obj.id) || (obj.id as number) < 0) {
    return fail("request id must be a non-negative integer");
  }
  const payload = obj.payload;
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    return fail("request payload must be an object");
  }
  const p = payload as Record<string, unknown>;
  const op = obj.op as Op;

  if (op === "transcribe") {
    const pkeys = Object.keys(p).sort();
    if (pkeys.join(",") !== "audio,chunk_index,sample_rate") {
      return fail(`transcribe payload must have exactly audio/sample_rate/chunk_index, got [${pkeys.join(", ")}]`);
    }
    if (typeof p.audio !== "string" || !BASE64_RE.test(p.audio)) {
      return fail("transcribe payload 'audio' must be a base64 string");
    }
    const decoded = Buffer.from(p.audio, "base64");
    if (decoded.length !== AUDIO_BYTES) {
      return fail(`transcribe audio must decode to ${AUDIO_BYTES} bytes, got ${decoded.length}`);
    }
    if (p.sample_rate !== SAMPLE_RATE) return fail(`transcribe sample_rate must be ${SAMPLE_RATE}`);
    if (!isInt(p.chunk_index) || (p.chunk_index as number) < 0) {
      return fail("transcribe chunk_index must be a non-negative integer");
    }
  } else {
    const pkeys = Object.keys(p);
    if (pkeys.length !== 1 || pkeys[0] !== "text") {
      return fail(`${op} payload must have exactly 'text', got [${pkeys.sort().join(", ")}]`);
    }
    if (typeof p.text !== "string") return fail(`${op} payload 'text' must be a string`);
  }

  return { ok: true, request: obj as unknown as BackendRequest };
}

/** One response per line; ok responses carry result, failures carry error. */
export function encodeResponse(resp: BackendResponse): string {
  const doc: Record<string, unknown> = { id: resp.id, ok: resp.ok };
  if (resp.ok) {
    doc.result = resp.result;
  } else {
    doc.error = resp.error ?? "unknown error";
  }
  return JSON.stringify(doc) + "\n";
}

export function decodeAudio(payload: TranscribePayload): Float32Array {
  const raw = Buffer.from(payload.audio, "base64");
  return new Float32Array(raw.buffer, raw.byteOffset, raw.length / 4);
}
