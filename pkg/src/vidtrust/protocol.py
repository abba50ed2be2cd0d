"""Wire protocol between the pipeline and external model backends.

Newline-delimited JSON over a byte stream (TCP or a child process's
stdio).  Every request carries ``v: 1``, an op, a connection-unique id,
and an op-specific payload; responses echo the id and carry exactly one
of ``result`` / ``error``.  See PROTOCOL.md for byte-level examples.

Also home to the deterministic in-process stub backends that let the full
pipeline run with no models at all.
"""

from __future__ import annotations

import base64
import json
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass
from itertools import count
from typing import BinaryIO, Callable

import numpy as np

from .audio import CHUNK_SAMPLES, TARGET_RATE, AudioChunk
from .errors import (
    BackendOpError,
    BackendUnavailableError,
    ConfigError,
    ProtocolError,
)
from .similarity import DEFAULT_LEAD_SENTENCES, native_summary

PROTOCOL_VERSION = 1
OPS = ("transcribe", "classify", "summarize")
DEFAULT_MAX_IN_FLIGHT = 4
_AUDIO_BYTES = CHUNK_SAMPLES * 4  # 32-bit float samples


@dataclass(frozen=True)
class BackendRequest:
    op: str
    id: int
    payload: dict
    v: int = PROTOCOL_VERSION


@dataclass(frozen=True)
class BackendResponse:
    id: int
    ok: bool
    result: object = None
    error: str | None = None


def _validate_request(req: BackendRequest) -> None:
    if req.v != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {req.v!r}")
    if req.op not in OPS:
        raise ProtocolError(f"unknown op {req.op!r}")
    if not isinstance(req.id, int) or isinstance(req.id, bool) or req.id < 0:
        raise ProtocolError(f"request id must be a non-negative integer, got {req.id!r}")
    if not isinstance(req.payload, dict):
        raise ProtocolError("request payload must be an object")
    payload = req.payload
    if req.op == "transcribe":
        if set(payload) != {"audio", "sample_rate", "chunk_index"}:
            raise ProtocolError(
                f"transcribe payload must have exactly audio/sample_rate/chunk_index, got {sorted(payload)}"
            )
        audio = payload["audio"]
        if not isinstance(audio, str):
            raise ProtocolError("transcribe payload 'audio' must be a base64 string")
        try:
            raw = base64.b64decode(audio, validate=True)
        except Exception:
            raise ProtocolError("transcribe payload 'audio' is not valid base64")
        if len(raw) != _AUDIO_BYTES:
            raise ProtocolError(
                f"transcribe audio must decode to {_AUDIO_BYTES} bytes "
                f"({CHUNK_SAMPLES} float32 samples), got {len(raw)}"
            )
        if payload["sample_rate"] != TARGET_RATE:
            raise ProtocolError(f"transcribe sample_rate must be {TARGET_RATE}")
        idx = payload["chunk_index"]
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise ProtocolError("transcribe chunk_index must be a non-negative integer")
    else:
        if set(payload) != {"text"}:
            raise ProtocolError(f"{req.op} payload must have exactly 'text', got {sorted(payload)}")
        if not isinstance(payload["text"], str):
            raise ProtocolError(f"{req.op} payload 'text' must be a string")


def make_transcribe_request(req_id: int, chunk: AudioChunk) -> BackendRequest:
    audio = base64.b64encode(
        np.ascontiguousarray(chunk.samples, dtype="<f4").tobytes()
    ).decode("ascii")
    return BackendRequest(
        op="transcribe",
        id=req_id,
        payload={"audio": audio, "sample_rate": TARGET_RATE, "chunk_index": chunk.index},
    )


def make_text_request(op: str, req_id: int, text: str) -> BackendRequest:
    return BackendRequest(op=op, id=req_id, payload={"text": text})


def encode_request(req: BackendRequest) -> bytes:
    """One JSON line, UTF-8, schema-checked before it ever hits the wire."""
    _validate_request(req)
    doc = {"v": req.v, "op": req.op, "id": req.id, "payload": req.payload}
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode(
        "utf-8"
    ) + b"\n"


def _parse_line(line: bytes | str) -> dict:
    if isinstance(line, bytes):
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError:
            raise ProtocolError("line is not valid UTF-8", raw=line)
    else:
        text = line
    text = text.strip("\r\n")
    if "\n" in text:
        raise ProtocolError("message spans multiple lines", raw=line)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"line is not valid JSON: {exc}", raw=line)
    if not isinstance(doc, dict):
        raise ProtocolError("message must be a JSON object", raw=line)
    return doc


def decode_request(line: bytes | str) -> BackendRequest:
    doc = _parse_line(line)
    extra = set(doc) - {"v", "op", "id", "payload"}
    if extra:
        raise ProtocolError(f"unexpected request keys {sorted(extra)}", raw=line)
    missing = {"v", "op", "id", "payload"} - set(doc)
    if missing:
        raise ProtocolError(f"request missing keys {sorted(missing)}", raw=line)
    req = BackendRequest(op=doc["op"], id=doc["id"], payload=doc["payload"], v=doc["v"])
    _validate_request(req)
    return req


def decode_response(line: bytes | str) -> BackendResponse:
    doc = _parse_line(line)
    extra = set(doc) - {"id", "ok", "result", "error"}
    if extra:
        raise ProtocolError(f"unexpected response keys {sorted(extra)}", raw=line)
    if "id" not in doc:
        raise ProtocolError("response missing 'id'", raw=line)
    if not isinstance(doc["id"], int) or isinstance(doc["id"], bool):
        raise ProtocolError(f"response id must be an integer, got {doc['id']!r}", raw=line)
    if "ok" not in doc or not isinstance(doc["ok"], bool):
        raise ProtocolError("response 'ok' must be a boolean", raw=line)
    has_result = "result" in doc
    has_error = "error" in doc
    if doc["ok"]:
        if not has_result or has_error:
            raise ProtocolError("ok response must carry 'result' and no 'error'", raw=line)
        return BackendResponse(id=doc["id"], ok=True, result=doc["result"])
    if not has_error or has_result:
        raise ProtocolError("error response must carry 'error' and no 'result'", raw=line)
    if not isinstance(doc["error"], str):
        raise ProtocolError("response 'error' must be a string", raw=line)
    return BackendResponse(id=doc["id"], ok=False, error=doc["error"])


def encode_response(resp: BackendResponse) -> bytes:
    doc: dict = {"id": resp.id, "ok": resp.ok}
    if resp.ok:
        doc["result"] = resp.result
    else:
        doc["error"] = resp.error if resp.error is not None else "unknown error"
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode(
        "utf-8"
    ) + b"\n"


def validate_result(op: str, result: object) -> object:
    """Op-specific result validation applied when a response is matched."""
    if op in ("transcribe", "summarize"):
        if not isinstance(result, str):
            raise ProtocolError(f"{op} result must be a string, got {type(result).__name__}")
        return result
    if not isinstance(result, dict) or set(result) != {"label", "prob"}:
        raise ProtocolError(f"classify result must be an object with label/prob, got {result!r}")
    label, prob = result["label"], result["prob"]
    if label not in (0, 1) or isinstance(label, bool):
        raise ProtocolError(f"classify label must be 0 or 1, got {label!r}")
    if isinstance(prob, bool) or not isinstance(prob, (int, float)) or not 0.0 <= prob <= 1.0:
        raise ProtocolError(f"classify prob must be in [0, 1], got {prob!r}")
    return result


# --------------------------------------------------------------------------
# In-process stubs: deterministic backends for tests and model-free runs
# --------------------------------------------------------------------------


class EchoTranscriber:
    """Returns "chunk-<index>" for every chunk."""

    def transcribe_chunk(self, chunk: AudioChunk) -> str:
        return f"chunk-{chunk.index}"


@dataclass(frozen=True)
class FixedClassifier:
    label: int
    prob: float

    def classify(self, text: str) -> tuple[int, float]:
        return self.label, self.prob


@dataclass(frozen=True)
class LeadSummarizer:
    max_sentences: int = DEFAULT_LEAD_SENTENCES

    def summarize(self, text: str) -> str:
        return native_summary(text, self.max_sentences)


def stub_backend(kind: str, **params):
    """Factory for the deterministic stub backends."""
    if kind == "echo_transcriber":
        return EchoTranscriber()
    if kind == "fixed_classifier":
        return FixedClassifier(label=int(params.get("label", 0)), prob=float(params.get("prob", 0.0)))
    if kind == "lead_summarizer":
        return LeadSummarizer(max_sentences=int(params.get("max_sentences", DEFAULT_LEAD_SENTENCES)))
    raise ConfigError(f"unknown stub backend kind {kind!r}")


# --------------------------------------------------------------------------
# Remote client
# --------------------------------------------------------------------------


class _Pending:
    __slots__ = ("event", "response", "failure")

    def __init__(self) -> None:
        self.event = threading.Event()
        self.response: BackendResponse | None = None
        self.failure: Exception | None = None


class RemoteBackend:
    """ndjson client over TCP or a child process's stdio.

    Serves as transcriber, classifier, and summarizer at once.  Up to
    ``max_in_flight`` requests may be outstanding; responses are matched
    strictly by id, never by arrival order.
    """

    def __init__(
        self,
        reader: BinaryIO,
        writer: BinaryIO,
        close_fn: Callable[[], None],
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        timeout: float = 60.0,
    ):
        self._reader = reader
        self._writer = writer
        self._close_fn = close_fn
        self._timeout = timeout
        self._ids = count(0)
        self._write_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._pending: dict[int, _Pending] = {}
        self._in_flight = threading.BoundedSemaphore(max(1, max_in_flight))
        self._broken: Exception | None = None
        self._reader_thread = threading.Thread(target=self._read_loop, daemon=True)
        self._reader_thread.start()

    @classmethod
    def from_address(cls, address: str, **kwargs) -> "RemoteBackend":
        """Connect per the CLI address grammar: ``HOST:PORT`` or ``stdio:CMD``."""
        if address.startswith("stdio:"):
            cmd = address[len("stdio:") :].strip()
            if not cmd:
                raise ConfigError("stdio backend address needs a command: stdio:CMD")
            try:
                proc = subprocess.Popen(
                    shlex.split(cmd),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                )
            except OSError as exc:
                raise BackendUnavailableError(f"cannot start backend process {cmd!r}: {exc}")

            def close() -> None:
                proc.terminate()
                try:
                    proc.wait(timeout=3)
                except subprocess.TimeoutExpired:
                    proc.kill()

            return cls(proc.stdout, proc.stdin, close, **kwargs)

        host, sep, port_str = address.rpartition(":")
        if not sep or not host or not port_str.isdigit():
            raise ConfigError(f"backend address must be HOST:PORT or stdio:CMD, got {address!r}")
        try:
            sock = socket.create_connection((host, int(port_str)), timeout=10)
        except OSError as exc:
            raise BackendUnavailableError(f"cannot connect to backend at {address}: {exc}")
        sock.settimeout(None)
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")

        def close() -> None:
            # shutdown unblocks the reader thread immediately
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                sock.close()
            except OSError:
                pass

        return cls(reader, writer, close, **kwargs)

    def _read_loop(self) -> None:
        try:
            for line in self._reader:
                if not line.strip():
                    continue
                resp = decode_response(line)
                with self._state_lock:
                    waiter = self._pending.pop(resp.id, None)
                if waiter is None:
                    raise ProtocolError(f"response id {resp.id} matches no pending request")
                waiter.response = resp
                waiter.event.set()
            self._fail_all(BackendUnavailableError("backend closed the connection"))
        except Exception as exc:
            self._fail_all(exc)

    def _fail_all(self, exc: Exception) -> None:
        with self._state_lock:
            self._broken = self._broken or exc
            pending, self._pending = self._pending, {}
        for waiter in pending.values():
            waiter.failure = exc
            waiter.event.set()

    def _call(self, req: BackendRequest) -> object:
        line = encode_request(req)
        waiter = _Pending()
        with self._in_flight:
            with self._state_lock:
                if self._broken is not None:
                    raise self._broken
                self._pending[req.id] = waiter
            try:
                with self._write_lock:
                    self._writer.write(line)
                    self._writer.flush()
            except (OSError, ValueError) as exc:
                self._fail_all(BackendUnavailableError(f"backend write failed: {exc}"))
            if not waiter.event.wait(self._timeout):
                with self._state_lock:
                    self._pending.pop(req.id, None)
                raise BackendUnavailableError(f"backend timed out after {self._timeout}s")
        if waiter.failure is not None:
            raise waiter.failure
        resp = waiter.response
        assert resp is not None
        if not resp.ok:
            raise BackendOpError(resp.error or "backend reported an error")
        return validate_result(req.op, resp.result)

    def _next_id(self) -> int:
        return next(self._ids)

    def transcribe_chunk(self, chunk: AudioChunk) -> str:
        return self._call(make_transcribe_request(self._next_id(), chunk))  # type: ignore[return-value]

    def classify(self, text: str) -> tuple[int, float]:
        result = self._call(make_text_request("classify", self._next_id(), text))
        return int(result["label"]), float(result["prob"])  # type: ignore[index]

    def summarize(self, text: str) -> str:
        return self._call(make_text_request("summarize", self._next_id(), text))  # type: ignore[return-value]

    def close(self) -> None:
        self._fail_all(BackendUnavailableError("backend connection closed locally"))
        self._close_fn()
        self._reader_thread.join(timeout=5)
        try:
            self._writer.close()
        except Exception:
            pass
        try:
            self._reader.close()
        except Exception:
            pass

    def __enter__(self) -> "RemoteBackend":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
