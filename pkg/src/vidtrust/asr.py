"""Transcription orchestration and word-error-rate evaluation.

Transcription itself is delegated to a pluggable backend (one request per
30-second chunk); this module owns the assembly of chunk texts into a
transcript and the WER harness used to judge transcription quality.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

from .audio import AudioChunk
from .errors import BackendUnavailableError, ContractError, UndefinedReferenceError


class TranscriberBackend(Protocol):
    def transcribe_chunk(self, chunk: AudioChunk) -> str: ...


@dataclass(frozen=True)
class Transcript:
    """Per-chunk hypothesis texts plus their space-joined concatenation.

    ``segments`` is sorted by chunk index; ``failed_chunks`` lists the
    indices whose backend call failed (their text is empty).
    """

    segments: tuple[tuple[int, str], ...]
    full_text: str
    failed_chunks: tuple[int, ...] = ()

    @classmethod
    def from_segments(
        cls, segments: Sequence[tuple[int, str]], failed: Sequence[int] = ()
    ) -> "Transcript":
        ordered = tuple(sorted(segments, key=lambda s: s[0]))
        indices = [i for i, _ in ordered]
        if len(set(indices)) != len(indices):
            raise ContractError("duplicate chunk indices in transcript segments")
        return cls(
            segments=ordered,
            full_text=" ".join(text for _, text in ordered),
            failed_chunks=tuple(sorted(failed)),
        )


@dataclass(frozen=True)
class WerBreakdown:
    """Substitution/deletion/insertion counts from a minimum-edit alignment."""

    substitutions: int
    deletions: int
    insertions: int
    reference_words: int

    @property
    def wer(self) -> float:
        return (self.substitutions + self.deletions + self.insertions) / self.reference_words

    @property
    def edits(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def as_dict(self) -> dict:
        return {
            "s": self.substitutions,
            "d": self.deletions,
            "i": self.insertions,
            "n": self.reference_words,
            "wer": self.wer,
        }


def transcribe(
    chunks: Sequence[AudioChunk],
    backend: TranscriberBackend,
    max_workers: int = 4,
) -> Transcript:
    """Transcribe every chunk, assembling segments by chunk index.

    Up to ``max_workers`` backend requests run concurrently; completion
    order never affects the result.  A failing chunk degrades to an empty,
    flagged segment so one bad request cannot abort the whole video.
    ``BackendUnavailableError`` is fatal and propagates.
    """
    if not chunks:
        raise ContractError("transcribe needs at least one chunk")

    def one(chunk: AudioChunk) -> tuple[int, str, bool]:
        try:
            return chunk.index, backend.transcribe_chunk(chunk), False
        except BackendUnavailableError:
            raise
        except Exception:
            return chunk.index, "", True

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = list(pool.map(one, chunks))

    failed = [idx for idx, _, bad in results if bad]
    return Transcript.from_segments([(idx, text) for idx, text, _ in results], failed)


def wer(hypothesis: Sequence[str], reference: Sequence[str]) -> WerBreakdown:
    """Word error rate from a unit-cost minimum-edit alignment.

    Ties are resolved by preferring a substitution over an
    insertion+deletion pair, so the S/D/I split is deterministic.
    May exceed 1.0 when the hypothesis inserts more words than the
    reference holds.
    """
    if not reference:
        raise UndefinedReferenceError("WER is undefined for an empty reference")

    n, h = len(reference), len(hypothesis)
    dist = [[0] * (h + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(h + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        ref_word = reference[i - 1]
        for j in range(1, h + 1):
            cost = 0 if ref_word == hypothesis[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)

    # Backtrace, diagonal first: maximizes substitutions over ins+del pairs.
    subs = dels = ins = 0
    i, j = n, h
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if reference[i - 1] == hypothesis[j - 1] else 1
            if dist[i][j] == dist[i - 1][j - 1] + cost:
                subs += cost
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            dels += 1
            i -= 1
            continue
        ins += 1
        j -= 1

    return WerBreakdown(subs, dels, ins, n)


def corpus_wer(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> WerBreakdown:
    """Micro-averaged corpus WER: summed edits over summed reference words.

    This is the convention that makes a single corpus percentage
    well-defined; it is NOT the mean of the per-pair rates.
    """
    for idx, (_, reference) in enumerate(pairs):
        if not reference:
            raise UndefinedReferenceError(f"pair {idx} has an empty reference")
    if not pairs:
        raise ContractError("corpus_wer needs at least one pair")

    s = d = i = n = 0
    for hyp, ref in pairs:
        b = wer(hyp, ref)
        s += b.substitutions
        d += b.deletions
        i += b.insertions
        n += b.reference_words
    return WerBreakdown(s, d, i, n)
