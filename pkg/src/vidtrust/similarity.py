"""Transcript summarization and title/content similarity.

The summary comes from a pluggable backend or a native lead-sentence
fallback; both texts are then cleaned, vectorized over a shared term
vocabulary, and compared with six distance measures.  The rating consumes
one bounded similarity score derived from a configurable measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

from .errors import ConfigError, ContractError
from .textnorm import NormalizedText

DISTANCE_METHODS = (
    "euclidean",
    "squared_euclidean",
    "manhattan",
    "chessboard",
    "bray_curtis",
    "canberra",
)
DEFAULT_METHOD = "bray_curtis"
DEFAULT_LEAD_SENTENCES = 3

_SENTENCE_ENDS = (".", "।", "\n")  # Latin full stop, danda, newline


class SummarizerBackend(Protocol):
    def summarize(self, text: str) -> str: ...


@dataclass(frozen=True)
class SummaryResult:
    text: str
    engine: str  # "native" | "backend"
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class TermVector:
    """Raw term-frequency weights over a vocabulary shared with its peer."""

    vocabulary: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.vocabulary) != len(self.weights):
            raise ContractError("vocabulary and weights must align")
        if any(w < 0 for w in self.weights):
            raise ContractError("term weights must be non-negative")


@dataclass(frozen=True)
class DistanceReport:
    euclidean: float
    squared_euclidean: float
    manhattan: float
    chessboard: float
    bray_curtis: float
    canberra: float

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in DISTANCE_METHODS}


def native_summary(text: str, max_sentences: int = DEFAULT_LEAD_SENTENCES) -> str:
    """Verbatim prefix of the first ``max_sentences`` sentences.

    A sentence ends at a run of full stops ("." or danda) or at a newline;
    runs with no intervening content do not count as extra sentences.  The
    result is never longer than the input.
    """
    if max_sentences <= 0:
        raise ContractError("max_sentences must be >= 1")
    seen = 0
    has_content = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _SENTENCE_ENDS:
            end = i + 1
            while end < n and text[end] in _SENTENCE_ENDS:
                end += 1
            if has_content:
                seen += 1
                has_content = False
                if seen >= max_sentences:
                    return text[:end].strip()
            i = end
        else:
            if not ch.isspace():
                has_content = True
            i += 1
    return text.strip()


def summarize(
    transcript_text: str,
    backend: SummarizerBackend | None = None,
    max_sentences: int = DEFAULT_LEAD_SENTENCES,
) -> SummaryResult:
    """Summarize the (raw) transcript via the backend, or natively.

    Cleaning happens downstream at vectorization time, so sentence
    punctuation is still visible here.  An empty transcript yields an
    empty, flagged summary without touching the backend.
    """
    if not transcript_text.strip():
        return SummaryResult(text="", engine="native" if backend is None else "backend",
                             flags=("empty_transcript",))
    if backend is None:
        return SummaryResult(text=native_summary(transcript_text, max_sentences), engine="native")
    return SummaryResult(text=backend.summarize(transcript_text), engine="backend")


def vectorize_pair(a: NormalizedText, b: NormalizedText) -> tuple[TermVector, TermVector]:
    """Count vectors over the sorted union of both texts' tokens."""
    vocab = tuple(sorted(set(a.tokens) | set(b.tokens)))
    counts_a = {t: 0 for t in vocab}
    counts_b = {t: 0 for t in vocab}
    for t in a.tokens:
        counts_a[t] += 1
    for t in b.tokens:
        counts_b[t] += 1
    return (
        TermVector(vocab, tuple(counts_a[t] for t in vocab)),
        TermVector(vocab, tuple(counts_b[t] for t in vocab)),
    )


def distances(va: TermVector, vb: TermVector) -> DistanceReport:
    """The six distance measures between two shared-vocabulary vectors.

    Degenerate conventions: Bray-Curtis is 0 when both vectors are all
    zero; Canberra skips coordinates where both entries are 0.
    """
    if va.vocabulary != vb.vocabulary:
        raise ContractError("distance inputs must share one vocabulary")
    x, y = va.weights, vb.weights
    sq = sum((xi - yi) ** 2 for xi, yi in zip(x, y))
    abs_diffs = [abs(xi - yi) for xi, yi in zip(x, y)]
    manhattan = sum(abs_diffs)
    total_mass = sum(xi + yi for xi, yi in zip(x, y))
    return DistanceReport(
        euclidean=math.sqrt(sq),
        squared_euclidean=float(sq),
        manhattan=float(manhattan),
        chessboard=float(max(abs_diffs, default=0)),
        bray_curtis=manhattan / total_mass if total_mass else 0.0,
        canberra=sum(
            d / (abs(xi) + abs(yi))
            for d, xi, yi in zip(abs_diffs, x, y)
            if abs(xi) + abs(yi) > 0
        ),
    )


def similarity_score(
    report: DistanceReport,
    method: str = DEFAULT_METHOD,
    title_tokens: int = 0,
    summary_tokens: int = 0,
) -> float:
    """Map a distance to a similarity in [0, 1].

    Bray-Curtis is already bounded, so the score is 1 - d; the unbounded
    measures use 1 / (1 + d).  Token counts are carried for report context
    and validated, but do not enter the mapping.
    """
    if method not in DISTANCE_METHODS:
        raise ConfigError(f"unknown similarity method {method!r}; pick one of {DISTANCE_METHODS}")
    if title_tokens < 0 or summary_tokens < 0:
        raise ContractError("token counts must be >= 0")
    d = getattr(report, method)
    score = 1.0 - d if method == "bray_curtis" else 1.0 / (1.0 + d)
    return min(1.0, max(0.0, score))
