"""Text cleaning and tokenization shared by the WER harness, the
classifier, and the similarity engine.

There is exactly one cleaning implementation in the project; every stage
that touches text goes through :func:`clean` so scores stay comparable.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import ContractError

ZWJ = "‍"

_SINHALA_LO = 0x0D80
_SINHALA_HI = 0x0DFF


def _is_sinhala(ch: str) -> bool:
    return _SINHALA_LO <= ord(ch) <= _SINHALA_HI


@lru_cache(maxsize=4096)
def _map_char(ch: str) -> str:
    """Per-codepoint mapping: '' drops, ' ' becomes whitespace, else kept."""
    cat = unicodedata.category(ch)
    if cat[0] in "PS":
        return ""
    if ch.isspace() or cat in ("Cc", "Cf", "Zl", "Zp", "Zs"):
        return " "
    if cat[0] == "L" and "LATIN" in unicodedata.name(ch, ""):
        lowered = ch.lower()
        # one-to-many lowerings (e.g. U+0130) would lengthen the text; keep those
        if len(lowered) == 1:
            return lowered
    return ch


def _zwj_kept(raw: str, i: int) -> bool:
    # ZWJ survives only inside Sinhala conjuncts: both raw neighbours must be
    # Sinhala-block characters that themselves survive cleaning.
    if i == 0 or i == len(raw) - 1:
        return False
    left, right = raw[i - 1], raw[i + 1]
    return (
        _is_sinhala(left)
        and _is_sinhala(right)
        and _map_char(left) not in ("", " ")
        and _map_char(right) not in ("", " ")
    )


@dataclass(frozen=True)
class NormalizedText:
    """Cleaned text plus its whitespace word tokens.

    Invariant: ``" ".join(tokens) == text``; no double spaces, no
    leading/trailing whitespace.
    """

    text: str
    tokens: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.text.split(" ")) if self.text else ())


def clean(raw: str) -> NormalizedText:
    """Normalize arbitrary UTF-8 text to the pipeline's canonical form.

    Removes Unicode punctuation (P*) and symbols (S*), except the
    zero-width joiner when it sits between two surviving Sinhala
    characters (it is orthographically load-bearing in conjuncts).
    Control and format characters become spaces, whitespace runs
    collapse to one space, Latin letters are lowercased; Sinhala
    letters, combining marks, and digits pass through unchanged.
    """
    parts: list[str] = []
    for i, ch in enumerate(raw):
        if ch == ZWJ:
            parts.append(ZWJ if _zwj_kept(raw, i) else " ")
        else:
            parts.append(_map_char(ch))
    collapsed = " ".join("".join(parts).split())
    return NormalizedText(collapsed)


def word_tokens(t: NormalizedText) -> list[str]:
    """Word tokens of cleaned text; empty text yields an empty list."""
    return list(t.tokens)


def char_ngrams(t: NormalizedText, n: int) -> Counter[str]:
    """Character n-grams (spaces included) with multiplicities.

    Text shorter than ``n`` yields an empty counter.
    """
    if n <= 0:
        raise ContractError(f"n-gram size must be >= 1, got {n}")
    text = t.text
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))
