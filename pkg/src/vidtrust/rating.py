"""Final trustworthiness rating: a convex blend of the hate-speech
probability complement and the title/content similarity on a 0-100 scale.

Engagement metrics (views, likes) deliberately never enter the score;
they are the prevailing rating basis this system replaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractError

DEFAULT_WEIGHTS = (0.5, 0.5)
TRUSTWORTHY_MIN = 70
CAUTION_MIN = 40

VERDICT_TRUSTWORTHY = "trustworthy"
VERDICT_CAUTION = "caution"
VERDICT_MISLEADING = "misleading_or_hateful"


@dataclass(frozen=True)
class Rating:
    hate_prob: float
    similarity: float
    overall: int
    verdict: str
    components: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "hate_prob": self.hate_prob,
            "similarity": self.similarity,
            "overall": self.overall,
            "verdict": self.verdict,
            "components": self.components,
        }


def compute_rating(
    hate_prob: float,
    similarity: float,
    weights: tuple[float, float] = DEFAULT_WEIGHTS,
    flags: Sequence[str] = (),
    trustworthy_min: int = TRUSTWORTHY_MIN,
    caution_min: int = CAUTION_MIN,
) -> Rating:
    """overall = round(100 * (w_h * (1 - hate_prob) + w_s * similarity)).

    Weights must be non-negative and sum to 1; rounding is half-up so the
    integer score is platform-independent.  Verdict bands: >= 70
    trustworthy, 40-69 caution, < 40 misleading_or_hateful (both cut
    points configurable).
    """
    if not 0.0 <= hate_prob <= 1.0:
        raise ContractError(f"hate_prob must be in [0, 1], got {hate_prob}")
    if not 0.0 <= similarity <= 1.0:
        raise ContractError(f"similarity must be in [0, 1], got {similarity}")
    w_h, w_s = weights
    if w_h < 0 or w_s < 0 or abs(w_h + w_s - 1.0) > 1e-9:
        raise ContractError(f"weights must be non-negative and sum to 1, got {weights}")
    if not 0 <= caution_min <= trustworthy_min <= 100:
        raise ContractError("verdict thresholds must satisfy 0 <= caution <= trustworthy <= 100")

    blended = w_h * (1.0 - hate_prob) + w_s * similarity
    overall = int(blended * 100.0 + 0.5)
    if overall >= trustworthy_min:
        verdict = VERDICT_TRUSTWORTHY
    elif overall >= caution_min:
        verdict = VERDICT_CAUTION
    else:
        verdict = VERDICT_MISLEADING
    return Rating(
        hate_prob=hate_prob,
        similarity=similarity,
        overall=overall,
        verdict=verdict,
        components={
            "weight_hate": w_h,
            "weight_similarity": w_s,
            "trustworthy_min": trustworthy_min,
            "caution_min": caution_min,
            "flags": sorted(flags),
        },
    )
