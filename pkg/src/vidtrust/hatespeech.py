"""Binary hate-speech classification.

A natively trained character-trigram multinomial Naive Bayes baseline
(deterministic, desk-scale) plus a seam for an external fine-tuned model,
and the evaluation metric suite reported by the pipeline.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from .errors import (
    ContractError,
    DegenerateCorpusError,
    ParseError,
    ProtocolError,
)
from .textnorm import char_ngrams, clean

HATE = 1
NOT_HATE = 0
DEFAULT_SEED = 42
DEFAULT_ALPHA = 1.0
SPLIT_RATIOS = (0.8, 0.1, 0.1)

_MODEL_FORMAT = "nb-char-trigram"
_MODEL_VERSION = 1


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ContractError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[LabeledExample, ...]
    validation: tuple[LabeledExample, ...]
    test: tuple[LabeledExample, ...]
    seed: int
    ratios: tuple[float, float, float] = SPLIT_RATIOS


@dataclass(frozen=True)
class ClassificationReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "tn": self.tn,
            "fp": self.fp,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class Prediction:
    label: int
    prob_hate: float
    prior_only: bool = False


class ClassifierBackend(Protocol):
    def classify(self, text: str) -> tuple[int, float]: ...


class TrigramNBModel:
    """Multinomial NB over character trigrams with Laplace smoothing.

    Stores raw counts (the serialized form) and derives log priors and
    per-trigram log likelihoods; trigrams never seen in training share the
    smoothing mass alpha / (class_total + alpha * V).
    """

    def __init__(
        self,
        alpha: float,
        class_counts: dict[int, int],
        trigram_counts: dict[int, dict[str, int]],
        split_seed: int | None = None,
    ):
        if alpha <= 0:
            raise ContractError("smoothing alpha must be > 0")
        if sorted(class_counts) != [0, 1] or min(class_counts.values()) < 1:
            raise DegenerateCorpusError("training corpus must contain both classes")
        self.alpha = alpha
        self.split_seed = split_seed
        self.class_counts = dict(class_counts)
        self.trigram_counts = {c: dict(trigram_counts.get(c, {})) for c in (0, 1)}

        vocab = set(self.trigram_counts[0]) | set(self.trigram_counts[1])
        self.vocabulary: tuple[str, ...] = tuple(sorted(vocab))
        total_examples = sum(self.class_counts.values())
        self.class_log_prior = {
            c: math.log(self.class_counts[c] / total_examples) for c in (0, 1)
        }
        self.class_totals = {c: sum(self.trigram_counts[c].values()) for c in (0, 1)}
        v = len(self.vocabulary)
        self._denominator = {c: self.class_totals[c] + alpha * v for c in (0, 1)}
        self.trigram_log_likelihood = {
            c: {
                g: math.log((self.trigram_counts[c].get(g, 0) + alpha) / self._denominator[c])
                for g in self.vocabulary
            }
            for c in (0, 1)
        }
        self.unseen_log_likelihood = {
            c: math.log(alpha / self._denominator[c]) for c in (0, 1)
        }

    @property
    def vocabulary_size(self) -> int:
        return len(self.vocabulary)


def load_corpus(path: str | Path) -> tuple[list[LabeledExample], int]:
    """Read a `label<TAB>text` TSV; texts are cleaned on the way in.

    Lines whose text cleans to empty are dropped; the second return value
    counts them.
    """
    examples: list[LabeledExample] = []
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            label_str, sep, text = line.partition("\t")
            if not sep:
                raise ParseError(f"line {lineno}: expected 'label<TAB>text'")
            if label_str not in ("0", "1"):
                raise ParseError(f"line {lineno}: label must be 0 or 1, got {label_str!r}")
            cleaned = clean(text).text
            if not cleaned:
                dropped += 1
                continue
            examples.append(LabeledExample(text=cleaned, label=int(label_str)))
    return examples, dropped


def split(corpus: Sequence[LabeledExample], seed: int = DEFAULT_SEED) -> CorpusSplit:
    """Deterministic 80/10/10 split: floor-sized validation and test,
    remainder to train."""
    n = len(corpus)
    if n < 10:
        raise ContractError(f"corpus too small to split: {n} < 10")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    shuffled = [corpus[i] for i in order]
    n_val = n // 10
    n_test = n // 10
    n_train = n - n_val - n_test
    return CorpusSplit(
        train=tuple(shuffled[:n_train]),
        validation=tuple(shuffled[n_train : n_train + n_val]),
        test=tuple(shuffled[n_train + n_val :]),
        seed=seed,
    )


def train_nb(
    train: Sequence[LabeledExample],
    alpha: float = DEFAULT_ALPHA,
    split_seed: int | None = None,
) -> TrigramNBModel:
    """Count character trigrams per class; pure counting, order-invariant.

    ``split_seed`` is provenance only (which shuffle produced this training
    set); it rides along into the saved model document.
    """
    class_counts = {0: 0, 1: 0}
    trigram_counts: dict[int, dict[str, int]] = {0: {}, 1: {}}
    for example in train:
        class_counts[example.label] += 1
        bucket = trigram_counts[example.label]
        for gram, count in char_ngrams(clean(example.text), 3).items():
            bucket[gram] = bucket.get(gram, 0) + count
    return TrigramNBModel(
        alpha=alpha,
        class_counts=class_counts,
        trigram_counts=trigram_counts,
        split_seed=split_seed,
    )


def predict(model: TrigramNBModel, text: str) -> Prediction:
    """Posterior over {hate, not-hate} for one text.

    Texts with no usable trigrams fall back to the class priors and are
    flagged ``prior_only``.  Score ties go to hate (conservative for a
    safety application).
    """
    grams = char_ngrams(clean(text), 3)
    scores = dict(model.class_log_prior)
    for gram, count in grams.items():
        for c in (0, 1):
            loglik = model.trigram_log_likelihood[c].get(gram, model.unseen_log_likelihood[c])
            scores[c] += count * loglik
    # stable two-class softmax
    prob_hate = 1.0 / (1.0 + math.exp(min(700.0, scores[0] - scores[1])))
    return Prediction(
        label=HATE if prob_hate >= 0.5 else NOT_HATE,
        prob_hate=prob_hate,
        prior_only=not grams,
    )


def classify_external(backend: ClassifierBackend, text: str) -> tuple[int, float]:
    """Delegate to an external classifier, validating its answer."""
    label, prob = backend.classify(text)
    if label not in (0, 1):
        raise ProtocolError(f"classifier backend returned label {label!r}, expected 0/1")
    if not isinstance(prob, (int, float)) or not 0.0 <= float(prob) <= 1.0:
        raise ProtocolError(f"classifier backend returned prob {prob!r} outside [0, 1]")
    return int(label), float(prob)


def report_from_counts(tp: int, tn: int, fp: int, fn: int) -> ClassificationReport:
    """Derive the metric suite from a confusion matrix.

    Metrics with a zero denominator are reported as 0.0 and flagged
    ``undefined_<metric>`` so reports stay serializable and comparable.
    """
    if min(tp, tn, fp, fn) < 0 or tp + tn + fp + fn == 0:
        raise ContractError("confusion counts must be non-negative and not all zero")
    flags: list[str] = []
    accuracy = (tp + tn) / (tp + tn + fp + fn)
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision, flags = 0.0, flags + ["undefined_precision"]
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall, flags = 0.0, flags + ["undefined_recall"]
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, flags = 0.0, flags + ["undefined_f1"]
    return ClassificationReport(
        tp=tp, tn=tn, fp=fp, fn=fn,
        accuracy=accuracy, precision=precision, recall=recall, f1=f1,
        flags=tuple(flags),
    )


def evaluate(predictions: Sequence[int], golds: Sequence[int]) -> ClassificationReport:
    """Confusion counts (hate = positive) and the derived metric suite."""
    if len(predictions) != len(golds):
        raise ContractError(
            f"predictions ({len(predictions)}) and golds ({len(golds)}) differ in length"
        )
    if not predictions:
        raise ContractError("evaluate needs at least one pair")
    tp = sum(1 for p, g in zip(predictions, golds) if p == 1 and g == 1)
    tn = sum(1 for p, g in zip(predictions, golds) if p == 0 and g == 0)
    fp = sum(1 for p, g in zip(predictions, golds) if p == 1 and g == 0)
    fn = sum(1 for p, g in zip(predictions, golds) if p == 0 and g == 1)
    return report_from_counts(tp, tn, fp, fn)


def save_model(model: TrigramNBModel, path: str | Path) -> None:
    """Serialize counts + alpha as canonical JSON (byte-identical across runs)."""
    doc = {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "alpha": model.alpha,
        "seed": model.split_seed,
        "class_counts": {str(c): model.class_counts[c] for c in (0, 1)},
        "trigram_counts": {str(c): model.trigram_counts[c] for c in (0, 1)},
    }
    payload = json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    Path(path).write_bytes(payload.encode("utf-8") + b"\n")


def load_model(path: str | Path) -> TrigramNBModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"model file is not valid JSON: {path}: {exc}")
    if doc.get("format") != _MODEL_FORMAT or doc.get("version") != _MODEL_VERSION:
        raise ParseError(
            f"unsupported model document (format={doc.get('format')!r}, "
            f"version={doc.get('version')!r}): {path}"
        )
    return TrigramNBModel(
        alpha=float(doc["alpha"]),
        class_counts={int(k): int(v) for k, v in doc["class_counts"].items()},
        trigram_counts={
            int(k): {g: int(n) for g, n in counts.items()}
            for k, counts in doc["trigram_counts"].items()
        },
        split_seed=doc.get("seed"),
    )
