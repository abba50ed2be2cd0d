"""End-to-end orchestration: one entry point per reporting surface.

These functions are the service layer; the FastAPI app and the CLI are
both thin wrappers around them.  Reports are plain JSON-ready dicts that
are byte-stable for fixed inputs and configuration (timings aside).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from . import asr, audio, hatespeech, ingest, protocol, rating, similarity, textnorm
from .errors import ConfigError, VidtrustError

DEFAULT_TITLE_WEIGHT = 2


@dataclass
class RateOptions:
    """Configuration for one rating run."""

    video_id: str
    fixtures_dir: str | Path | None = None
    backend_address: str | None = None
    hate_engine: str = "backend"  # "nb" | "backend"
    nb_model_path: str | Path | None = None
    similarity_method: str = similarity.DEFAULT_METHOD
    weights: tuple[float, float] = rating.DEFAULT_WEIGHTS
    summarizer: str = "auto"  # "auto" | "backend" | "native"
    title_weight: int = DEFAULT_TITLE_WEIGHT
    max_in_flight: int = protocol.DEFAULT_MAX_IN_FLIGHT
    stub_classifier_label: int = 0
    stub_classifier_prob: float = 0.0
    seed: int = hatespeech.DEFAULT_SEED
    mel_dump_path: str | Path | None = None


@dataclass
class BackendSuite:
    transcriber: object
    classifier: object
    summarizer: object | None  # None = native lead-sentence summary
    stubbed: bool
    _closers: list = field(default_factory=list)

    def close(self) -> None:
        for closer in self._closers:
            try:
                closer()
            except Exception:
                pass


class PipelineStageError(VidtrustError):
    """Wraps a stage failure with the stage name and the partial report."""

    def __init__(self, stage: str, cause: Exception, partial_report: dict):
        self.stage = stage
        self.cause = cause
        self.partial_report = partial_report
        super().__init__(f"stage '{stage}' failed: {cause}")


def validate_options(options: RateOptions) -> None:
    """Reject bad configuration before any stage runs (maps to input errors)."""
    if options.hate_engine not in ("nb", "backend"):
        raise ConfigError(f"hate engine must be 'nb' or 'backend', got {options.hate_engine!r}")
    if options.summarizer not in ("auto", "backend", "native"):
        raise ConfigError(f"summarizer must be auto/backend/native, got {options.summarizer!r}")
    if options.similarity_method not in similarity.DISTANCE_METHODS:
        raise ConfigError(
            f"unknown similarity method {options.similarity_method!r}; "
            f"pick one of {similarity.DISTANCE_METHODS}"
        )
    w_h, w_s = options.weights
    if w_h < 0 or w_s < 0 or abs(w_h + w_s - 1.0) > 1e-9:
        raise ConfigError(f"weights must be non-negative and sum to 1, got {options.weights}")
    if options.hate_engine == "nb" and options.nb_model_path is None:
        raise ConfigError("hate engine 'nb' needs a trained model path (--nb-model)")
    if options.stub_classifier_label not in (0, 1):
        raise ConfigError("stub classifier label must be 0 or 1")
    if not 0.0 <= options.stub_classifier_prob <= 1.0:
        raise ConfigError("stub classifier prob must be in [0, 1]")


def build_backend_suite(options: RateOptions) -> BackendSuite:
    if options.backend_address:
        remote = protocol.RemoteBackend.from_address(
            options.backend_address, max_in_flight=options.max_in_flight
        )
        use_backend_summary = options.summarizer in ("auto", "backend")
        return BackendSuite(
            transcriber=remote,
            classifier=remote,
            summarizer=remote if use_backend_summary else None,
            stubbed=False,
            _closers=[remote.close],
        )

    summarizer = (
        protocol.LeadSummarizer() if options.summarizer == "backend" else None
    )
    return BackendSuite(
        transcriber=protocol.EchoTranscriber(),
        classifier=protocol.FixedClassifier(
            label=options.stub_classifier_label, prob=options.stub_classifier_prob
        ),
        summarizer=summarizer,
        stubbed=True,
    )


def rate_video(options: RateOptions, source: ingest.VideoSource | None = None) -> dict:
    """Run the full pipeline for one video id and return the report.

    Stage order: ingest, standardize, chunk, transcribe, hate, summarize,
    similarity, rating.  A failing stage raises PipelineStageError
    carrying the partial report with a ``failed_stage`` field.
    """
    report: dict = {}
    timings: dict[str, float] = {}
    skipped: dict[str, str] = {}

    def timed(stage: str, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            report["failed_stage"] = stage
            report["timings"] = timings
            raise PipelineStageError(stage, exc, report) from exc
        timings[stage] = (time.perf_counter() - start) * 1000.0
        return result

    validate_options(options)
    if source is None:
        if options.fixtures_dir is None:
            raise ConfigError("rate needs a fixtures directory or an explicit video source")
        source = ingest.FixtureVideoSource(Path(options.fixtures_dir))

    suite = build_backend_suite(options)
    try:
        meta, raw_audio = timed("ingest", lambda: ingest.fetch_video(options.video_id, source))
        report["video"] = meta.as_dict()

        standardized = timed("standardize", lambda: audio.standardize(raw_audio))
        chunks = timed("chunk", lambda: audio.chunk(standardized))

        if options.mel_dump_path and chunks:
            audio.write_mel(options.mel_dump_path, audio.log_mel(chunks[0]))

        if chunks:
            transcript = timed(
                "transcribe",
                lambda: asr.transcribe(chunks, suite.transcriber, options.max_in_flight),
            )
        else:
            transcript = asr.Transcript.from_segments([])
            skipped["transcribe"] = "no audio chunks"
        report["transcript"] = {
            "segments": [[idx, text] for idx, text in transcript.segments],
            "full_text": transcript.full_text,
            "failed_chunks": list(transcript.failed_chunks),
        }

        hate_flags: list[str] = []

        def run_hate() -> tuple[int, float]:
            if options.hate_engine == "nb":
                if options.nb_model_path is None:
                    raise ConfigError("hate engine 'nb' needs a trained model path")
                model = hatespeech.load_model(options.nb_model_path)
                pred = hatespeech.predict(model, transcript.full_text)
                if pred.prior_only:
                    hate_flags.append("prior_only")
                return pred.label, pred.prob_hate
            cleaned = textnorm.clean(transcript.full_text).text
            return hatespeech.classify_external(suite.classifier, cleaned)

        hate_label, hate_prob = timed("hate", run_hate)
        report["hate"] = {
            "label": hate_label,
            "prob": hate_prob,
            "engine": options.hate_engine,
            "flags": sorted(hate_flags),
        }

        summary = timed(
            "summarize",
            lambda: similarity.summarize(transcript.full_text, backend=suite.summarizer),
        )

        def run_similarity() -> tuple[float, similarity.DistanceReport]:
            meta_text = " ".join([meta.title] * max(1, options.title_weight) + [meta.description])
            a = textnorm.clean(meta_text)
            b = textnorm.clean(summary.text)
            va, vb = similarity.vectorize_pair(a, b)
            dists = similarity.distances(va, vb)
            score = similarity.similarity_score(
                dists,
                options.similarity_method,
                title_tokens=len(a.tokens),
                summary_tokens=len(b.tokens),
            )
            return score, dists

        sim_score, dists = timed("similarity", run_similarity)
        sim_flags = sorted(summary.flags)
        report["similarity"] = {
            "method": options.similarity_method,
            "score": sim_score,
            "distances": dists.as_dict(),
            "summarizer": summary.engine,
            "summary": summary.text,
            "flags": sim_flags,
        }

        assumptions = _active_assumptions(options, suite, summary)
        rating_flags = sorted(set(hate_flags) | set(summary.flags))
        result = timed(
            "rating",
            lambda: rating.compute_rating(
                hate_prob, sim_score, weights=options.weights, flags=rating_flags
            ),
        )
        report["rating"] = result.as_dict()
        report["assumptions"] = assumptions
        report["skipped"] = skipped
        report["timings"] = timings
        return report
    finally:
        suite.close()


def _active_assumptions(
    options: RateOptions, suite: BackendSuite, summary: similarity.SummaryResult
) -> list[str]:
    flags = {
        "rating_linear_blend_0_100",
        "engagement_metrics_excluded",
        "textnorm_lowercases_latin_keeps_digits",
    }
    if suite.stubbed:
        flags.add("stub_backends")
    if summary.engine == "native":
        flags.add("summarizer_native_fallback")
    if options.similarity_method == similarity.DEFAULT_METHOD:
        flags.add("similarity_default_bray_curtis")
    if options.title_weight == DEFAULT_TITLE_WEIGHT:
        flags.add("title_weight_2to1")
    if options.hate_engine == "nb":
        flags.add("nb_threshold_half_ties_hate")
    return sorted(flags)


def evaluate_wer_pairs(text_pairs: list[tuple[str, str]]) -> dict:
    """Micro-averaged corpus WER over (reference, hypothesis) text pairs.

    Both sides are cleaned and word-tokenized first; pairs whose cleaned
    reference is empty cannot be scored, so they are skipped and counted
    separately.
    """
    pairs: list[tuple[list[str], list[str]]] = []
    skipped = 0
    for reference, hypothesis in text_pairs:
        ref_tokens = textnorm.clean(reference).tokens
        hyp_tokens = textnorm.clean(hypothesis).tokens
        if not ref_tokens:
            skipped += 1
            continue
        pairs.append((list(hyp_tokens), list(ref_tokens)))
    if not pairs:
        raise ConfigError(f"no scorable pairs ({skipped} skipped for empty references)")
    breakdown = asr.corpus_wer(pairs)
    result = breakdown.as_dict()
    result["pairs"] = len(pairs)
    result["skipped_empty_reference"] = skipped
    result["assumptions"] = ["wer_micro_average"]
    return result


def evaluate_wer_file(pairs_path: str | Path) -> dict:
    """Score a `reference<TAB>hypothesis` TSV with the micro-averaged WER."""
    text_pairs: list[tuple[str, str]] = []
    with open(pairs_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            reference, sep, hypothesis = line.partition("\t")
            if not sep:
                raise ConfigError(f"line {lineno}: expected 'reference<TAB>hypothesis'")
            text_pairs.append((reference, hypothesis))
    return evaluate_wer_pairs(text_pairs)


def train_nb_corpus(
    corpus_path: str | Path,
    seed: int = hatespeech.DEFAULT_SEED,
    alpha: float = hatespeech.DEFAULT_ALPHA,
    out_path: str | Path | None = None,
) -> dict:
    """Train the trigram NB baseline and evaluate it on the held-out test split."""
    examples, dropped = hatespeech.load_corpus(corpus_path)
    corpus_split = hatespeech.split(examples, seed=seed)
    model = hatespeech.train_nb(corpus_split.train, alpha=alpha, split_seed=seed)
    if out_path is not None:
        hatespeech.save_model(model, out_path)

    golds = [ex.label for ex in corpus_split.test]
    predictions = [hatespeech.predict(model, ex.text).label for ex in corpus_split.test]
    test_report = hatespeech.evaluate(predictions, golds)
    majority = max(golds.count(0), golds.count(1)) / len(golds)
    return {
        "seed": seed,
        "alpha": alpha,
        "dropped_empty_lines": dropped,
        "split_sizes": {
            "train": len(corpus_split.train),
            "validation": len(corpus_split.validation),
            "test": len(corpus_split.test),
        },
        "vocabulary_size": model.vocabulary_size,
        "test_report": test_report.as_dict(),
        "majority_class_baseline": majority,
        "model_path": str(out_path) if out_path is not None else None,
    }


def classify_text(
    text: str,
    nb_model_path: str | Path | None = None,
    backend_address: str | None = None,
) -> dict:
    """Label one text as hate / not-hate via the NB model or a backend."""
    if (nb_model_path is None) == (backend_address is None):
        raise ConfigError("classify needs exactly one of an NB model path or a backend address")
    if nb_model_path is not None:
        model = hatespeech.load_model(nb_model_path)
        pred = hatespeech.predict(model, text)
        return {
            "label": pred.label,
            "prob": pred.prob_hate,
            "engine": "nb",
            "flags": ["prior_only"] if pred.prior_only else [],
        }
    backend = protocol.RemoteBackend.from_address(backend_address)
    try:
        label, prob = hatespeech.classify_external(backend, textnorm.clean(text).text)
    finally:
        backend.close()
    return {"label": label, "prob": prob, "engine": "backend", "flags": []}
