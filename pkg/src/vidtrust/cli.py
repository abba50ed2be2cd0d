"""Command-line entry points.

Each subcommand is a thin client over the pipeline layer: flags become a
request, the report comes back as JSON.  With ``--server URL`` the same
request is POSTed to a running vidtrust service instead of executing
in-process.

Exit codes: 0 ok, 1 internal error, 2 input error, 3 backend unavailable.
"""

from __future__ import annotations

import json
import sys
import urllib.error
import urllib.request

import click

from . import pipeline
from .errors import (
    BackendUnavailableError,
    InputError,
    SourceUnavailableError,
    VidtrustError,
)
from .pipeline import PipelineStageError, RateOptions

BACKEND_ENV_VAR = "AIP_BACKEND"

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_BACKEND = 3


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, PipelineStageError):
        return _exit_code(exc.cause)
    if isinstance(exc, (InputError, FileNotFoundError, IsADirectoryError, PermissionError)):
        return EXIT_INPUT
    if isinstance(exc, (BackendUnavailableError, SourceUnavailableError)):
        return EXIT_BACKEND
    return EXIT_INTERNAL


def _emit(doc: dict, out: str | None, pretty: bool) -> None:
    payload = json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2 if pretty else None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        click.echo(payload)


def _fail(exc: Exception, out: str | None, pretty: bool) -> None:
    if isinstance(exc, PipelineStageError):
        _emit(exc.partial_report, out, pretty)
        click.echo(f"error in stage '{exc.stage}': {exc.cause}", err=True)
    else:
        click.echo(f"error: {exc}", err=True)
    sys.exit(_exit_code(exc))


def _post(server: str, path: str, payload: dict) -> dict:
    body = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(
        server.rstrip("/") + path, data=body, headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(request) as response:
            return json.loads(response.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", errors="replace")
        click.echo(f"server error {exc.code}: {detail}", err=True)
        sys.exit(EXIT_INPUT if exc.code in (400, 404, 422) else
                 EXIT_BACKEND if exc.code == 503 else EXIT_INTERNAL)
    except urllib.error.URLError as exc:
        click.echo(f"cannot reach server {server}: {exc.reason}", err=True)
        sys.exit(EXIT_BACKEND)


def _parse_weights(value: str) -> tuple[float, float]:
    parts = value.split(",")
    if len(parts) != 2:
        raise click.BadParameter("weights must be W_H,W_S (e.g. 0.5,0.5)")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise click.BadParameter(f"weights must be numbers, got {value!r}")


def _parse_stub_classify(value: str) -> tuple[int, float]:
    label_str, sep, prob_str = value.partition(":")
    if not sep:
        raise click.BadParameter("stub classifier must be LABEL:PROB (e.g. 1:0.9)")
    try:
        return int(label_str), float(prob_str)
    except ValueError:
        raise click.BadParameter(f"stub classifier must be LABEL:PROB, got {value!r}")


@click.group()
def main() -> None:
    """Content-integrity ratings for video audio tracks."""


@main.command()
@click.argument("video_id")
@click.option("--fixtures", "fixtures_dir", type=click.Path(), help="Offline fixture directory.")
@click.option("--backend", envvar=BACKEND_ENV_VAR,
              help="Model backend: HOST:PORT or stdio:CMD. Defaults to deterministic stubs.")
@click.option("--hate-engine", type=click.Choice(["nb", "backend"]), default="backend",
              show_default=True)
@click.option("--nb-model", type=click.Path(), help="Trained NB model (required for --hate-engine nb).")
@click.option("--similarity-method", default="bray_curtis", show_default=True)
@click.option("--weights", default="0.5,0.5", show_default=True, help="W_H,W_S (must sum to 1).")
@click.option("--summarizer", type=click.Choice(["auto", "backend", "native"]), default="auto",
              show_default=True)
@click.option("--title-weight", default=pipeline.DEFAULT_TITLE_WEIGHT, show_default=True,
              help="How many times the title is repeated against the description.")
@click.option("--stub-classify", default="0:0.0", show_default=True,
              help="LABEL:PROB answered by the stub classifier when no backend is configured.")
@click.option("--seed", default=42, show_default=True)
@click.option("--dump-mel", type=click.Path(), help="Dump the first chunk's spectrogram (debug).")
@click.option("--out", type=click.Path(), help="Write the report here instead of stdout.")
@click.option("--pretty", is_flag=True, help="Indent the JSON report.")
@click.option("--server", help="POST to a running vidtrust service instead of running locally.")
def rate(video_id, fixtures_dir, backend, hate_engine, nb_model, similarity_method,
         weights, summarizer, title_weight, stub_classify, seed, dump_mel, out, pretty, server):
    """Rate one video: transcription, hate screening, similarity, score."""
    weights_pair = _parse_weights(weights)
    stub_label, stub_prob = _parse_stub_classify(stub_classify)
    if server:
        report = _post(server, "/rate", {
            "video_id": video_id,
            "fixtures_dir": fixtures_dir,
            "backend": backend,
            "hate_engine": hate_engine,
            "nb_model": nb_model,
            "similarity_method": similarity_method,
            "weights": list(weights_pair),
            "summarizer": summarizer,
            "title_weight": title_weight,
            "stub_classifier_label": stub_label,
            "stub_classifier_prob": stub_prob,
            "seed": seed,
        })
        _emit(report, out, pretty)
        return
    options = RateOptions(
        video_id=video_id,
        fixtures_dir=fixtures_dir,
        backend_address=backend,
        hate_engine=hate_engine,
        nb_model_path=nb_model,
        similarity_method=similarity_method,
        weights=weights_pair,
        summarizer=summarizer,
        title_weight=title_weight,
        stub_classifier_label=stub_label,
        stub_classifier_prob=stub_prob,
        seed=seed,
        mel_dump_path=dump_mel,
    )
    try:
        report = pipeline.rate_video(options)
    except (VidtrustError, OSError) as exc:
        _fail(exc, out, pretty)
        return
    _emit(report, out, pretty)


@main.command("evaluate-wer")
@click.argument("pairs_path", type=click.Path())
@click.option("--out", type=click.Path())
@click.option("--pretty", is_flag=True)
@click.option("--server", help="POST to a running vidtrust service.")
def evaluate_wer(pairs_path, out, pretty, server):
    """Score a reference<TAB>hypothesis TSV with the micro-averaged WER."""
    if server:
        _emit(_post(server, "/wer", {"pairs_path": pairs_path}), out, pretty)
        return
    try:
        report = pipeline.evaluate_wer_file(pairs_path)
    except (VidtrustError, OSError) as exc:
        _fail(exc, out, pretty)
        return
    _emit(report, out, pretty)


@main.command("train-nb")
@click.argument("corpus_path", type=click.Path())
@click.option("--seed", default=42, show_default=True)
@click.option("--alpha", default=1.0, show_default=True,
              type=click.FloatRange(min=0, min_open=True))
@click.option("--out-model", type=click.Path(), help="Where to save the trained model.")
@click.option("--out", type=click.Path())
@click.option("--pretty", is_flag=True)
@click.option("--server", help="POST to a running vidtrust service.")
def train_nb(corpus_path, seed, alpha, out_model, out, pretty, server):
    """Train the trigram NB baseline; prints split sizes and test metrics."""
    if server:
        _emit(_post(server, "/train", {
            "corpus_path": corpus_path, "seed": seed, "alpha": alpha, "out_model": out_model,
        }), out, pretty)
        return
    try:
        report = pipeline.train_nb_corpus(corpus_path, seed=seed, alpha=alpha, out_path=out_model)
    except (VidtrustError, OSError) as exc:
        _fail(exc, out, pretty)
        return
    _emit(report, out, pretty)


@main.command()
@click.argument("text", required=False)
@click.option("--file", "text_file", type=click.Path(), help="Read the text from a file.")
@click.option("--nb-model", type=click.Path())
@click.option("--backend", envvar=BACKEND_ENV_VAR, help="Classifier backend: HOST:PORT or stdio:CMD.")
@click.option("--out", type=click.Path())
@click.option("--pretty", is_flag=True)
@click.option("--server", help="POST to a running vidtrust service.")
@click.pass_context
def classify(ctx, text, text_file, nb_model, backend, out, pretty, server):
    """Label a text as hate / not-hate."""
    if text is None and text_file is None:
        raise click.UsageError("pass TEXT or --file")
    # an explicit model beats a backend that only arrived via the env var
    from click.core import ParameterSource

    if nb_model and ctx.get_parameter_source("backend") == ParameterSource.ENVIRONMENT:
        backend = None
    if text is None:
        try:
            with open(text_file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
    if server:
        _emit(_post(server, "/classify", {"text": text, "nb_model": nb_model, "backend": backend}),
              out, pretty)
        return
    try:
        report = pipeline.classify_text(text, nb_model_path=nb_model, backend_address=backend)
    except (VidtrustError, OSError) as exc:
        _fail(exc, out, pretty)
        return
    _emit(report, out, pretty)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the vidtrust HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
