"""FastAPI service exposing the rating pipeline to multiple clients.

Every endpoint delegates to the pipeline layer; the CLI hits the same
functions in-process, so a report is identical whichever door it came
through.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import (
    BackendOpError,
    BackendUnavailableError,
    InputError,
    NotFoundError,
    ProtocolError,
    SourceUnavailableError,
    VidtrustError,
)
from . import schemas


def _status_for(exc: VidtrustError) -> int:
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, InputError):
        return 400
    if isinstance(exc, (BackendUnavailableError, SourceUnavailableError)):
        return 503
    if isinstance(exc, (ProtocolError, BackendOpError)):
        return 502
    return 500


def create_app() -> FastAPI:
    app = FastAPI(
        title="vidtrust",
        version=__version__,
        description="Content-integrity ratings for video audio tracks.",
    )

    @app.exception_handler(VidtrustError)
    async def vidtrust_error_handler(request: Request, exc: VidtrustError) -> JSONResponse:
        body: dict = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, pipeline.PipelineStageError):
            body["failed_stage"] = exc.stage
            body["detail"] = str(exc.cause)
            return JSONResponse(status_code=_status_for_cause(exc), content=body)
        return JSONResponse(status_code=_status_for(exc), content=body)

    def _status_for_cause(exc: pipeline.PipelineStageError) -> int:
        cause = exc.cause
        return _status_for(cause) if isinstance(cause, VidtrustError) else 500

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/rate", response_model=schemas.RateReport)
    def rate(request: schemas.RateRequest) -> dict:
        options = pipeline.RateOptions(
            video_id=request.video_id,
            fixtures_dir=request.fixtures_dir,
            backend_address=request.backend,
            hate_engine=request.hate_engine,
            nb_model_path=request.nb_model,
            similarity_method=request.similarity_method,
            weights=request.weights,
            summarizer=request.summarizer,
            title_weight=request.title_weight,
            stub_classifier_label=request.stub_classifier_label,
            stub_classifier_prob=request.stub_classifier_prob,
            seed=request.seed,
        )
        return pipeline.rate_video(options)

    @app.post("/wer", response_model=schemas.WerReport)
    def wer(request: schemas.WerRequest) -> dict:
        if (request.pairs is None) == (request.pairs_path is None):
            raise InputError("provide exactly one of 'pairs' or 'pairs_path'")
        if request.pairs is not None:
            return pipeline.evaluate_wer_pairs(request.pairs)
        return pipeline.evaluate_wer_file(request.pairs_path)

    @app.post("/classify", response_model=schemas.ClassifyResponse)
    def classify(request: schemas.ClassifyRequest) -> dict:
        return pipeline.classify_text(
            request.text, nb_model_path=request.nb_model, backend_address=request.backend
        )

    @app.post("/train", response_model=schemas.TrainReport)
    def train(request: schemas.TrainRequest) -> dict:
        return pipeline.train_nb_corpus(
            request.corpus_path,
            seed=request.seed,
            alpha=request.alpha,
            out_path=request.out_model,
        )

    return app


app = create_app()
