"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class RateRequest(BaseModel):
    video_id: str
    fixtures_dir: Optional[str] = None
    backend: Optional[str] = None
    hate_engine: Literal["nb", "backend"] = "backend"
    nb_model: Optional[str] = None
    similarity_method: str = "bray_curtis"
    weights: tuple[float, float] = (0.5, 0.5)
    summarizer: Literal["auto", "backend", "native"] = "auto"
    title_weight: int = 2
    stub_classifier_label: int = 0
    stub_classifier_prob: float = 0.0
    seed: int = 42


class VideoModel(BaseModel):
    video_id: str
    title: str
    description: str
    duration_seconds: float
    view_count: int
    like_count: int


class TranscriptModel(BaseModel):
    segments: list[tuple[int, str]]
    full_text: str
    failed_chunks: list[int]


class HateModel(BaseModel):
    label: int
    prob: float
    engine: str
    flags: list[str]


class DistancesModel(BaseModel):
    euclidean: float
    squared_euclidean: float
    manhattan: float
    chessboard: float
    bray_curtis: float
    canberra: float


class SimilarityModel(BaseModel):
    method: str
    score: float
    distances: DistancesModel
    summarizer: str
    summary: str
    flags: list[str]


class RatingModel(BaseModel):
    hate_prob: float
    similarity: float
    overall: int
    verdict: str
    components: dict


class RateReport(BaseModel):
    video: VideoModel
    transcript: TranscriptModel
    hate: HateModel
    similarity: SimilarityModel
    rating: RatingModel
    assumptions: list[str]
    skipped: dict[str, str]
    timings: dict[str, float]


class WerRequest(BaseModel):
    pairs: Optional[list[tuple[str, str]]] = Field(
        default=None, description="(reference, hypothesis) text pairs"
    )
    pairs_path: Optional[str] = Field(
        default=None, description="path to a reference<TAB>hypothesis TSV"
    )


class WerReport(BaseModel):
    s: int
    d: int
    i: int
    n: int
    wer: float
    pairs: int
    skipped_empty_reference: int
    assumptions: list[str]


class ClassifyRequest(BaseModel):
    text: str
    nb_model: Optional[str] = None
    backend: Optional[str] = None


class ClassifyResponse(BaseModel):
    label: int
    prob: float
    engine: str
    flags: list[str]


class ClassificationReportModel(BaseModel):
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: list[str]


class TrainRequest(BaseModel):
    corpus_path: str
    seed: int = 42
    alpha: float = Field(default=1.0, gt=0)
    out_model: Optional[str] = None


class TrainReport(BaseModel):
    seed: int
    alpha: float
    dropped_empty_lines: int
    split_sizes: dict[str, int]
    vocabulary_size: int
    test_report: ClassificationReportModel
    majority_class_baseline: float
    model_path: Optional[str]


class HealthResponse(BaseModel):
    status: str
    version: str
