"""
Use Cases - Application Business Logic
Orchestrates the metric components over samples, datasets and catalogs.
"""
import asyncio
import math
from collections.abc import Callable, Collection, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Final

import numpy as np
import structlog

from safedepth.application.class_metric import (
    SKY_CLASSES,
    intra_class_weights,
    weighted_component,
)
from safedepth.application.classical_metrics import classical_suite, mae
from safedepth.application.dataset_analysis import (
    class_share,
    frames_per_class,
    model_distributions,
    roll_up_high_level,
)
from safedepth.application.feature_metric import feature_component
from safedepth.domain import (
    AffineFit,
    ClassSceneStats,
    ComponentResult,
    ComponentScores,
    DatasetCatalogEntry,
    DepthMap,
    EmptyDataset,
    EmptyGroundTruth,
    FeatureExtractor,
    FeatureMap,
    FeatureParams,
    GroundTruthPreparer,
    MissingPrediction,
    NoLabeledPixels,
    PredictionAligner,
    RasterReader,
    RasterWriter,
    SampleSource,
    SceneSample,
    SuperClassScore,
    UnknownModel,
    WeightTable,
    validate_pair,
)

logger = structlog.get_logger(__name__)

DIVERGENCE_RULE: Final[str] = "combined - gamma * 3 * mae"


class Aggregation(str, Enum):
    """How per-image components are reduced over a dataset."""
    PER_IMAGE_MEAN = "per-image-mean"
    PIXEL_POOLED = "pixel-pooled"


def scene_of(sample_id: str) -> str:
    """Scene directory of a "scene/frame" sample ID."""
    scene, sep, _ = sample_id.rpartition("/")
    return scene if sep else sample_id


def divergence(combined: float, mae: float, gamma: float) -> float:
    """Excess of the class-aware score over what a uniform error would give."""
    return combined - gamma * 3.0 * mae


@dataclass(frozen=True)
class EvaluationOptions:
    """Knobs shared by every sample of a run."""
    gamma: float = 1.0
    focus: tuple[str, ...] | None = None
    renormalize_present: bool = False
    sky_classes: tuple[str, ...] = SKY_CLASSES
    aggregation: Aggregation = Aggregation.PER_IMAGE_MEAN
    feature_params: FeatureParams = field(default_factory=FeatureParams)

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class PreparedSample:
    """Model-independent state of one sample, computed once."""
    sample: SceneSample
    gt: DepthMap
    features: FeatureMap
    stats: Mapping[str, ClassSceneStats]


@dataclass(frozen=True)
class SampleEvaluation:
    """Scores of one model on one sample plus what was left out."""
    sample_id: str
    model: str
    scores: ComponentScores
    unmapped: tuple[str, ...] = ()
    feature_pixels: int = 0
    dropped_feature_pixels: int = 0
    clamped_pixels: int = 0
    classical_excluded: Mapping[str, int] = field(default_factory=dict)

    @property
    def scene(self) -> str:
        return scene_of(self.sample_id)

    @property
    def mae(self) -> float:
        return self.scores.e_global

    @property
    def divergence(self) -> float:
        return divergence(self.scores.combined, self.mae, self.scores.gamma)


@dataclass(frozen=True)
class SampleFailure:
    """A (sample, model) pair that could not be scored."""
    sample_id: str
    model: str
    error_type: str
    message: str

    @classmethod
    def from_exception(cls, sample_id: str, model: str, error: Exception) -> "SampleFailure":
        return cls(sample_id, model, type(error).__name__, str(error))


@dataclass(frozen=True)
class ComponentTotals:
    """Aggregated components of a set of samples."""
    e_class: float
    e_feature: float
    e_global: float
    combined: float
    sample_count: int
    pixel_count: int


@dataclass(frozen=True)
class SuperClassAggregate:
    """
    Dataset-level view of one super-class.

    `contribution` averages over every scored sample (absent counts as 0)
    so the contributions add up to the aggregated component.
    """
    name: str
    contribution: float
    raw_mae: float | None
    w_class: float
    sample_count: int
    pixel_count: int


@dataclass(frozen=True)
class ExclusionCounters:
    """Pixels and classes that did not reach a metric."""
    unmapped_classes: tuple[str, ...] = ()
    dropped_feature_pixels: int = 0
    clamped_pixels: int = 0
    classical_excluded: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSummary:
    """Everything reported for one model."""
    model: str
    totals: ComponentTotals | None
    classical: Mapping[str, float | None]
    per_class: Mapping[str, SuperClassAggregate]
    per_class_feature: Mapping[str, SuperClassAggregate]
    by_scene: Mapping[str, ComponentTotals]
    rows: tuple[SampleEvaluation, ...]
    exclusions: ExclusionCounters


@dataclass(frozen=True)
class DatasetEvaluation:
    """Result of a batch run over all models."""
    gamma: float
    aggregation: Aggregation
    sample_count: int
    models: Mapping[str, ModelSummary]
    failures: tuple[SampleFailure, ...]


@dataclass(frozen=True)
class SceneScore:
    """Per-sample numbers needed for ranking."""
    sample_id: str
    combined: float
    mae: float


@dataclass(frozen=True)
class RankedScene:
    """One entry of a divergence ranking."""
    sample_id: str
    divergence: float
    combined: float
    mae: float


def _weighted_mean(values: Sequence[float], weights: Sequence[float]) -> float:
    return math.fsum(w * v for w, v in zip(weights, values, strict=True)) / math.fsum(weights)


def _sample_weights(rows: Sequence[SampleEvaluation], mode: Aggregation) -> list[float]:
    if mode is Aggregation.PIXEL_POOLED:
        return [float(r.scores.pixel_count) for r in rows]
    return [1.0] * len(rows)


def aggregate_components(
    rows: Sequence[SampleEvaluation],
    gamma: float,
    mode: Aggregation = Aggregation.PER_IMAGE_MEAN,
) -> ComponentTotals:
    """
    Reduce each component over the rows, then combine.

    per-image-mean averages the per-image values; pixel-pooled weights each
    image by its comparison-domain pixel count.
    """
    if not rows:
        raise ValueError("cannot aggregate zero samples")
    weights = _sample_weights(rows, mode)
    e_class = _weighted_mean([r.scores.e_class for r in rows], weights)
    e_feature = _weighted_mean([r.scores.e_feature for r in rows], weights)
    e_global = _weighted_mean([r.scores.e_global for r in rows], weights)
    return ComponentTotals(
        e_class=e_class,
        e_feature=e_feature,
        e_global=e_global,
        combined=gamma * (e_class + e_feature + e_global),
        sample_count=len(rows),
        pixel_count=sum(r.scores.pixel_count for r in rows),
    )


def _aggregate_classical(
    rows: Sequence[SampleEvaluation],
    mode: Aggregation,
) -> dict[str, float | None]:
    weights = _sample_weights(rows, mode)
    names = sorted({name for r in rows for name in r.scores.classical})
    out: dict[str, float | None] = {}
    for name in names:
        values: list[float] = []
        kept: list[float] = []
        for r, w in zip(rows, weights, strict=True):
            value = r.scores.classical.get(name)
            if value is not None:
                values.append(value)
                kept.append(w)
        out[name] = _weighted_mean(values, kept) if values else None
    return out


def _aggregate_super_classes(
    rows: Sequence[SampleEvaluation],
    mode: Aggregation,
    pick: Callable[[ComponentScores], Mapping[str, SuperClassScore]],
) -> dict[str, SuperClassAggregate]:
    weights = _sample_weights(rows, mode)
    names = sorted({name for r in rows for name in pick(r.scores)})
    out: dict[str, SuperClassAggregate] = {}
    for name in names:
        present: list[tuple[SuperClassScore, float]] = []
        contributions: list[float] = []
        for r, w in zip(rows, weights, strict=True):
            score = pick(r.scores).get(name)
            contributions.append(0.0 if score is None else score.contribution)
            if score is not None:
                present.append((score, w))
        measured = [(s.raw_mae, w) for s, w in present if s.raw_mae is not None]
        out[name] = SuperClassAggregate(
            name=name,
            contribution=_weighted_mean(contributions, weights),
            raw_mae=(
                _weighted_mean([float(m) for m, _ in measured], [w for _, w in measured])
                if measured
                else None
            ),
            w_class=math.fsum(s.w_class for s, _ in present) / len(present),
            sample_count=len(present),
            pixel_count=sum(s.pixel_count for s, _ in present),
        )
    return out


def _exclusions(rows: Sequence[SampleEvaluation]) -> ExclusionCounters:
    excluded: dict[str, int] = {}
    for r in rows:
        for name, count in r.classical_excluded.items():
            excluded[name] = excluded.get(name, 0) + count
    return ExclusionCounters(
        unmapped_classes=tuple(sorted({c for r in rows for c in r.unmapped})),
        dropped_feature_pixels=sum(r.dropped_feature_pixels for r in rows),
        clamped_pixels=sum(r.clamped_pixels for r in rows),
        classical_excluded=dict(sorted(excluded.items())),
    )


def summarize_model(
    model: str,
    rows: Sequence[SampleEvaluation],
    gamma: float,
    mode: Aggregation,
) -> ModelSummary:
    """Build a model's summary from its rows in input order."""
    if not rows:
        return ModelSummary(model, None, {}, {}, {}, {}, (), ExclusionCounters())
    scenes: dict[str, list[SampleEvaluation]] = {}
    for r in rows:
        scenes.setdefault(r.scene, []).append(r)
    return ModelSummary(
        model=model,
        totals=aggregate_components(rows, gamma, mode),
        classical=_aggregate_classical(rows, mode),
        per_class=_aggregate_super_classes(rows, mode, lambda s: s.per_class),
        per_class_feature=_aggregate_super_classes(rows, mode, lambda s: s.per_class_feature),
        by_scene={
            scene: aggregate_components(group, gamma, mode)
            for scene, group in sorted(scenes.items())
        },
        rows=tuple(rows),
        exclusions=_exclusions(rows),
    )


class EvaluateSampleUseCase:
    """
    Score model predictions of one sample: E_class, E_feature, E_global,
    the classical suite and the combined score.
    """

    def __init__(
        self,
        weights: WeightTable,
        extractor: FeatureExtractor,
        preparer: GroundTruthPreparer,
        aligner: PredictionAligner,
        options: EvaluationOptions | None = None,
    ) -> None:
        self._weights = weights
        self._extractor = extractor
        self._preparer = preparer
        self._aligner = aligner
        self._options = options or EvaluationOptions()

    @property
    def options(self) -> EvaluationOptions:
        return self._options

    def prepare(self, sample: SceneSample) -> PreparedSample:
        """
        Densify and sky-mask the ground truth, compute the intra-class
        weights and the feature map. Shared by every model of the sample.

        Raises:
            EmptyGroundTruth: If no ground truth survives preparation
            DegenerateImage: If the image is smaller than the feature window
        """
        gt = self._preparer.prepare(sample.gt, sample.seg)
        if not gt.valid.any():
            raise EmptyGroundTruth(f"{sample.id}: no valid ground truth after sky masking")
        try:
            stats: Mapping[str, ClassSceneStats] = intra_class_weights(
                gt, sample.seg, exclude=self._options.sky_classes
            )
        except NoLabeledPixels:
            logger.debug("sample_without_labeled_classes", sample_id=sample.id)
            stats = {}

        if not stats:
            features = FeatureMap.empty(*gt.shape, kind=self._extractor.kind)
        elif sample.rgb is None:
            logger.warning("rgb_missing_features_empty", sample_id=sample.id)
            features = FeatureMap.empty(*gt.shape, kind=self._extractor.kind)
        else:
            features = self._extractor.extract(sample.rgb, self._options.feature_params)
        return PreparedSample(sample=sample, gt=gt, features=features, stats=stats)

    def score(self, prepared: PreparedSample, model: str) -> SampleEvaluation:
        """
        Raises:
            MissingPrediction: If the sample holds no prediction for the model
        """
        sample, opts = prepared.sample, self._options
        raw = sample.pred.get(model)
        if raw is None:
            raise MissingPrediction(f"{sample.id}: no prediction for model {model!r}")
        pred, clamped = self._aligner.align(model, raw)
        triple = validate_pair(pred, prepared.gt, sample.seg)

        if prepared.stats:
            e_class = weighted_component(
                triple,
                self._weights,
                prepared.stats,
                focus=opts.focus,
                renormalize_present=opts.renormalize_present,
                exclude=opts.sky_classes,
            )
            e_feature = feature_component(
                pred,
                prepared.gt,
                sample.seg,
                prepared.features,
                self._weights,
                opts.focus,
                stats=prepared.stats,
                renormalize_present=opts.renormalize_present,
                exclude=opts.sky_classes,
            )
        else:
            e_class = e_feature = ComponentResult(total=0.0, per_super_class={})

        suite = classical_suite(pred, prepared.gt, triple.domain)
        e_global = mae(pred, prepared.gt, triple.domain)
        scores = ComponentScores.combine(
            e_class.total,
            e_feature.total,
            e_global,
            opts.gamma,
            per_class=e_class.per_super_class,
            per_class_feature=e_feature.per_super_class,
            classical=suite.values,
            pixel_count=triple.pixel_count,
        )
        logger.debug(
            "sample_evaluated",
            sample_id=sample.id,
            model=model,
            e_class=scores.e_class,
            e_feature=scores.e_feature,
            e_global=scores.e_global,
            combined=scores.combined,
        )
        return SampleEvaluation(
            sample_id=sample.id,
            model=model,
            scores=scores,
            unmapped=tuple(sorted(set(e_class.unmapped))),
            feature_pixels=int(np.count_nonzero(prepared.features.active)),
            dropped_feature_pixels=e_feature.dropped_pixels,
            clamped_pixels=clamped,
            classical_excluded=suite.excluded,
        )

    def execute(self, sample: SceneSample, model: str) -> SampleEvaluation:
        """Prepare and score in one go."""
        return self.score(self.prepare(sample), model)


class EvaluateDatasetUseCase:
    """
    Evaluate every sample of a source for several models.
    Samples run in worker threads; results are reduced in input order.
    """

    def __init__(
        self,
        source: SampleSource,
        evaluator: EvaluateSampleUseCase,
        workers: int = 1,
    ) -> None:
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self._source = source
        self._evaluator = evaluator
        self._workers = workers

    def _evaluate_one(
        self,
        sample_id: str,
        models: Sequence[str],
    ) -> list[SampleEvaluation | SampleFailure]:
        """Score one sample for every model; any exception becomes a failure row."""
        try:
            prepared = self._evaluator.prepare(self._source.load(sample_id, models))
        except Exception as e:
            logger.warning(
                "sample_failed",
                sample_id=sample_id,
                error_type=type(e).__name__,
                error=str(e),
            )
            return [SampleFailure.from_exception(sample_id, m, e) for m in models]

        outcomes: list[SampleEvaluation | SampleFailure] = []
        for model in models:
            try:
                outcomes.append(self._evaluator.score(prepared, model))
            except Exception as e:
                logger.warning(
                    "sample_model_failed",
                    sample_id=sample_id,
                    model=model,
                    error_type=type(e).__name__,
                    error=str(e),
                )
                outcomes.append(SampleFailure.from_exception(sample_id, model, e))
        return outcomes

    async def execute(self, models: Sequence[str]) -> DatasetEvaluation:
        """
        Raises:
            EmptyDataset: If the source has no sample
        """
        if not models:
            raise ValueError("at least one model is required")
        sample_ids = self._source.sample_ids()
        if not sample_ids:
            raise EmptyDataset("dataset holds no evaluable sample")

        logger.info(
            "dataset_evaluation_started",
            samples=len(sample_ids),
            models=list(models),
            workers=self._workers,
        )
        semaphore = asyncio.Semaphore(self._workers)

        async def run(sample_id: str) -> list[SampleEvaluation | SampleFailure]:
            async with semaphore:
                return await asyncio.to_thread(self._evaluate_one, sample_id, models)

        per_sample = await asyncio.gather(*(run(i) for i in sample_ids))

        rows: dict[str, list[SampleEvaluation]] = {m: [] for m in models}
        failures: list[SampleFailure] = []
        for outcomes in per_sample:
            for outcome in outcomes:
                if isinstance(outcome, SampleFailure):
                    failures.append(outcome)
                else:
                    rows[outcome.model].append(outcome)

        opts = self._evaluator.options
        summaries = {
            m: summarize_model(m, rows[m], opts.gamma, opts.aggregation) for m in models
        }
        logger.info(
            "dataset_evaluation_finished",
            samples=len(sample_ids),
            failures=len(failures),
            combined={m: s.totals.combined if s.totals else None for m, s in summaries.items()},
        )
        return DatasetEvaluation(
            gamma=opts.gamma,
            aggregation=opts.aggregation,
            sample_count=len(sample_ids),
            models=summaries,
            failures=tuple(failures),
        )


class RankScenesUseCase:
    """
    Order a model's samples by divergence, largest first, ties by ID.
    """

    def execute(
        self,
        scores: Mapping[str, Sequence[SceneScore]],
        gamma: float,
        model: str,
        top: int | None = None,
    ) -> list[RankedScene]:
        """
        Raises:
            UnknownModel: If the model has no rows
        """
        if model not in scores:
            raise UnknownModel(f"model {model!r} is not in the report; known: {sorted(scores)}")
        ranked = sorted(
            (
                RankedScene(s.sample_id, divergence(s.combined, s.mae, gamma), s.combined, s.mae)
                for s in scores[model]
            ),
            key=lambda r: (-r.divergence, r.sample_id),
        )
        return ranked if top is None else ranked[:top]


@dataclass(frozen=True)
class DatasetComposition:
    """Class frames and shares of a catalog, overall and per model."""
    frames: Mapping[str, Fraction]
    shares: Mapping[str, float]
    high_level_frames: Mapping[str, Fraction]
    high_level_shares: Mapping[str, float]
    per_model: Mapping[str, Mapping[str, float]]


class AnalyzeDatasetsUseCase:
    """
    Training-data composition of a dataset catalog.
    """

    def __init__(
        self,
        entries: Sequence[DatasetCatalogEntry],
        models: Mapping[str, Collection[str]] | None = None,
    ) -> None:
        self._entries = entries
        self._models = models or {}

    def execute(self) -> DatasetComposition:
        """
        Raises:
            EmptyCatalog: If the catalog has no entry
            ZeroTotal: If every dataset has zero frames
        """
        frames = frames_per_class(self._entries)
        high = roll_up_high_level(frames)
        composition = DatasetComposition(
            frames=frames,
            shares=class_share(frames),
            high_level_frames=high,
            high_level_shares=class_share(high),
            per_model=model_distributions(self._entries, self._models),
        )
        logger.info("catalog_analyzed", datasets=len(self._entries), classes=len(frames))
        return composition


@dataclass(frozen=True)
class AffineFitResult:
    """A fit and the frames it was computed on."""
    fit: AffineFit
    frames: tuple[tuple[str, str], ...]


class FitAffineUseCase:
    """
    Fit one scale/shift over any subset of (prediction, ground truth) frames.
    """

    def __init__(
        self,
        reader: RasterReader,
        fitter: Callable[[Sequence[tuple[DepthMap, DepthMap]]], AffineFit],
    ) -> None:
        self._reader = reader
        self._fitter = fitter

    def execute(self, pairs: Sequence[tuple[Path, Path]]) -> AffineFitResult:
        if not pairs:
            raise ValueError("at least one prediction/ground-truth pair is required")
        maps = [(self._reader.read_depth(p), self._reader.read_depth(g)) for p, g in pairs]
        return AffineFitResult(
            fit=self._fitter(maps),
            frames=tuple((str(p), str(g)) for p, g in pairs),
        )


@dataclass(frozen=True)
class DensifyOutcome:
    """Pixel counts of a densification run."""
    total_pixels: int
    filled_pixels: int


class DensifyUseCase:
    """
    Read a sparse depth raster, fill it and write it back out.
    """

    def __init__(
        self,
        reader: RasterReader,
        writer: RasterWriter,
        densifier: Callable[[DepthMap], DepthMap],
    ) -> None:
        self._reader = reader
        self._writer = writer
        self._densifier = densifier

    def execute(self, source: Path, target: Path) -> DensifyOutcome:
        sparse = self._reader.read_depth(source)
        dense = self._densifier(sparse)
        self._writer.write_depth(target, dense)
        outcome = DensifyOutcome(
            total_pixels=sparse.height * sparse.width,
            filled_pixels=dense.valid_count - sparse.valid_count,
        )
        logger.info(
            "densified_file",
            source=str(source),
            target=str(target),
            filled=outcome.filled_pixels,
        )
        return outcome
