"""
Dependency Injection Container
Wires infrastructure services into the use cases of one run.
"""
from pathlib import Path

import structlog

from safedepth.api.config import RunConfig, Settings
from safedepth.application import (
    AnalyzeDatasetsUseCase,
    DensifyUseCase,
    EvaluateDatasetUseCase,
    EvaluateSampleUseCase,
    EvaluationOptions,
    FitAffineUseCase,
    RankScenesUseCase,
)
from safedepth.domain import FeatureExtractor, WeightTable
from safedepth.infrastructure import (
    AffineAligner,
    DensifyMethod,
    DirectorySampleSource,
    FeatureExtractorFactory,
    FileRasterReader,
    FileRasterWriter,
    SkyMaskingPreparer,
    densify,
    fit_scale_shift_frames,
    load_catalog,
    load_weight_table,
)
from safedepth.infrastructure.raster_io import DEFAULT_SCALE_DIVISOR

logger = structlog.get_logger(__name__)


class DependencyContainer:
    """
    Dependency Injection container for application services.
    Infrastructure services are built once and shared by the use cases.
    """

    def __init__(
        self,
        settings: Settings,
        run: RunConfig | None = None,
        *,
        depth_scale: float | None = None,
    ) -> None:
        self._settings = settings
        self._run = run
        if depth_scale is None:
            depth_scale = run.depth_scale if run else DEFAULT_SCALE_DIVISOR
        self._scale = depth_scale
        self._reader = FileRasterReader(scale_divisor=self._scale, attempts=settings.io_retries)
        self._weights: WeightTable | None = None
        self._extractor: FeatureExtractor | None = None

    def initialize(self) -> None:
        """
        Load the weight table and build the feature extractor of the run.

        Raises:
            UnknownSuperClass: If a focus name is not in the weight table
        """
        if self._run is None:
            raise RuntimeError("Run configuration required for evaluation services")
        logger.info("initializing_dependencies")
        self._weights = load_weight_table(self._run.weights)
        for name in self._run.focus or ():
            self._weights.weight(name)
        self._extractor = FeatureExtractorFactory.create(self._run.feature_kind)
        logger.info(
            "dependencies_initialized",
            feature_kind=self._run.feature_kind.value,
            densify=self._run.effective_densify.value,
            workers=self._settings.workers,
        )

    @property
    def run(self) -> RunConfig:
        if self._run is None:
            raise RuntimeError("Run configuration not set")
        return self._run

    @property
    def reader(self) -> FileRasterReader:
        return self._reader

    @property
    def weights(self) -> WeightTable:
        """Get the weight table of the run."""
        if self._weights is None:
            raise RuntimeError("Weight table not initialized")
        return self._weights

    @property
    def extractor(self) -> FeatureExtractor:
        """Get the feature extractor of the run."""
        if self._extractor is None:
            raise RuntimeError("Feature extractor not initialized")
        return self._extractor

    def options(self) -> EvaluationOptions:
        run = self.run
        return EvaluationOptions(
            gamma=run.gamma,
            focus=tuple(run.focus) if run.focus else None,
            renormalize_present=run.renormalize_present,
            sky_classes=tuple(run.sky_classes),
            aggregation=run.aggregation,
            feature_params=run.features.to_params(),
        )

    def get_evaluate_sample_use_case(self) -> EvaluateSampleUseCase:
        """Create EvaluateSampleUseCase instance."""
        run = self.run
        return EvaluateSampleUseCase(
            weights=self.weights,
            extractor=self.extractor,
            preparer=SkyMaskingPreparer(run.sky_classes, run.effective_densify),
            aligner=AffineAligner({m: a.to_fit() for m, a in run.affine.items()}),
            options=self.options(),
        )

    def get_evaluate_dataset_use_case(self) -> EvaluateDatasetUseCase:
        """Create EvaluateDatasetUseCase instance."""
        return EvaluateDatasetUseCase(
            source=DirectorySampleSource(self.run.root, self._reader),
            evaluator=self.get_evaluate_sample_use_case(),
            workers=self._settings.workers,
        )

    def get_rank_use_case(self) -> RankScenesUseCase:
        return RankScenesUseCase()

    def get_analyze_datasets_use_case(self, catalog_path: Path) -> AnalyzeDatasetsUseCase:
        catalog = load_catalog(catalog_path)
        return AnalyzeDatasetsUseCase(catalog.entries, catalog.models)

    def get_fit_affine_use_case(self) -> FitAffineUseCase:
        return FitAffineUseCase(reader=self._reader, fitter=fit_scale_shift_frames)

    def get_densify_use_case(self, method: DensifyMethod) -> DensifyUseCase:
        return DensifyUseCase(
            reader=self._reader,
            writer=FileRasterWriter(self._scale),
            densifier=lambda depth: densify(depth, method),
        )
