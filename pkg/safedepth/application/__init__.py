"""Application layer package."""
from safedepth.application.class_metric import (
    SKY_CLASSES,
    UNMAPPED_GROUP,
    class_component,
    intra_class_weights,
    weighted_component,
)
from safedepth.application.classical_metrics import (
    METRIC_NAMES,
    ClassicalSuite,
    classical_suite,
    comparison_domain,
)
from safedepth.application.dataset_analysis import (
    CLASS_HIERARCHY,
    class_share,
    frames_per_class,
    merge_frames,
    model_distributions,
    roll_up_high_level,
)
from safedepth.application.feature_metric import feature_component
from safedepth.application.use_cases import (
    DIVERGENCE_RULE,
    AffineFitResult,
    Aggregation,
    AnalyzeDatasetsUseCase,
    DatasetComposition,
    DatasetEvaluation,
    DensifyOutcome,
    DensifyUseCase,
    EvaluateDatasetUseCase,
    EvaluateSampleUseCase,
    EvaluationOptions,
    FitAffineUseCase,
    ModelSummary,
    RankedScene,
    RankScenesUseCase,
    SampleEvaluation,
    SampleFailure,
    SceneScore,
    aggregate_components,
)

__all__ = [
    "SKY_CLASSES",
    "UNMAPPED_GROUP",
    "class_component",
    "intra_class_weights",
    "weighted_component",
    "METRIC_NAMES",
    "ClassicalSuite",
    "classical_suite",
    "comparison_domain",
    "CLASS_HIERARCHY",
    "class_share",
    "frames_per_class",
    "merge_frames",
    "model_distributions",
    "roll_up_high_level",
    "feature_component",
    "DIVERGENCE_RULE",
    "AffineFitResult",
    "Aggregation",
    "AnalyzeDatasetsUseCase",
    "DatasetComposition",
    "DatasetEvaluation",
    "DensifyOutcome",
    "DensifyUseCase",
    "EvaluateDatasetUseCase",
    "EvaluateSampleUseCase",
    "EvaluationOptions",
    "FitAffineUseCase",
    "ModelSummary",
    "RankedScene",
    "RankScenesUseCase",
    "SampleEvaluation",
    "SampleFailure",
    "SceneScore",
    "aggregate_components",
]
