"""Domain layer package."""
from safedepth.domain.entities import (
    UNLABELED,
    AffineFit,
    ClassFlag,
    ClassScore,
    ClassSceneStats,
    ComponentResult,
    ComponentScores,
    CornerMethod,
    DatasetCatalogEntry,
    DepthMap,
    FeatureKind,
    FeatureMap,
    FeatureParams,
    RgbImage,
    SceneSample,
    SegmentationMask,
    SuperClass,
    SuperClassScore,
    UnmappedPolicy,
    ValidatedTriple,
    WeightTable,
    validate_pair,
)
from safedepth.domain.errors import (
    BadFormat,
    DegenerateFit,
    DegenerateImage,
    DimensionMismatch,
    EmptyCatalog,
    EmptyDataset,
    EmptyDomain,
    EmptyGroundTruth,
    IoError,
    MissingPrediction,
    NoLabeledPixels,
    SafeDepthError,
    TooSparse,
    UnknownDatasetClass,
    UnknownLabel,
    UnknownModel,
    UnknownSuperClass,
    UnmappedClass,
    WeightTableError,
    ZeroTotal,
)
from safedepth.domain.protocols import (
    FeatureExtractor,
    GroundTruthPreparer,
    PredictionAligner,
    RasterReader,
    RasterWriter,
    SampleSource,
)

__all__ = [
    "UNLABELED",
    "AffineFit",
    "ClassFlag",
    "ClassScore",
    "ClassSceneStats",
    "ComponentResult",
    "ComponentScores",
    "CornerMethod",
    "DatasetCatalogEntry",
    "DepthMap",
    "FeatureKind",
    "FeatureMap",
    "FeatureParams",
    "RgbImage",
    "SceneSample",
    "SegmentationMask",
    "SuperClass",
    "SuperClassScore",
    "UnmappedPolicy",
    "ValidatedTriple",
    "WeightTable",
    "validate_pair",
    "BadFormat",
    "DegenerateFit",
    "DegenerateImage",
    "DimensionMismatch",
    "EmptyCatalog",
    "EmptyDataset",
    "EmptyDomain",
    "EmptyGroundTruth",
    "IoError",
    "MissingPrediction",
    "NoLabeledPixels",
    "SafeDepthError",
    "TooSparse",
    "UnknownDatasetClass",
    "UnknownLabel",
    "UnknownModel",
    "UnknownSuperClass",
    "UnmappedClass",
    "WeightTableError",
    "ZeroTotal",
    "FeatureExtractor",
    "GroundTruthPreparer",
    "PredictionAligner",
    "RasterReader",
    "RasterWriter",
    "SampleSource",
]
