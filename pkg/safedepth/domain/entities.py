"""
Domain Entities - Rasters, taxonomies and scores.
Only numpy is allowed here; no IO, no logging.
"""
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from safedepth.domain.errors import (
    DimensionMismatch,
    EmptyGroundTruth,
    UnknownLabel,
    UnknownSuperClass,
    WeightTableError,
)

UNLABELED: Final[int] = int(np.iinfo(np.uint16).max)
NORMALIZED_TOLERANCE: Final[float] = 1e-3
COMBINED_RTOL: Final[float] = 1e-9


class FeatureKind(str, Enum):
    """Which feature extractor produced a map."""
    EDGE = "edge"
    CORNER = "corner"
    UNION = "union"


class CornerMethod(str, Enum):
    """Corner response used by the corner extractor."""
    HARRIS = "harris"
    SHI_TOMASI = "shi_tomasi"


class UnmappedPolicy(str, Enum):
    """What to do with a dataset class that has no super-class."""
    IGNORE = "ignore"
    ERROR = "error"
    ZERO = "zero"


class ClassFlag(str, Enum):
    """Reason a present class did not contribute an error."""
    NO_GT = "no_gt"
    NO_FEATURES = "no_features"


def _readonly(array: ArrayLike, dtype: type | np.dtype) -> NDArray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _check_2d(array: NDArray, name: str) -> None:
    if array.ndim != 2:
        raise ValueError(f"{name} must be a 2D raster, got shape {array.shape}")


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Per-pixel metric distance in meters with a validity mask."""
    values: NDArray[np.float64]
    valid: NDArray[np.bool_]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        valid = np.array(self.valid, dtype=bool, copy=True)
        _check_2d(values, "values")
        if valid.shape != values.shape:
            raise DimensionMismatch(
                f"valid mask {valid.shape} does not match values {values.shape}"
            )
        picked = values[valid]
        if not np.all(np.isfinite(picked)) or np.any(picked < 0):
            raise ValueError("valid depth values must be finite and non-negative")
        values[~valid] = 0.0
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_array(cls, values: ArrayLike, valid: ArrayLike | None = None) -> "DepthMap":
        """
        Build a map from raw meters.

        Without an explicit mask, finite non-negative pixels are valid.
        """
        raw = np.asarray(values, dtype=np.float64)
        if valid is None:
            with np.errstate(invalid="ignore"):
                mask = np.isfinite(raw) & (raw >= 0)
        else:
            mask = np.asarray(valid, dtype=bool)
        return cls(values=np.where(mask, raw, 0.0), valid=mask)

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def valid_count(self) -> int:
        return int(np.count_nonzero(self.valid))

    def restrict(self, keep: NDArray[np.bool_]) -> "DepthMap":
        """Return a copy whose validity is additionally limited to `keep`."""
        return DepthMap(values=self.values, valid=self.valid & keep)


@dataclass(frozen=True, eq=False)
class SegmentationMask:
    """Per-pixel class IDs plus the ID to name table."""
    labels: NDArray[np.uint16]
    id_to_name: Mapping[int, str]

    def __post_init__(self) -> None:
        labels = _readonly(self.labels, np.uint16)
        _check_2d(labels, "labels")
        table = MappingProxyType({int(k): str(v) for k, v in self.id_to_name.items()})
        present = np.unique(labels)
        missing = [int(i) for i in present if int(i) != UNLABELED and int(i) not in table]
        if missing:
            raise UnknownLabel(f"label IDs {missing} are absent from the name table")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "id_to_name", table)

    @classmethod
    def unlabeled(cls, height: int, width: int) -> "SegmentationMask":
        """A mask where every pixel carries the UNLABELED sentinel."""
        return cls(labels=np.full((height, width), UNLABELED, dtype=np.uint16), id_to_name={})

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def ids_named(self, names: Iterable[str]) -> list[int]:
        wanted = set(names)
        return sorted(i for i, n in self.id_to_name.items() if n in wanted)

    def mask_of_names(self, names: Iterable[str]) -> NDArray[np.bool_]:
        return np.isin(self.labels, self.ids_named(names))

    def labeled(self) -> NDArray[np.bool_]:
        return self.labels != UNLABELED

    def class_masks(self, exclude: Iterable[str] = ()) -> dict[str, NDArray[np.bool_]]:
        """
        Pixel masks of the classes present in the image, keyed by name.

        Several IDs sharing a name are merged. Keys are sorted so every
        reduction over them runs in a fixed order.
        """
        skip = set(exclude)
        present = {int(i) for i in np.unique(self.labels)} - {UNLABELED}
        names = sorted({self.id_to_name[i] for i in present} - skip)
        return {name: self.mask_of_names([name]) for name in names}


@dataclass(frozen=True, eq=False)
class RgbImage:
    """Unmasked camera image, H x W x 3 intensities in [0, 255]."""
    pixels: NDArray[np.uint8]

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ValueError(f"RGB image must be H x W x 3, got {pixels.shape}")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise ValueError("RGB intensities must lie in [0, 255]")
        object.__setattr__(self, "pixels", _readonly(pixels, np.uint8))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Binary raster of dilated feature pixels."""
    active: NDArray[np.bool_]
    kind: FeatureKind

    def __post_init__(self) -> None:
        active = _readonly(self.active, bool)
        _check_2d(active, "active")
        object.__setattr__(self, "active", active)

    @classmethod
    def empty(cls, height: int, width: int, kind: FeatureKind = FeatureKind.EDGE) -> "FeatureMap":
        return cls(active=np.zeros((height, width), dtype=bool), kind=kind)

    @classmethod
    def full(cls, height: int, width: int, kind: FeatureKind = FeatureKind.EDGE) -> "FeatureMap":
        return cls(active=np.ones((height, width), dtype=bool), kind=kind)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.active.shape[0]), int(self.active.shape[1]))

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.active))

    def union(self, other: "FeatureMap") -> "FeatureMap":
        if other.shape != self.shape:
            raise DimensionMismatch(f"feature maps {self.shape} and {other.shape} differ")
        return FeatureMap(active=self.active | other.active, kind=FeatureKind.UNION)


@dataclass(frozen=True)
class FeatureParams:
    """Thresholds and support sizes for edge and corner extraction."""
    edge_low: float = 50.0
    edge_high: float = 150.0
    edge_thickness: int = 2
    corner_k: float = 0.04
    corner_rel_threshold: float = 0.01
    corner_radius: int = 3
    window: int = 5
    corner_method: CornerMethod = CornerMethod.HARRIS

    def __post_init__(self) -> None:
        if self.edge_low > self.edge_high:
            raise ValueError(f"edge_low {self.edge_low} exceeds edge_high {self.edge_high}")
        if self.window < 3 or self.window % 2 != 1:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.edge_thickness < 0 or self.corner_radius < 0:
            raise ValueError("edge_thickness and corner_radius must be >= 0")
        if not 0.0 < self.corner_rel_threshold <= 1.0:
            raise ValueError("corner_rel_threshold must lie in (0, 1]")


@dataclass(frozen=True)
class SuperClass:
    """Safety category with its inter-class weight."""
    name: str
    weight: float
    main_class: str | None = None


@dataclass(frozen=True)
class WeightTable:
    """Super-class taxonomy, inter-class weights and dataset-class mapping."""
    super_classes: tuple[SuperClass, ...]
    mapping: Mapping[str, str]
    unmapped_policy: UnmappedPolicy = UnmappedPolicy.IGNORE
    normalized: bool = True

    def __post_init__(self) -> None:
        names = [s.name for s in self.super_classes]
        if len(set(names)) != len(names):
            raise WeightTableError("duplicate super-class names")
        for sc in self.super_classes:
            if not (0.0 <= sc.weight <= 1.0) or math.isnan(sc.weight):
                raise WeightTableError(f"weight of {sc.name!r} must lie in [0, 1], got {sc.weight}")
        known = set(names)
        dangling = sorted({t for t in self.mapping.values() if t not in known})
        if dangling:
            raise WeightTableError(f"mapping targets {dangling} are not declared super-classes")
        if self.normalized and abs(self.total_weight - 1.0) > NORMALIZED_TOLERANCE:
            raise WeightTableError(
                f"normalized table must sum to 1 +- {NORMALIZED_TOLERANCE}, got {self.total_weight}"
            )
        object.__setattr__(self, "mapping", MappingProxyType(dict(self.mapping)))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.super_classes)

    @property
    def total_weight(self) -> float:
        return math.fsum(s.weight for s in self.super_classes)

    def weight(self, name: str) -> float:
        for sc in self.super_classes:
            if sc.name == name:
                return sc.weight
        raise UnknownSuperClass(f"super-class {name!r} is not in the weight table")

    def super_class_of(self, class_name: str) -> str | None:
        return self.mapping.get(class_name)

    def main_class_totals(self) -> dict[str, float]:
        """Sum of weights per main class; super-classes without one are skipped."""
        groups: dict[str, list[float]] = {}
        for sc in self.super_classes:
            if sc.main_class is not None:
                groups.setdefault(sc.main_class, []).append(sc.weight)
        return {name: math.fsum(ws) for name, ws in groups.items()}


@dataclass(frozen=True)
class ClassSceneStats:
    """Distance statistics of one class in one image."""
    class_name: str
    d_class_min: float
    d_class: float
    w_dist: float
    pixel_count: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.w_dist <= 1.0:
            raise ValueError(f"w_dist must lie in [0, 1], got {self.w_dist}")
        if self.d_class_min < 0 or self.d_class < 0:
            raise ValueError("class distances must be non-negative")


@dataclass(frozen=True)
class ClassScore:
    """Error of one dataset class inside a component."""
    class_name: str
    super_class: str
    w_dist: float
    mae: float | None
    pixel_count: int
    weighted_error: float
    flag: ClassFlag | None = None


@dataclass(frozen=True)
class SuperClassScore:
    """Contribution of one super-class to a component."""
    name: str
    w_class: float
    contribution: float
    raw_mae: float | None
    w_dist: float
    pixel_count: int
    members: tuple[ClassScore, ...] = ()


@dataclass(frozen=True)
class ComponentResult:
    """Total and breakdown of a class-weighted component."""
    total: float
    per_super_class: Mapping[str, SuperClassScore]
    unmapped: tuple[str, ...] = ()
    dropped_pixels: int = 0


@dataclass(frozen=True)
class ComponentScores:
    """All scores of one prediction against one ground truth."""
    e_class: float
    e_feature: float
    e_global: float
    gamma: float
    combined: float
    per_class: Mapping[str, SuperClassScore] = field(default_factory=dict)
    per_class_feature: Mapping[str, SuperClassScore] = field(default_factory=dict)
    classical: Mapping[str, float | None] = field(default_factory=dict)
    pixel_count: int = 0

    def __post_init__(self) -> None:
        for name in ("e_class", "e_feature", "e_global", "combined"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        expected = self.gamma * (self.e_class + self.e_feature + self.e_global)
        if not math.isclose(self.combined, expected, rel_tol=COMBINED_RTOL, abs_tol=0.0):
            raise ValueError(f"combined {self.combined} != gamma * sum {expected}")

    @classmethod
    def combine(
        cls,
        e_class: float,
        e_feature: float,
        e_global: float,
        gamma: float = 1.0,
        **details: object,
    ) -> "ComponentScores":
        """Apply L = gamma * (E_class + E_feature + E_global)."""
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        combined = gamma * (e_class + e_feature + e_global)
        return cls(
            e_class=e_class,
            e_feature=e_feature,
            e_global=e_global,
            gamma=gamma,
            combined=combined,
            **details,  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class AffineFit:
    """Least-squares scale and shift mapping affine-invariant depth to meters."""
    scale: float
    shift: float
    residual_rmse: float
    sample_count: int

    def __post_init__(self) -> None:
        if self.sample_count < 2:
            raise ValueError(f"an affine fit needs >= 2 samples, got {self.sample_count}")
        if self.residual_rmse < 0:
            raise ValueError("residual_rmse must be non-negative")

    @classmethod
    def identity(cls) -> "AffineFit":
        return cls(scale=1.0, shift=0.0, residual_rmse=0.0, sample_count=2)


@dataclass(frozen=True)
class DatasetCatalogEntry:
    """One training dataset: frame count and scenario classes."""
    name: str
    frame_count: int
    classes: frozenset[str]

    def __post_init__(self) -> None:
        if self.frame_count < 0:
            raise ValueError(f"frame_count of {self.name!r} must be >= 0")
        if not self.classes:
            raise ValueError(f"dataset {self.name!r} needs at least one class")
        object.__setattr__(self, "classes", frozenset(self.classes))


@dataclass(frozen=True, eq=False)
class SceneSample:
    """One evaluation unit: image, ground truth, labels and model predictions."""
    id: str
    gt: DepthMap
    seg: SegmentationMask
    pred: Mapping[str, DepthMap]
    rgb: RgbImage | None = None

    def __post_init__(self) -> None:
        shape = self.gt.shape
        rasters: list[tuple[str, tuple[int, int]]] = [("seg", self.seg.shape)]
        rasters += [(f"pred[{m}]", p.shape) for m, p in self.pred.items()]
        if self.rgb is not None:
            rasters.append(("rgb", self.rgb.shape))
        for name, other in rasters:
            if other != shape:
                raise DimensionMismatch(f"{self.id}: {name} {other} does not match gt {shape}")
        object.__setattr__(self, "pred", MappingProxyType(dict(self.pred)))


@dataclass(frozen=True, eq=False)
class ValidatedTriple:
    """Prediction, ground truth and labels known to be mutually consistent."""
    pred: DepthMap
    gt: DepthMap
    seg: SegmentationMask
    domain: NDArray[np.bool_]

    @property
    def pixel_count(self) -> int:
        return int(np.count_nonzero(self.domain))


def validate_pair(
    pred: DepthMap,
    gt: DepthMap,
    seg: SegmentationMask | None = None,
) -> ValidatedTriple:
    """
    Check that a prediction, ground truth and optional mask can be compared.

    The comparison domain is the set of pixels valid in both depth maps.
    A missing mask is replaced by an all-UNLABELED one.

    Raises:
        DimensionMismatch: If any raster size differs
        EmptyGroundTruth: If the ground truth has no valid pixel
    """
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"prediction {pred.shape} does not match ground truth {gt.shape}")
    if seg is None:
        seg = SegmentationMask.unlabeled(*gt.shape)
    elif seg.shape != gt.shape:
        raise DimensionMismatch(f"segmentation {seg.shape} does not match ground truth {gt.shape}")
    if not gt.valid.any():
        raise EmptyGroundTruth("ground truth has no valid pixel")
    domain = pred.valid & gt.valid
    domain.setflags(write=False)
    return ValidatedTriple(pred=pred, gt=gt, seg=seg, domain=domain)
