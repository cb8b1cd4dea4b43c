"""
Classical Depth Metrics
The standard error suite, reported next to the class-aware score.

Every metric reduces over the comparison domain: pixels valid in both maps
and, when given, inside the extra `domain` mask. Ratio metrics drop pixels
with non-positive ground truth; log metrics and delta also drop
non-positive predictions.
"""
from dataclasses import dataclass
from typing import Final

import numpy as np
from numpy.typing import NDArray

from safedepth.domain import DepthMap, DimensionMismatch, EmptyDomain

DELTA_BASE: Final[float] = 1.25
METRIC_NAMES: Final[tuple[str, ...]] = (
    "mae",
    "rmse",
    "abs_rel",
    "rel_sq",
    "log_rmse",
    "log10",
    "silog",
    "delta_1",
    "delta_2",
    "delta_3",
)


def comparison_domain(
    pred: DepthMap,
    gt: DepthMap,
    domain: NDArray[np.bool_] | None = None,
) -> NDArray[np.bool_]:
    """Pixels valid in both maps, optionally intersected with `domain`."""
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"prediction {pred.shape} does not match ground truth {gt.shape}")
    mask = pred.valid & gt.valid
    if domain is not None:
        if domain.shape != gt.shape:
            raise DimensionMismatch(f"domain {domain.shape} does not match ground truth {gt.shape}")
        mask = mask & domain
    return mask


def _pixels(
    pred: DepthMap,
    gt: DepthMap,
    domain: NDArray[np.bool_] | None,
    *,
    positive_gt: bool = False,
    positive_pred: bool = False,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    mask = comparison_domain(pred, gt, domain)
    if positive_gt:
        mask = mask & (gt.values > 0)
    if positive_pred:
        mask = mask & (pred.values > 0)
    if not mask.any():
        raise EmptyDomain("no pixel left in the comparison domain")
    return pred.values[mask], gt.values[mask]


def mae(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """Mean absolute error in meters."""
    x, y = _pixels(pred, gt, domain)
    return float(np.mean(np.abs(x - y)))


def rmse(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """Root mean squared error in meters."""
    x, y = _pixels(pred, gt, domain)
    return float(np.sqrt(np.mean((x - y) ** 2)))


def abs_rel(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """Mean of |x - y| / y."""
    x, y = _pixels(pred, gt, domain, positive_gt=True)
    return float(np.mean(np.abs(x - y) / y))


def rel_sq(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """Mean of (x - y)^2 / y."""
    x, y = _pixels(pred, gt, domain, positive_gt=True)
    return float(np.mean((x - y) ** 2 / y))


def log_rmse(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """RMSE of natural-log depths."""
    x, y = _pixels(pred, gt, domain, positive_gt=True, positive_pred=True)
    return float(np.sqrt(np.mean((np.log(x) - np.log(y)) ** 2)))


def log10_err(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """Mean absolute log10 difference."""
    x, y = _pixels(pred, gt, domain, positive_gt=True, positive_pred=True)
    return float(np.mean(np.abs(np.log10(x) - np.log10(y))))


def silog(pred: DepthMap, gt: DepthMap, domain: NDArray[np.bool_] | None = None) -> float:
    """Scale-invariant log error sqrt(mean(d^2) - mean(d)^2), d = ln x - ln y."""
    x, y = _pixels(pred, gt, domain, positive_gt=True, positive_pred=True)
    d = np.log(x) - np.log(y)
    variance = float(np.mean(d**2) - np.mean(d) ** 2)
    return float(np.sqrt(max(variance, 0.0)))


def delta_k(
    pred: DepthMap,
    gt: DepthMap,
    domain: NDArray[np.bool_] | None = None,
    k: int = 1,
) -> float:
    """Fraction of pixels with max(x/y, y/x) < 1.25^k."""
    if k not in (1, 2, 3):
        raise ValueError(f"k must be 1, 2 or 3, got {k}")
    x, y = _pixels(pred, gt, domain, positive_gt=True, positive_pred=True)
    ratio = np.maximum(x / y, y / x)
    return float(np.mean(ratio < DELTA_BASE**k))


@dataclass(frozen=True)
class ClassicalSuite:
    """All classical metrics of one image with their exclusion counts."""
    values: dict[str, float | None]
    excluded: dict[str, int]
    pixel_count: int


def classical_suite(
    pred: DepthMap,
    gt: DepthMap,
    domain: NDArray[np.bool_] | None = None,
) -> ClassicalSuite:
    """
    Compute every classical metric over the same domain.

    A metric whose domain is empty after its positivity filter is reported
    as None instead of failing the whole suite.
    """
    base = comparison_domain(pred, gt, domain)
    total = int(np.count_nonzero(base))
    if total == 0:
        raise EmptyDomain("no pixel left in the comparison domain")

    gt_pos = int(np.count_nonzero(base & (gt.values > 0)))
    both_pos = int(np.count_nonzero(base & (gt.values > 0) & (pred.values > 0)))

    funcs = {
        "mae": (mae, 0),
        "rmse": (rmse, 0),
        "abs_rel": (abs_rel, total - gt_pos),
        "rel_sq": (rel_sq, total - gt_pos),
        "log_rmse": (log_rmse, total - both_pos),
        "log10": (log10_err, total - both_pos),
        "silog": (silog, total - both_pos),
    }
    values: dict[str, float | None] = {}
    excluded: dict[str, int] = {}
    for name, (func, dropped) in funcs.items():
        excluded[name] = dropped
        try:
            values[name] = func(pred, gt, base)
        except EmptyDomain:
            values[name] = None
    for k in (1, 2, 3):
        name = f"delta_{k}"
        excluded[name] = total - both_pos
        try:
            values[name] = delta_k(pred, gt, base, k=k)
        except EmptyDomain:
            values[name] = None
    return ClassicalSuite(values=values, excluded=excluded, pixel_count=total)
