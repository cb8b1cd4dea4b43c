"""
Sparse Ground-Truth Densification and Sky Masking
"""
from collections.abc import Iterable
from enum import Enum

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.interpolate import LinearNDInterpolator
from scipy.spatial import Delaunay, KDTree, QhullError

from safedepth.domain import DepthMap, DimensionMismatch, SegmentationMask, TooSparse

logger = structlog.get_logger(__name__)


class DensifyMethod(str, Enum):
    """Interpolation used to fill missing ground-truth pixels."""
    NONE = "none"
    NEAREST = "nearest"
    LINEAR = "linear"


def _pixel_coords(mask: NDArray[np.bool_]) -> NDArray[np.float64]:
    rows, cols = np.nonzero(mask)
    return np.column_stack([cols, rows]).astype(np.float64)


def _nearest(
    points: NDArray[np.float64],
    values: NDArray[np.float64],
    queries: NDArray[np.float64],
) -> NDArray[np.float64]:
    _, idx = KDTree(points).query(queries, k=1)
    return values[idx]


def densify(sparse: DepthMap, method: DensifyMethod | str = DensifyMethod.LINEAR) -> DepthMap:
    """
    Fill every invalid pixel of a sparse depth map.

    `nearest` copies the Euclidean-nearest valid pixel. `linear`
    interpolates barycentrically on a Delaunay triangulation of the valid
    pixels and falls back to nearest outside the convex hull or when the
    valid pixels are collinear. Valid input pixels pass through unchanged.

    Raises:
        TooSparse: With fewer than 1 (nearest) or 3 (linear) valid pixels
    """
    method = DensifyMethod(method)
    if method is DensifyMethod.NONE:
        return sparse
    required = 3 if method is DensifyMethod.LINEAR else 1
    if sparse.valid_count < required:
        raise TooSparse(
            f"{method.value} densification needs >= {required} valid pixels, "
            f"got {sparse.valid_count}"
        )
    missing = ~sparse.valid
    if not missing.any():
        return sparse

    points = _pixel_coords(sparse.valid)
    values = sparse.values[sparse.valid]
    queries = _pixel_coords(missing)

    if method is DensifyMethod.LINEAR:
        try:
            interpolator = LinearNDInterpolator(Delaunay(points), values, fill_value=np.nan)
            filled = np.asarray(interpolator(queries), dtype=np.float64)
        except QhullError:
            logger.warning("densify_degenerate_triangulation", valid_pixels=len(points))
            filled = np.full(len(queries), np.nan)
        outside = np.isnan(filled)
        if outside.any():
            filled[outside] = _nearest(points, values, queries[outside])
    else:
        filled = _nearest(points, values, queries)

    out = np.array(sparse.values, copy=True)
    out[missing] = np.maximum(filled, 0.0)
    logger.debug("densified", method=method.value, filled_pixels=int(missing.sum()))
    return DepthMap(values=out, valid=np.ones(sparse.shape, dtype=bool))


def mask_sky(depth: DepthMap, seg: SegmentationMask, sky_ids: Iterable[int]) -> DepthMap:
    """Invalidate every pixel whose label is a sky ID; all else untouched."""
    if depth.shape != seg.shape:
        raise DimensionMismatch(f"depth {depth.shape} and segmentation {seg.shape} differ")
    ids = sorted({int(i) for i in sky_ids})
    if not ids:
        return depth
    return depth.restrict(~np.isin(seg.labels, ids))


class SkyMaskingPreparer:
    """
    Densify the ground truth, then drop sky pixels.

    Densification fills every gap, sky included, so the mask is applied
    afterwards.
    """

    def __init__(
        self,
        sky_classes: Iterable[str] = ("sky",),
        method: DensifyMethod | str = DensifyMethod.LINEAR,
    ) -> None:
        self._sky_classes = tuple(sky_classes)
        self._method = DensifyMethod(method)

    @property
    def method(self) -> DensifyMethod:
        return self._method

    def prepare(self, gt: DepthMap, seg: SegmentationMask) -> DepthMap:
        dense = densify(gt, self._method)
        return mask_sky(dense, seg, seg.ids_named(self._sky_classes))
