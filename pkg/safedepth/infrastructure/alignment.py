"""
Affine Alignment - Scale/shift regression of affine-invariant depth onto meters.
"""
from collections.abc import Mapping, Sequence

import numpy as np
import structlog

from safedepth.domain import AffineFit, DegenerateFit, DepthMap, DimensionMismatch

logger = structlog.get_logger(__name__)


def _lstsq(x: np.ndarray, y: np.ndarray) -> AffineFit:
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateFit(
            f"need >= 2 pixels with distinct predictions, got {x.size} pixel(s)"
        )
    design = np.column_stack([x, np.ones_like(x)])
    (scale, shift), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - (scale * x + shift)
    return AffineFit(
        scale=float(scale),
        shift=float(shift),
        residual_rmse=float(np.sqrt(np.mean(residual**2))),
        sample_count=int(x.size),
    )


def fit_scale_shift(affine_pred: DepthMap, metric_gt: DepthMap) -> AffineFit:
    """
    Least-squares fit of gt = scale * pred + shift over the comparison domain.

    Raises:
        DegenerateFit: With fewer than 2 pixels or a constant prediction
    """
    return fit_scale_shift_frames([(affine_pred, metric_gt)])


def fit_scale_shift_frames(pairs: Sequence[tuple[DepthMap, DepthMap]]) -> AffineFit:
    """Pool the comparison-domain pixels of several frames into one fit."""
    xs, ys = [], []
    for pred, gt in pairs:
        if pred.shape != gt.shape:
            raise DimensionMismatch(
                f"prediction {pred.shape} does not match ground truth {gt.shape}"
            )
        mask = pred.valid & gt.valid
        xs.append(pred.values[mask])
        ys.append(gt.values[mask])
    if not xs:
        raise DegenerateFit("no frame given")
    fit = _lstsq(np.concatenate(xs), np.concatenate(ys))
    logger.info(
        "affine_fit",
        frames=len(pairs),
        scale=fit.scale,
        shift=fit.shift,
        residual_rmse=fit.residual_rmse,
    )
    return fit


def apply_affine(depth: DepthMap, fit: AffineFit) -> tuple[DepthMap, int]:
    """
    Map depth through value' = scale * value + shift.

    Returns:
        Aligned map and the number of valid pixels clamped from negative to 0
    """
    mapped = fit.scale * depth.values + fit.shift
    negative = depth.valid & (mapped < 0)
    clamped = int(np.count_nonzero(negative))
    if clamped:
        logger.warning("affine_clamped_negative", pixels=clamped)
    return DepthMap(values=np.where(negative, 0.0, mapped), valid=depth.valid), clamped


class AffineAligner:
    """
    Applies a fixed scale/shift per model; models without one pass through.
    """

    def __init__(self, fits: Mapping[str, AffineFit] | None = None) -> None:
        self._fits = dict(fits or {})

    def align(self, model: str, pred: DepthMap) -> tuple[DepthMap, int]:
        fit = self._fits.get(model)
        if fit is None:
            return pred, 0
        return apply_affine(pred, fit)
