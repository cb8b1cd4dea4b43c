"""
Local Feature Component
Class-weighted error restricted to edge/corner pixels (E_feature).
"""
from collections.abc import Collection, Mapping
from dataclasses import replace

import numpy as np
import structlog

from safedepth.application.class_metric import (
    SKY_CLASSES,
    intra_class_weights,
    weighted_component,
)
from safedepth.domain import (
    ClassSceneStats,
    ComponentResult,
    DepthMap,
    DimensionMismatch,
    FeatureMap,
    SegmentationMask,
    WeightTable,
    validate_pair,
)

logger = structlog.get_logger(__name__)


def feature_component(
    pred: DepthMap,
    gt: DepthMap,
    seg: SegmentationMask,
    features: FeatureMap,
    weights: WeightTable,
    focus: Collection[str] | None = None,
    *,
    stats: Mapping[str, ClassSceneStats] | None = None,
    renormalize_present: bool = False,
    exclude: Collection[str] = SKY_CLASSES,
) -> ComponentResult:
    """
    Feature-restricted class error E_feature.

    Each class's pixels are intersected with the active feature pixels and
    the valid ground truth before the MAE; w_dist still comes from the
    whole class. Feature pixels on labeled classes without valid ground
    truth are dropped and counted in `dropped_pixels`.

    Args:
        features: Map computed on the unmasked camera image
        stats: Precomputed intra-class weights, reused from E_class

    Raises:
        DimensionMismatch: If the feature map size differs from the depth maps
        NoLabeledPixels: If no labeled class has valid ground truth
    """
    triple = validate_pair(pred, gt, seg)
    if features.shape != gt.shape:
        raise DimensionMismatch(f"feature map {features.shape} does not match {gt.shape}")
    if stats is None:
        stats = intra_class_weights(gt, triple.seg, exclude=exclude)

    result = weighted_component(
        triple,
        weights,
        stats,
        pixel_filter=features.active,
        focus=focus,
        renormalize_present=renormalize_present,
        exclude=exclude,
    )
    scored = triple.seg.labeled() & ~triple.seg.mask_of_names(exclude)
    dropped = int(np.count_nonzero(features.active & scored & ~gt.valid))
    logger.debug(
        "feature_component",
        e_feature=result.total,
        active_pixels=features.active_count,
        dropped_pixels=dropped,
    )
    return replace(result, dropped_pixels=dropped)
