"""
Class-Based Component
Distance-driven intra-class weights, safety-driven inter-class weights and
the class-weighted error E_class.
"""
import math
from collections.abc import Collection, Mapping
from typing import Final

import numpy as np
import structlog
from numpy.typing import NDArray

from safedepth.domain import (
    ClassFlag,
    ClassScore,
    ClassSceneStats,
    ComponentResult,
    DepthMap,
    NoLabeledPixels,
    SegmentationMask,
    SuperClassScore,
    UnknownSuperClass,
    UnmappedClass,
    UnmappedPolicy,
    ValidatedTriple,
    WeightTable,
    validate_pair,
)

logger = structlog.get_logger(__name__)

SKY_CLASSES: Final[tuple[str, ...]] = ("sky",)
UNMAPPED_GROUP: Final[str] = "(unmapped)"


def intra_class_weights(
    gt: DepthMap,
    seg: SegmentationMask,
    *,
    exclude: Collection[str] = SKY_CLASSES,
) -> dict[str, ClassSceneStats]:
    """
    Distance-based weight of every class present in the image.

    d_class = d_scene_max - d_class_min, then min-max normalized over all
    classes of the image. Both distances come from ground truth only, so a
    model's range limit cannot move the weights.

    Args:
        gt: Ground-truth depth
        seg: Segmentation of the same image
        exclude: Class names left out entirely (sky by default)

    Returns:
        Stats per class name, in sorted name order

    Raises:
        NoLabeledPixels: If no class has a valid ground-truth pixel
    """
    if gt.shape != seg.shape:
        raise ValueError(f"ground truth {gt.shape} and segmentation {seg.shape} differ")
    masks = seg.class_masks(exclude=exclude)
    excluded = seg.mask_of_names(exclude)

    scene = gt.valid & ~excluded
    minima: dict[str, tuple[float, int]] = {}
    for name, mask in masks.items():
        pixels = mask & gt.valid
        count = int(np.count_nonzero(pixels))
        if count:
            minima[name] = (float(gt.values[pixels].min()), count)
    if not minima:
        raise NoLabeledPixels("no labeled class has valid ground truth")

    d_scene_max = float(gt.values[scene].max())
    d_class = {name: d_scene_max - d_min for name, (d_min, _) in minima.items()}
    lo, hi = min(d_class.values()), max(d_class.values())

    stats: dict[str, ClassSceneStats] = {}
    for name, (d_min, count) in minima.items():
        if hi == lo:
            w_dist = 1.0
        else:
            w_dist = min(max((d_class[name] - lo) / (hi - lo), 0.0), 1.0)
        stats[name] = ClassSceneStats(
            class_name=name,
            d_class_min=d_min,
            d_class=d_class[name],
            w_dist=w_dist,
            pixel_count=count,
        )
    return stats


def _effective_weights(
    weights: WeightTable,
    present: Collection[str],
    focus: Collection[str] | None,
    renormalize_present: bool,
) -> dict[str, float]:
    if focus:
        unknown = sorted(set(focus) - set(weights.names))
        if unknown:
            raise UnknownSuperClass(f"focus super-classes {unknown} are not in the weight table")
        chosen = [n for n in weights.names if n in set(focus)]
    elif renormalize_present:
        chosen = [n for n in weights.names if n in set(present)]
    else:
        return {n: weights.weight(n) for n in weights.names}

    total = math.fsum(weights.weight(n) for n in chosen)
    if total > 0:
        return {n: weights.weight(n) / total for n in chosen}
    return {n: 1.0 / len(chosen) for n in chosen} if chosen else {}


def weighted_component(
    triple: ValidatedTriple,
    weights: WeightTable,
    stats: Mapping[str, ClassSceneStats],
    *,
    pixel_filter: NDArray[np.bool_] | None = None,
    focus: Collection[str] | None = None,
    renormalize_present: bool = False,
    exclude: Collection[str] = SKY_CLASSES,
) -> ComponentResult:
    """
    Sum over super-classes of w_class * sum(w_dist * MAE) of their members.

    `pixel_filter` narrows every class's pixel set (the feature map for
    E_feature); without it the whole class is scored.
    """
    pred, gt = triple.pred, triple.gt
    domain = triple.domain if pixel_filter is None else triple.domain & pixel_filter
    empty_flag = ClassFlag.NO_GT if pixel_filter is None else ClassFlag.NO_FEATURES

    members: dict[str, list[ClassScore]] = {}
    member_pixels: dict[str, NDArray[np.bool_]] = {}
    unmapped: list[str] = []

    for name, mask in triple.seg.class_masks(exclude=exclude).items():
        group = weights.super_class_of(name)
        if group is None:
            if weights.unmapped_policy is UnmappedPolicy.ERROR:
                raise UnmappedClass(f"class {name!r} has no super-class")
            unmapped.append(name)
            if weights.unmapped_policy is UnmappedPolicy.IGNORE:
                continue
            group = UNMAPPED_GROUP

        class_stats = stats.get(name)
        if class_stats is None:
            score = ClassScore(name, group, 0.0, None, 0, 0.0, ClassFlag.NO_GT)
        else:
            pixels = mask & domain
            count = int(np.count_nonzero(pixels))
            if count == 0:
                score = ClassScore(name, group, class_stats.w_dist, None, 0, 0.0, empty_flag)
            else:
                err = float(np.mean(np.abs(pred.values[pixels] - gt.values[pixels])))
                score = ClassScore(
                    class_name=name,
                    super_class=group,
                    w_dist=class_stats.w_dist,
                    mae=err,
                    pixel_count=count,
                    weighted_error=class_stats.w_dist * err,
                )
                previous = member_pixels.get(group)
                member_pixels[group] = pixels if previous is None else previous | pixels
        members.setdefault(group, []).append(score)

    present = [g for g in members if g != UNMAPPED_GROUP]
    w_eff = _effective_weights(weights, present, focus, renormalize_present)

    breakdown: dict[str, SuperClassScore] = {}
    for group in sorted(members):
        if group != UNMAPPED_GROUP and group not in w_eff:
            continue
        w_class = w_eff.get(group, 0.0)
        scores = members[group]
        pixels = member_pixels.get(group)
        raw = (
            float(np.mean(np.abs(pred.values[pixels] - gt.values[pixels])))
            if pixels is not None
            else None
        )
        breakdown[group] = SuperClassScore(
            name=group,
            w_class=w_class,
            contribution=w_class * math.fsum(s.weighted_error for s in scores),
            raw_mae=raw,
            w_dist=max(s.w_dist for s in scores),
            pixel_count=sum(s.pixel_count for s in scores),
            members=tuple(scores),
        )

    total = math.fsum(s.contribution for s in breakdown.values())
    return ComponentResult(total=total, per_super_class=breakdown, unmapped=tuple(unmapped))


def class_component(
    pred: DepthMap,
    gt: DepthMap,
    seg: SegmentationMask,
    weights: WeightTable,
    focus: Collection[str] | None = None,
    *,
    renormalize_present: bool = False,
    exclude: Collection[str] = SKY_CLASSES,
) -> ComponentResult:
    """
    Class-weighted error E_class.

    With `focus`, only the named super-classes are scored and their w_class
    is renormalized to sum to 1 (single-class evaluation mode).

    Raises:
        NoLabeledPixels: If no labeled class has valid ground truth
        UnmappedClass: If a class is unmapped and the table's policy is error
        UnknownSuperClass: If a focus name is not in the table
    """
    triple = validate_pair(pred, gt, seg)
    stats = intra_class_weights(gt, triple.seg, exclude=exclude)
    result = weighted_component(
        triple,
        weights,
        stats,
        focus=focus,
        renormalize_present=renormalize_present,
        exclude=exclude,
    )
    logger.debug("class_component", e_class=result.total, classes=len(stats))
    return result
