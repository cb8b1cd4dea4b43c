"""
Tests for the feature-restricted component.
"""
import numpy as np
import pytest

from safedepth.application import class_component, feature_component
from safedepth.domain import (
    DepthMap,
    DimensionMismatch,
    FeatureKind,
    FeatureMap,
    SegmentationMask,
    SuperClass,
    WeightTable,
)
from safedepth.infrastructure import builtin_gidas_table


def test_empty_feature_map_gives_zero(three_class_scene, three_class_weights):
    """Test that no active pixel means no feature error."""
    s = three_class_scene
    features = FeatureMap.empty(*s.gt.shape)
    result = feature_component(s.pred["model"], s.gt, s.seg, features, three_class_weights)
    assert result.total == 0.0


def test_identity_gives_zero_for_any_map(three_class_scene, three_class_weights):
    """Test e_feature(gt, gt) == 0."""
    s = three_class_scene
    rng = np.random.default_rng(3)
    features = FeatureMap(active=rng.random(s.gt.shape) < 0.5, kind=FeatureKind.EDGE)
    assert feature_component(s.gt, s.gt, s.seg, features, three_class_weights).total == 0.0


def test_full_feature_map_equals_class_component():
    """Test that an all-true map reduces E_feature to E_class exactly on random scenes."""
    rng = np.random.default_rng(11)
    names = {1: "car", 2: "person", 3: "pole", 4: "asphalt", 5: "sky"}
    weights = builtin_gidas_table()
    for _ in range(20):
        labels = rng.integers(1, 6, size=(12, 12)).astype(np.uint16)
        gt = DepthMap.from_array(rng.uniform(1.0, 60.0, size=(12, 12)))
        pred = DepthMap.from_array(rng.uniform(1.0, 60.0, size=(12, 12)))
        seg = SegmentationMask(labels=labels, id_to_name=names)
        full = FeatureMap.full(12, 12)
        e_feature = feature_component(pred, gt, seg, full, weights)
        e_class = class_component(pred, gt, seg, weights)
        assert e_feature.total == e_class.total


def test_error_confined_to_contour_pixels():
    """Test that a 5 m error on contour pixels scores 0.5 * 5 inside the features."""
    h, w = 10, 10
    labels = np.ones((h, w), dtype=np.uint16)
    gt = np.full((h, w), 20.0)
    ring = np.zeros((h, w), dtype=bool)
    ring[2:8, 2:8] = True
    ring[3:7, 3:7] = False
    pred = np.where(ring, gt + 5.0, gt)

    weights = WeightTable(
        super_classes=(SuperClass("SA", 0.5), SuperClass("SB", 0.5)),
        mapping={"a": "SA"},
    )
    seg = SegmentationMask(labels=labels, id_to_name={1: "a"})
    features = FeatureMap(active=ring, kind=FeatureKind.EDGE)
    p, g = DepthMap.from_array(pred), DepthMap.from_array(gt)

    e_feature = feature_component(p, g, seg, features, weights)
    e_class = class_component(p, g, seg, weights)
    assert e_feature.total == pytest.approx(2.5)
    assert e_class.total == pytest.approx(0.5 * 5.0 * ring.sum() / (h * w))


def test_feature_pixels_without_ground_truth_are_counted():
    """Test the dropped-pixel counter for features on labeled pixels lacking ground truth."""
    labels = np.ones((2, 3), dtype=np.uint16)
    gt = DepthMap.from_array([[5.0, np.nan, 5.0], [5.0, 5.0, np.nan]])
    pred = DepthMap.from_array(np.full((2, 3), 6.0))
    seg = SegmentationMask(labels=labels, id_to_name={1: "a"})
    weights = WeightTable(super_classes=(SuperClass("SA", 1.0),), mapping={"a": "SA"})
    result = feature_component(pred, gt, seg, FeatureMap.full(2, 3), weights)
    assert result.dropped_pixels == 2
    assert result.total == pytest.approx(1.0)


def test_class_outside_features_is_flagged(three_class_scene, three_class_weights):
    """Test that a class with no feature pixel is flagged and contributes 0."""
    s = three_class_scene
    active = np.zeros(s.gt.shape, dtype=bool)
    active[0:2] = True
    features = FeatureMap(active=active, kind=FeatureKind.EDGE)
    result = feature_component(s.pred["model"], s.gt, s.seg, features, three_class_weights)
    assert result.total == pytest.approx(0.5)
    member = result.per_super_class["SB"].members[0]
    assert member.mae is None
    assert member.flag is not None


def test_feature_map_size_mismatch(three_class_scene, three_class_weights):
    """Test that the feature map must match the depth maps."""
    s = three_class_scene
    with pytest.raises(DimensionMismatch):
        feature_component(
            s.pred["model"], s.gt, s.seg, FeatureMap.empty(3, 3), three_class_weights
        )
