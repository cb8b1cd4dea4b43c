"""
Classical metrics against a naive per-pixel loop.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from safedepth.application import METRIC_NAMES, classical_suite, comparison_domain
from safedepth.application.classical_metrics import delta_k, mae, rmse, silog
from safedepth.domain import DepthMap, DimensionMismatch, EmptyDomain


def naive_metrics(pred: np.ndarray, gt: np.ndarray) -> dict[str, float]:
    """Every metric computed with explicit loops over positive pixel pairs."""
    pairs = []
    for r in range(gt.shape[0]):
        for c in range(gt.shape[1]):
            pairs.append((float(pred[r, c]), float(gt[r, c])))
    n = len(pairs)
    abs_err = sum(abs(x - y) for x, y in pairs) / n
    sq_err = sum((x - y) ** 2 for x, y in pairs) / n
    logs = [math.log(x) - math.log(y) for x, y in pairs]
    mean_log = sum(logs) / n
    out = {
        "mae": abs_err,
        "rmse": math.sqrt(sq_err),
        "abs_rel": sum(abs(x - y) / y for x, y in pairs) / n,
        "rel_sq": sum((x - y) ** 2 / y for x, y in pairs) / n,
        "log_rmse": math.sqrt(sum(d * d for d in logs) / n),
        "log10": sum(abs(math.log10(x) - math.log10(y)) for x, y in pairs) / n,
        "silog": math.sqrt(sum(d * d for d in logs) / n - mean_log**2),
    }
    for k in (1, 2, 3):
        hits = sum(1 for x, y in pairs if max(x / y, y / x) < 1.25**k)
        out[f"delta_{k}"] = hits / n
    return out


def test_suite_matches_naive_loop_on_random_pairs():
    """Test every metric on 100 random 16x16 pairs at 1e-10 relative tolerance."""
    rng = np.random.default_rng(7)
    for _ in range(100):
        gt = rng.uniform(0.5, 80.0, size=(16, 16))
        pred = gt * rng.uniform(0.6, 1.6, size=(16, 16))
        suite = classical_suite(DepthMap.from_array(pred), DepthMap.from_array(gt))
        expected = naive_metrics(pred, gt)
        assert set(suite.values) == set(METRIC_NAMES)
        for name in METRIC_NAMES:
            assert suite.values[name] == pytest.approx(expected[name], rel=1e-10, abs=0.0)
        assert suite.pixel_count == 256
        assert all(count == 0 for count in suite.excluded.values())


def test_identity_gives_zero_errors_and_full_delta():
    """Test pred == gt."""
    gt = DepthMap.from_array(np.linspace(1.0, 20.0, 64).reshape(8, 8))
    suite = classical_suite(gt, gt)
    for name in ("mae", "rmse", "abs_rel", "rel_sq", "log_rmse", "log10", "silog"):
        assert suite.values[name] == 0.0
    assert suite.values["delta_1"] == 1.0


def test_constant_offset():
    """Test MAE and RMSE of a uniform +2 m offset."""
    gt = DepthMap.from_array(np.full((4, 4), 10.0))
    pred = DepthMap.from_array(np.full((4, 4), 12.0))
    assert mae(pred, gt) == pytest.approx(2.0)
    assert rmse(pred, gt) == pytest.approx(2.0)


def test_silog_is_scale_invariant():
    """Test that a global scale factor leaves silog at 0."""
    gt = DepthMap.from_array(np.linspace(1.0, 9.0, 16).reshape(4, 4))
    pred = DepthMap.from_array(np.asarray(gt.values) * 3.0)
    assert silog(pred, gt) == pytest.approx(0.0, abs=1e-6)


def test_invalid_pixels_are_skipped():
    """Test that only pixels valid in both maps are reduced."""
    gt = DepthMap.from_array([[1.0, 2.0, np.nan]])
    pred = DepthMap.from_array([[2.0, np.nan, 100.0]])
    assert mae(pred, gt) == 1.0
    assert comparison_domain(pred, gt).tolist() == [[True, False, False]]


def test_domain_mask_restricts_pixels():
    """Test the explicit domain argument."""
    gt = DepthMap.from_array([[1.0, 1.0]])
    pred = DepthMap.from_array([[2.0, 5.0]])
    assert mae(pred, gt, np.array([[False, True]])) == 4.0


def test_zero_ground_truth_excluded_from_ratio_metrics():
    """Test that ratio metrics drop non-positive ground truth and report the count."""
    gt = DepthMap.from_array([[0.0, 2.0]])
    pred = DepthMap.from_array([[1.0, 3.0]])
    suite = classical_suite(pred, gt)
    assert suite.values["mae"] == 1.0
    assert suite.values["abs_rel"] == pytest.approx(0.5)
    assert suite.excluded["abs_rel"] == 1
    assert suite.excluded["mae"] == 0


def test_metric_with_empty_filtered_domain_is_none():
    """Test that a metric with no positive pixel is None rather than an error."""
    gt = DepthMap.from_array([[0.0, 0.0]])
    pred = DepthMap.from_array([[1.0, 3.0]])
    suite = classical_suite(pred, gt)
    assert suite.values["mae"] == 2.0
    assert suite.values["abs_rel"] is None
    assert suite.values["delta_1"] is None


def test_empty_domain_raises():
    """Test that a suite over zero pixels fails."""
    gt = DepthMap.from_array([[1.0]])
    pred = DepthMap.from_array([[np.nan]])
    with pytest.raises(EmptyDomain):
        classical_suite(pred, gt)
    with pytest.raises(EmptyDomain):
        mae(pred, gt)


def test_dimension_mismatch():
    """Test that maps of different sizes are refused."""
    with pytest.raises(DimensionMismatch):
        mae(DepthMap.from_array(np.ones((2, 2))), DepthMap.from_array(np.ones((2, 3))))


def test_delta_rejects_unknown_power():
    """Test that only 1, 2 and 3 are accepted as delta powers."""
    gt = DepthMap.from_array(np.ones((2, 2)))
    with pytest.raises(ValueError):
        delta_k(gt, gt, k=4)


depths = arrays(
    np.float64,
    (5, 6),
    elements=st.floats(min_value=0.1, max_value=200.0, allow_nan=False, allow_infinity=False),
)


@settings(max_examples=50, deadline=None)
@given(pred=depths, gt=depths)
def test_metric_ordering_properties(pred, gt):
    """Test RMSE >= MAE, MAE symmetry and monotone delta thresholds."""
    p, g = DepthMap.from_array(pred), DepthMap.from_array(gt)
    suite = classical_suite(p, g)
    values = suite.values
    assert values["rmse"] >= values["mae"] - 1e-12
    assert mae(p, g) == pytest.approx(mae(g, p))
    assert values["delta_1"] <= values["delta_2"] <= values["delta_3"]
    assert values["silog"] >= 0.0
