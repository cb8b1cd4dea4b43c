"""
Tests for environment settings and run configuration loading.
"""
import pytest
from pydantic import ValidationError

from safedepth.api.config import (
    AffineSettings,
    FeatureSettings,
    LogLevel,
    Settings,
    load_run_config,
)
from safedepth.application import Aggregation
from safedepth.domain import CornerMethod, FeatureKind
from safedepth.infrastructure import DensifyMethod


def test_settings_from_environment(monkeypatch):
    """Test the SAFEDEPTH_ prefix."""
    monkeypatch.setenv("SAFEDEPTH_WORKERS", "7")
    monkeypatch.setenv("SAFEDEPTH_LOG_LEVEL", "DEBUG")
    settings = Settings()
    assert settings.workers == 7
    assert settings.log_level is LogLevel.DEBUG


def test_settings_reject_zero_workers():
    """Test the worker lower bound."""
    with pytest.raises(ValidationError):
        Settings(workers=0)


def test_run_config_defaults(tmp_path):
    """Test defaults of a minimal run."""
    cfg = load_run_config(None, {"root": tmp_path, "models": ["m"]})
    assert cfg.gamma == 1.0
    assert cfg.aggregation is Aggregation.PER_IMAGE_MEAN
    assert cfg.feature_kind is FeatureKind.EDGE
    assert cfg.effective_densify is DensifyMethod.LINEAR
    assert cfg.sky_classes == ["sky"]
    assert cfg.features.to_params().edge_thickness == 2


def test_sparse_only_disables_densification(tmp_path):
    """Test that sparse_only wins over the densify method."""
    cfg = load_run_config(None, {"root": tmp_path, "models": ["m"], "sparse_only": True})
    assert cfg.effective_densify is DensifyMethod.NONE


@pytest.mark.parametrize(
    "overrides",
    [
        {"models": []},
        {"models": ["a", "a"]},
        {"models": [" "]},
        {"models": ["m"], "gamma": 0.0},
        {"models": ["m"], "focus": ["Car", "Car"]},
        {"models": ["m"], "weights": "absent.toml"},
        {"models": ["m"], "aggregation": "median"},
    ],
)
def test_run_config_rejects_invalid_values(tmp_path, overrides):
    """Test run validation."""
    with pytest.raises(ValidationError):
        load_run_config(None, {"root": tmp_path, **overrides})


def test_run_config_requires_existing_root(tmp_path):
    """Test that the dataset root must exist."""
    with pytest.raises(ValidationError):
        load_run_config(None, {"root": tmp_path / "absent", "models": ["m"]})


def test_config_file_merges_with_overrides(tmp_path):
    """Test [eval] loading, relative paths, feature merging and affine tables."""
    (tmp_path / "data").mkdir()
    (tmp_path / "w.toml").write_text("[super_classes]\nA = 1.0\n", encoding="utf-8")
    path = tmp_path / "run.toml"
    path.write_text(
        """
        [eval]
        root = "data"
        models = ["zoe", "depth_anything"]
        weights = "w.toml"
        aggregation = "pixel-pooled"

        [eval.features]
        edge_low = 30
        corner_radius = 5

        [eval.affine.depth_anything]
        scale = 2.0
        shift = 0.5
        """,
        encoding="utf-8",
    )
    cfg = load_run_config(
        path,
        {"gamma": 2.0, "features": {"corner_method": "shi_tomasi", "edge_low": None}},
    )
    assert cfg.root == tmp_path / "data"
    assert cfg.weights == tmp_path / "w.toml"
    assert cfg.gamma == 2.0
    assert cfg.aggregation is Aggregation.PIXEL_POOLED
    assert cfg.features.edge_low == 30
    assert cfg.features.corner_radius == 5
    assert cfg.features.corner_method is CornerMethod.SHI_TOMASI
    fit = cfg.affine["depth_anything"].to_fit()
    assert (fit.scale, fit.shift) == (2.0, 0.5)


def test_config_echo_leaves_out_output(tmp_path):
    """Test that the echoed config has no output location."""
    cfg = load_run_config(
        None, {"root": tmp_path, "models": ["m"], "out": tmp_path / "o", "csv": True}
    )
    echo = cfg.echo()
    assert "out" not in echo and "csv" not in echo
    assert echo["root"] == str(tmp_path)


def test_feature_settings_validation():
    """Test hysteresis ordering and odd windows."""
    with pytest.raises(ValidationError):
        FeatureSettings(edge_low=200, edge_high=100)
    with pytest.raises(ValidationError):
        FeatureSettings(window=4)


def test_affine_settings_default_shift():
    """Test a scale-only affine setting."""
    assert AffineSettings(scale=3.0).to_fit().shift == 0.0
