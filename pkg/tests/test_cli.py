"""
Tests for the command line, end to end on a synthetic dataset.
"""
import csv
import json

import numpy as np
import pytest

from safedepth.api.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, run_cli
from safedepth.api.config import Settings
from safedepth.api.reporting import read_report
from safedepth.domain import DepthMap
from safedepth.infrastructure import read_depth, write_depth_f32, write_depth_png16
from safedepth.main import main


@pytest.fixture
def settings() -> Settings:
    return Settings(workers=1)


def run_eval(root, out, settings, *extra: str) -> int:
    argv = ["eval", "--root", str(root), "--models", "good,coarse", "--out", str(out)]
    return run_cli([*argv, *extra], settings)


def test_eval_writes_report(write_dataset, tmp_path, settings, capsys):
    """Test a clean run: exit 0, report.json, scenes.csv and the summary table."""
    root = write_dataset()
    out = tmp_path / "out"
    assert run_eval(root, out, settings, "--csv") == EXIT_OK

    stdout = capsys.readouterr().out
    assert "E_class" in stdout
    assert "good" in stdout and "coarse" in stdout

    report = read_report(out / "report.json")
    assert report.sample_count == 4
    assert report.failures == []
    good = report.models["good"]
    assert good.aggregate is not None
    assert good.aggregate.e_global == pytest.approx(0.25, abs=1 / 256)
    assert [s.sample_id for s in good.scenes][0] == "scene_00/frame_000"
    assert set(good.by_scene) == {"scene_00", "scene_01"}
    assert "Car" in good.per_class
    assert report.config["models"] == ["good", "coarse"]
    assert "out" not in report.config

    with open(out / "scenes.csv", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert {r["model"] for r in rows} == {"good", "coarse"}


def test_eval_larger_error_scores_worse(write_dataset, tmp_path, settings):
    """Test that the x1.1 model scores worse than the +0.25 m model."""
    root = write_dataset()
    assert run_eval(root, tmp_path / "out", settings) == EXIT_OK
    report = read_report(tmp_path / "out" / "report.json")
    assert report.models["coarse"].aggregate.combined > report.models["good"].aggregate.combined


def test_eval_partial_failure_exit_code(write_dataset, tmp_path, settings):
    """Test exit 1 when one prediction is missing, with the failure in the report."""
    root = write_dataset(skip_coarse=["scene_01/frame_000"])
    assert run_eval(root, tmp_path / "out", settings) == EXIT_PARTIAL
    report = read_report(tmp_path / "out" / "report.json")
    assert [(f.sample_id, f.model) for f in report.failures] == [("scene_01/frame_000", "coarse")]
    assert report.models["coarse"].exclusions.failed_samples == 1
    assert len(report.models["good"].scenes) == 4


def test_eval_missing_root_is_fatal(tmp_path, settings, capsys):
    """Test exit 2 for a root that does not exist."""
    code = run_eval(tmp_path / "nowhere", tmp_path / "out", settings)
    assert code == EXIT_FATAL
    assert "ValidationError" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_eval_unknown_focus_is_fatal(write_dataset, tmp_path, settings):
    """Test that a focus name missing from the weight table aborts the run."""
    root = write_dataset(scenes=1, frames=1)
    code = run_eval(root, tmp_path / "out", settings, "--focus", "Spaceship")
    assert code == EXIT_FATAL
    assert not (tmp_path / "out").exists()


def test_eval_focus_mode(write_dataset, tmp_path, settings):
    """Test that focus mode restricts the per-class rows."""
    root = write_dataset(scenes=1, frames=1)
    assert run_eval(root, tmp_path / "out", settings, "--focus", "Pedestrian") == EXIT_OK
    report = read_report(tmp_path / "out" / "report.json")
    assert list(report.models["good"].per_class) == ["Pedestrian"]
    assert report.models["good"].per_class["Pedestrian"].w_class == 1.0


def test_eval_is_deterministic_across_workers(write_dataset, tmp_path):
    """Test byte-identical reports for 1 and 4 workers and for repeated runs."""
    root = write_dataset(scenes=5, frames=2)
    assert run_eval(root, tmp_path / "a", Settings(workers=1)) == EXIT_OK
    assert run_eval(root, tmp_path / "b", Settings(workers=4)) == EXIT_OK
    assert run_eval(root, tmp_path / "c", Settings(workers=1), "--workers", "4") == EXIT_OK
    first = (tmp_path / "a" / "report.json").read_bytes()
    assert first == (tmp_path / "b" / "report.json").read_bytes()
    assert first == (tmp_path / "c" / "report.json").read_bytes()


def test_eval_from_config_file(write_dataset, tmp_path, settings):
    """Test an [eval] table with a relative root and a CLI override."""
    write_dataset(scenes=1, frames=1)
    config = tmp_path / "run.toml"
    config.write_text(
        '[eval]\nroot = "dataset"\nmodels = ["good"]\ngamma = 2.0\nout = "from_file"\n'
        '[eval.features]\nedge_thickness = 1\n',
        encoding="utf-8",
    )
    code = run_cli(["eval", "--config", str(config), "--gamma", "3"], settings)
    assert code == EXIT_OK
    report = read_report(tmp_path / "from_file" / "report.json")
    assert report.gamma == 3.0
    assert report.config["features"]["edge_thickness"] == 1
    assert list(report.models) == ["good"]


def test_eval_sparse_only(write_dataset, tmp_path, settings):
    """Test scoring sparse ground truth without densification."""
    root = write_dataset(scenes=1, frames=1, sparse=True)
    assert run_eval(root, tmp_path / "out", settings, "--sparse-only") == EXIT_OK
    report = read_report(tmp_path / "out" / "report.json")
    assert report.config["sparse_only"] is True
    dense_pixels = 24 * 48
    assert report.models["good"].aggregate.pixel_count < dense_pixels


def test_eval_densifies_sparse_ground_truth_by_default(write_dataset, tmp_path, settings):
    """Test that default linear densification scores every non-sky pixel of sparse frames."""
    root = write_dataset(scenes=1, frames=2, sparse=True)
    assert run_eval(root, tmp_path / "out", settings) == EXIT_OK
    report = read_report(tmp_path / "out" / "report.json")
    assert report.failures == []
    assert report.config["densify"] == "linear"
    assert report.models["good"].aggregate.pixel_count == 2 * 24 * 48


def test_rank_orders_by_divergence(write_dataset, tmp_path, settings, capsys):
    """Test ranking from a written report."""
    root = write_dataset()
    out = tmp_path / "out"
    assert run_eval(root, out, settings) == EXIT_OK
    capsys.readouterr()

    code = run_cli(["rank", "--report", str(out / "report.json"), "--model", "coarse"], settings)
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("[coarse]")
    assert sum("scene_" in line for line in lines) == 4

    report = read_report(out / "report.json")
    scenes = report.models["coarse"].scenes
    expected = sorted(scenes, key=lambda s: (-s.divergence, s.sample_id))[0].sample_id
    assert expected in lines[3]


def test_rank_unknown_model_is_fatal(write_dataset, tmp_path, settings):
    """Test exit 2 for a model that is not in the report."""
    out = tmp_path / "out"
    assert run_eval(write_dataset(scenes=1, frames=1), out, settings) == EXIT_OK
    code = run_cli(["rank", "--report", str(out / "report.json"), "--model", "x"], settings)
    assert code == EXIT_FATAL


def test_rank_rejects_non_report(tmp_path, settings):
    """Test exit 2 for a file that is not a report."""
    path = tmp_path / "report.json"
    path.write_text('{"hello": 1}', encoding="utf-8")
    assert run_cli(["rank", "--report", str(path), "--model", "m"], settings) == EXIT_FATAL


def test_analyze_datasets_json(tmp_path, settings, capsys):
    """Test the JSON composition output."""
    catalog = tmp_path / "catalog.toml"
    catalog.write_text(
        '[[dataset]]\nname = "A"\nframes = 100\nclasses = "urban"\n'
        '[[dataset]]\nname = "B"\nframes = 60\nclasses = "urban, nature"\n'
        '[[dataset]]\nname = "C"\nframes = 30\nclasses = ["nature", "country"]\n'
        '[models]\nm = ["A"]\n',
        encoding="utf-8",
    )
    code = run_cli(["analyze-datasets", "--catalog", str(catalog), "--json"], settings)
    assert code == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["frames"] == {"country": 15.0, "nature": 45.0, "urban": 130.0}
    assert data["high_level_frames"]["outdoor"] == 190.0
    assert data["models"]["m"]["outdoor"] == 1.0


def test_analyze_datasets_table(tmp_path, settings, capsys):
    """Test the table output and the unknown-class error."""
    catalog = tmp_path / "catalog.toml"
    catalog.write_text('[[dataset]]\nname = "A"\nframes = 10\nclasses = "home"\n')
    assert run_cli(["analyze-datasets", "--catalog", str(catalog)], settings) == EXIT_OK
    assert "home" in capsys.readouterr().out

    catalog.write_text('[[dataset]]\nname = "A"\nframes = 10\nclasses = "space"\n')
    assert run_cli(["analyze-datasets", "--catalog", str(catalog)], settings) == EXIT_FATAL


def test_fit_affine_prints_and_writes(tmp_path, settings, capsys):
    """Test the fit over two frames, printed and written as JSON."""
    rng = np.random.default_rng(5)
    args = ["fit-affine"]
    for i in range(2):
        x = rng.uniform(0.1, 1.0, size=(8, 8))
        write_depth_f32(tmp_path / f"p{i}.f32", DepthMap.from_array(x))
        write_depth_f32(tmp_path / f"g{i}.f32", DepthMap.from_array(20.0 * x + 2.0))
        args += ["--pred", str(tmp_path / f"p{i}.f32"), "--gt", str(tmp_path / f"g{i}.f32")]
    out = tmp_path / "fit.json"
    assert run_cli([*args, "--out", str(out)], settings) == EXIT_OK

    printed = json.loads(capsys.readouterr().out)
    assert printed["scale"] == pytest.approx(20.0, rel=1e-4)
    assert printed["shift"] == pytest.approx(2.0, rel=1e-4)
    assert printed["sample_count"] == 128
    assert json.loads(out.read_text(encoding="utf-8")) == printed


def test_fit_affine_unpaired_is_fatal(tmp_path, settings):
    """Test that --pred and --gt must pair up."""
    argv = ["fit-affine", "--pred", "a.f32", "--pred", "b.f32", "--gt", "c.f32"]
    assert run_cli(argv, settings) == EXIT_FATAL


def test_densify_command(tmp_path, settings, capsys):
    """Test filling a sparse PNG from the command line."""
    sparse = np.zeros((6, 6))
    sparse[0, 0] = 3.0
    write_depth_png16(tmp_path / "in.png", DepthMap.from_array(sparse, sparse > 0))
    argv = [
        "densify",
        "--input",
        str(tmp_path / "in.png"),
        "--output",
        str(tmp_path / "out.png"),
        "--method",
        "nearest",
    ]
    assert run_cli(argv, settings) == EXIT_OK
    assert "filled 35 of 36 pixels" in capsys.readouterr().out
    assert np.all(read_depth(tmp_path / "out.png").values == 3.0)


def test_densify_too_sparse_is_fatal(tmp_path, settings):
    """Test exit 2 when linear densification lacks pixels."""
    sparse = np.zeros((6, 6))
    sparse[0, 0] = 3.0
    write_depth_png16(tmp_path / "in.png", DepthMap.from_array(sparse, sparse > 0))
    argv = ["densify", "--input", str(tmp_path / "in.png"), "--output", str(tmp_path / "o.png")]
    assert run_cli(argv, settings) == EXIT_FATAL


def test_version_flag(capsys):
    """Test --version through the entry point."""
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "safedepth 1.0.0" in capsys.readouterr().out


def test_unexpected_error_is_fatal(tmp_path, settings, monkeypatch, capsys):
    """Test that an error outside the known set still exits 2 with a message."""

    def crash(path):
        raise RuntimeError("boom")

    monkeypatch.setattr("safedepth.api.cli.read_report", crash)
    code = run_cli(["rank", "--report", str(tmp_path / "r.json"), "--model", "m"], settings)
    assert code == EXIT_FATAL
    assert "RuntimeError" in capsys.readouterr().err
