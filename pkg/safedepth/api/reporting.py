"""
Report Writers - JSON, stdout tables and per-scene CSV.
"""
import csv
import io
from collections.abc import Mapping, Sequence
from fractions import Fraction
from pathlib import Path
from typing import Final

import structlog
from pydantic import ValidationError

from safedepth import __version__
from safedepth.api.config import RunConfig
from safedepth.api.schemas import (
    ComponentBlock,
    EvaluationReport,
    ExclusionBlock,
    ModelReport,
    SampleFailureRow,
    SceneRow,
    SuperClassRow,
)
from safedepth.application import (
    DIVERGENCE_RULE,
    AffineFitResult,
    DatasetComposition,
    DatasetEvaluation,
    ModelSummary,
    RankedScene,
    SceneScore,
)
from safedepth.application.use_cases import ComponentTotals, SuperClassAggregate
from safedepth.domain import BadFormat, IoError

logger = structlog.get_logger(__name__)

REPORT_FILE: Final[str] = "report.json"
SCENES_FILE: Final[str] = "scenes.csv"
CSV_COLUMNS: Final[tuple[str, ...]] = (
    "model",
    "sample_id",
    "scene",
    "e_class",
    "e_feature",
    "e_global",
    "combined",
    "mae",
    "divergence",
    "pixel_count",
)
TABLE_METRICS: Final[tuple[str, ...]] = ("rmse", "abs_rel", "delta_1")


def _block(totals: ComponentTotals) -> ComponentBlock:
    return ComponentBlock(
        e_class=totals.e_class,
        e_feature=totals.e_feature,
        e_global=totals.e_global,
        combined=totals.combined,
        sample_count=totals.sample_count,
        pixel_count=totals.pixel_count,
    )


def _super_rows(rows: Mapping[str, SuperClassAggregate]) -> dict[str, SuperClassRow]:
    return {
        name: SuperClassRow(
            name=agg.name,
            contribution=agg.contribution,
            raw_mae=agg.raw_mae,
            w_class=agg.w_class,
            sample_count=agg.sample_count,
            pixel_count=agg.pixel_count,
        )
        for name, agg in rows.items()
    }


def _model_report(summary: ModelSummary, failed: int) -> ModelReport:
    ex = summary.exclusions
    return ModelReport(
        model=summary.model,
        aggregate=_block(summary.totals) if summary.totals else None,
        classical=dict(summary.classical),
        per_class=_super_rows(summary.per_class),
        per_class_feature=_super_rows(summary.per_class_feature),
        by_scene={scene: _block(t) for scene, t in summary.by_scene.items()},
        scenes=[
            SceneRow(
                sample_id=r.sample_id,
                scene=r.scene,
                e_class=r.scores.e_class,
                e_feature=r.scores.e_feature,
                e_global=r.scores.e_global,
                combined=r.scores.combined,
                mae=r.mae,
                divergence=r.divergence,
                pixel_count=r.scores.pixel_count,
                classical=dict(r.scores.classical),
            )
            for r in summary.rows
        ],
        exclusions=ExclusionBlock(
            unmapped_classes=list(ex.unmapped_classes),
            dropped_feature_pixels=ex.dropped_feature_pixels,
            clamped_pixels=ex.clamped_pixels,
            classical_excluded=dict(ex.classical_excluded),
            failed_samples=failed,
        ),
    )


def build_report(evaluation: DatasetEvaluation, cfg: RunConfig) -> EvaluationReport:
    """Turn a dataset evaluation into the versioned report model."""
    failed: dict[str, int] = {}
    for f in evaluation.failures:
        failed[f.model] = failed.get(f.model, 0) + 1
    return EvaluationReport(
        tool_version=__version__,
        divergence_rule=DIVERGENCE_RULE,
        gamma=evaluation.gamma,
        aggregation=evaluation.aggregation.value,
        sample_count=evaluation.sample_count,
        config=cfg.echo(),
        models={
            name: _model_report(summary, failed.get(name, 0))
            for name, summary in evaluation.models.items()
        },
        failures=[
            SampleFailureRow(
                sample_id=f.sample_id,
                model=f.model,
                error_type=f.error_type,
                message=f.message,
            )
            for f in evaluation.failures
        ],
    )


def dump_report(report: EvaluationReport) -> str:
    """Serialize with a fixed layout; identical reports give identical text."""
    report.verify_combined()
    return report.model_dump_json(indent=2) + "\n"


def write_report(report: EvaluationReport, out_dir: Path) -> Path:
    path = Path(out_dir) / REPORT_FILE
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_report(report), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    logger.info("report_written", path=str(path))
    return path


def read_report(path: Path) -> EvaluationReport:
    """
    Raises:
        IoError: If the file cannot be read
        BadFormat: If it is not a valid report
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read report {path}: {e}") from e
    try:
        return EvaluationReport.model_validate_json(text)
    except ValidationError as e:
        raise BadFormat(f"{path}: not a valid evaluation report: {e}") from e


def scene_scores(report: EvaluationReport) -> dict[str, list[SceneScore]]:
    """Per-model rows in the shape the ranking needs."""
    return {
        name: [SceneScore(r.sample_id, r.combined, r.mae) for r in model.scenes]
        for name, model in report.models.items()
    }


def scenes_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name, model in report.models.items():
        for r in model.scenes:
            writer.writerow(
                [
                    name,
                    r.sample_id,
                    r.scene,
                    repr(r.e_class),
                    repr(r.e_feature),
                    repr(r.e_global),
                    repr(r.combined),
                    repr(r.mae),
                    repr(r.divergence),
                    r.pixel_count,
                ]
            )
    return buf.getvalue()


def write_scenes_csv(report: EvaluationReport, out_dir: Path) -> Path:
    path = Path(out_dir) / SCENES_FILE
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(scenes_csv(report), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    logger.info("scenes_csv_written", path=str(path))
    return path


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


def _render(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths, strict=True))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths, strict=True)) for r in rows]
    return "\n".join(lines)


def format_summary(report: EvaluationReport) -> str:
    """Per-model table of the components, the combined score and classical metrics."""
    header = ["model", "samples", "failed", "E_class", "E_feature", "E_global", "L"]
    header += [m.upper() for m in TABLE_METRICS]
    rows: list[list[str]] = []
    for name, model in report.models.items():
        agg = model.aggregate
        row = [name, str(agg.sample_count if agg else 0), str(model.exclusions.failed_samples)]
        if agg is None:
            row += [_fmt(None)] * 4
        else:
            row += [_fmt(agg.e_class), _fmt(agg.e_feature), _fmt(agg.e_global), _fmt(agg.combined)]
        row += [_fmt(model.classical.get(m)) for m in TABLE_METRICS]
        rows.append(row)
    title = (
        f"gamma={report.gamma:g}  aggregation={report.aggregation}  "
        f"samples={report.sample_count}"
    )
    return title + "\n" + _render(header, rows)


def format_per_class(report: EvaluationReport) -> str:
    """Super-class contributions per model (single-class view)."""
    blocks = []
    for name, model in report.models.items():
        rows = [
            [
                sc.name,
                _fmt(sc.w_class),
                _fmt(sc.contribution),
                _fmt(sc.raw_mae),
                str(sc.sample_count),
            ]
            for sc in model.per_class.values()
        ]
        if rows:
            header = ["super-class", "w_class", "contribution", "raw MAE", "samples"]
            blocks.append(f"[{name}]\n" + _render(header, rows))
    return "\n\n".join(blocks)


def format_ranking(model: str, ranked: Sequence[RankedScene]) -> str:
    header = ["rank", "sample", "divergence", "L", "MAE"]
    rows = [
        [str(i), r.sample_id, _fmt(r.divergence), _fmt(r.combined), _fmt(r.mae)]
        for i, r in enumerate(ranked, start=1)
    ]
    return f"[{model}] {DIVERGENCE_RULE}\n" + (_render(header, rows) if rows else "(no scenes)")


def _frac(value: Fraction) -> str:
    return f"{float(value):.2f}"


def format_composition(comp: DatasetComposition) -> str:
    header = ["class", "frames", "share %"]
    rows = [[c, _frac(n), f"{100 * comp.shares[c]:.2f}"] for c, n in comp.frames.items()]
    high = [
        [c, _frac(n), f"{100 * comp.high_level_shares[c]:.2f}"]
        for c, n in comp.high_level_frames.items()
    ]
    parts = [_render(header, rows), _render(header, high)]
    for model, shares in comp.per_model.items():
        parts.append(
            f"[{model}] " + "  ".join(f"{c} {100 * s:.2f}%" for c, s in shares.items())
        )
    return "\n\n".join(parts)


def composition_json(comp: DatasetComposition) -> dict[str, object]:
    return {
        "frames": {c: float(n) for c, n in comp.frames.items()},
        "shares": dict(comp.shares),
        "high_level_frames": {c: float(n) for c, n in comp.high_level_frames.items()},
        "high_level_shares": dict(comp.high_level_shares),
        "models": {m: dict(s) for m, s in comp.per_model.items()},
    }


def affine_json(result: AffineFitResult) -> dict[str, object]:
    fit = result.fit
    return {
        "scale": fit.scale,
        "shift": fit.shift,
        "residual_rmse": fit.residual_rmse,
        "sample_count": fit.sample_count,
        "frames": [{"pred": p, "gt": g} for p, g in result.frames],
    }
