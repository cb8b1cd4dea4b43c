"""
Command-Line Interface - eval, rank, analyze-datasets, fit-affine, densify.

Exit codes: 0 success, 1 some (sample, model) pairs failed, 2 fatal.
"""
import argparse
import asyncio
import json
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Final

import structlog
from pydantic import ValidationError

from safedepth import __version__
from safedepth.api.config import RunConfig, Settings, load_run_config
from safedepth.api.dependencies import DependencyContainer
from safedepth.api.reporting import (
    affine_json,
    build_report,
    composition_json,
    format_composition,
    format_per_class,
    format_ranking,
    format_summary,
    read_report,
    scene_scores,
    write_report,
    write_scenes_csv,
)
from safedepth.application import Aggregation
from safedepth.domain import CornerMethod, FeatureKind, IoError, SafeDepthError
from safedepth.infrastructure import DensifyMethod

logger = structlog.get_logger(__name__)

EXIT_OK: Final[int] = 0
EXIT_PARTIAL: Final[int] = 1
EXIT_FATAL: Final[int] = 2
FATAL_ERRORS: Final[tuple[type[Exception], ...]] = (
    SafeDepthError,
    ValidationError,
    tomllib.TOMLDecodeError,
    OSError,
    ValueError,
)


def _name_list(value: str) -> list[str]:
    names = [v.strip() for v in value.split(",") if v.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of names")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safedepth",
        description="Safety-aware evaluation of metric depth estimation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="Evaluate models over a dataset root")
    ev.add_argument("--root", type=Path, help="Dataset root (<scene>/<frame>/...)")
    ev.add_argument("--models", type=_name_list, help="Comma-separated model names")
    ev.add_argument("--config", type=Path, help="TOML file with an [eval] table")
    ev.add_argument("--weights", type=Path, help="Weight table file (default: built-in)")
    ev.add_argument("--gamma", type=float)
    ev.add_argument("--agg", choices=[a.value for a in Aggregation], dest="aggregation")
    ev.add_argument("--focus", type=_name_list, help="Super-classes for focus mode")
    ev.add_argument("--densify", choices=[m.value for m in DensifyMethod])
    ev.add_argument("--sparse-only", action="store_true", default=None)
    ev.add_argument("--features", choices=[k.value for k in FeatureKind], dest="feature_kind")
    ev.add_argument("--corner-method", choices=[m.value for m in CornerMethod])
    ev.add_argument("--depth-scale", type=float)
    ev.add_argument("--renormalize-present", action="store_true", default=None)
    ev.add_argument("--workers", type=int, help="Override SAFEDEPTH_WORKERS")
    ev.add_argument("--out", type=Path, help="Directory for report.json")
    ev.add_argument("--csv", action="store_true", default=None, help="Also write scenes.csv")
    ev.set_defaults(handler=cmd_eval)

    rk = sub.add_parser("rank", help="Rank a model's scenes by divergence")
    rk.add_argument("--report", type=Path, required=True)
    rk.add_argument("--model", required=True)
    rk.add_argument("--top", type=int)
    rk.set_defaults(handler=cmd_rank)

    an = sub.add_parser("analyze-datasets", help="Class composition of a dataset catalog")
    an.add_argument("--catalog", type=Path, required=True)
    an.add_argument("--json", action="store_true")
    an.set_defaults(handler=cmd_analyze_datasets)

    fa = sub.add_parser("fit-affine", help="Fit scale/shift of affine-invariant predictions")
    fa.add_argument("--pred", type=Path, action="append", required=True)
    fa.add_argument("--gt", type=Path, action="append", required=True)
    fa.add_argument("--out", type=Path, help="Write the fit as JSON")
    fa.set_defaults(handler=cmd_fit_affine)

    dn = sub.add_parser("densify", help="Fill a sparse depth raster")
    dn.add_argument("--input", type=Path, required=True)
    dn.add_argument("--output", type=Path, required=True)
    dn.add_argument(
        "--method",
        choices=[DensifyMethod.NEAREST.value, DensifyMethod.LINEAR.value],
        default=DensifyMethod.LINEAR.value,
    )
    dn.add_argument("--depth-scale", type=float)
    dn.set_defaults(handler=cmd_densify)
    return parser


def _eval_overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = (
        "root",
        "models",
        "weights",
        "gamma",
        "aggregation",
        "focus",
        "densify",
        "sparse_only",
        "feature_kind",
        "depth_scale",
        "renormalize_present",
        "out",
        "csv",
    )
    overrides = {k: getattr(args, k) for k in keys}
    overrides["features"] = {"corner_method": args.corner_method}
    return overrides


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    cfg: RunConfig = load_run_config(args.config, _eval_overrides(args))
    if args.workers is not None:
        settings = settings.model_copy(update={"workers": args.workers})
    container = DependencyContainer(settings, cfg)
    container.initialize()

    evaluation = asyncio.run(container.get_evaluate_dataset_use_case().execute(cfg.models))
    report = build_report(evaluation, cfg)
    print(format_summary(report))
    per_class = format_per_class(report)
    if per_class:
        print()
        print(per_class)

    if cfg.out is not None:
        write_report(report, cfg.out)
        if cfg.csv:
            write_scenes_csv(report, cfg.out)
    if report.has_failures:
        logger.warning("evaluation_partial", failures=len(report.failures))
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_rank(args: argparse.Namespace, settings: Settings) -> int:
    report = read_report(args.report)
    ranked = DependencyContainer(settings).get_rank_use_case().execute(
        scene_scores(report), report.gamma, args.model, args.top
    )
    print(format_ranking(args.model, ranked))
    return EXIT_OK


def cmd_analyze_datasets(args: argparse.Namespace, settings: Settings) -> int:
    use_case = DependencyContainer(settings).get_analyze_datasets_use_case(args.catalog)
    composition = use_case.execute()
    if args.json:
        print(json.dumps(composition_json(composition), indent=2))
    else:
        print(format_composition(composition))
    return EXIT_OK


def cmd_fit_affine(args: argparse.Namespace, settings: Settings) -> int:
    if len(args.pred) != len(args.gt):
        raise ValueError(f"{len(args.pred)} --pred but {len(args.gt)} --gt given")
    result = DependencyContainer(settings).get_fit_affine_use_case().execute(
        list(zip(args.pred, args.gt, strict=True))
    )
    text = json.dumps(affine_json(result), indent=2)
    print(text)
    if args.out is not None:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            raise IoError(f"cannot write {args.out}: {e}") from e
    return EXIT_OK


def cmd_densify(args: argparse.Namespace, settings: Settings) -> int:
    container = DependencyContainer(settings, depth_scale=args.depth_scale)
    outcome = container.get_densify_use_case(DensifyMethod(args.method)).execute(
        args.input, args.output
    )
    print(f"filled {outcome.filled_pixels} of {outcome.total_pixels} pixels -> {args.output}")
    return EXIT_OK


def run_cli(argv: Sequence[str] | None, settings: Settings) -> int:
    """Parse arguments, dispatch to the subcommand and map errors to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        code: int = args.handler(args, settings)
        return code
    except FATAL_ERRORS as e:
        logger.error(
            "command_failed",
            command=args.command,
            error_type=type(e).__name__,
            error=str(e),
        )
        print(f"safedepth {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FATAL
    except Exception as e:
        logger.exception("command_crashed", command=args.command, error_type=type(e).__name__)
        print(f"safedepth {args.command}: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FATAL
