"""
Main Entry Point
Configures structured logging and runs the command line.
"""
import logging
import sys
from collections.abc import Sequence

import structlog

from safedepth.api.cli import run_cli
from safedepth.api.config import LogFormat, Settings, get_settings


def configure_logging(settings: Settings) -> None:
    """Route structlog to stderr so stdout stays a clean report table."""
    renderer: structlog.typing.Processor = (
        structlog.processors.JSONRenderer()
        if settings.log_format is LogFormat.JSON
        else structlog.dev.ConsoleRenderer()
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(settings.log_level.value)
        ),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def main(argv: Sequence[str] | None = None) -> None:
    settings = get_settings()
    configure_logging(settings)
    structlog.get_logger(__name__).debug(
        "application_startup", app_name=settings.app_name, version=settings.app_version
    )
    sys.exit(run_cli(argv, settings))


if __name__ == "__main__":
    main()
