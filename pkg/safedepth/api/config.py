"""
Configuration Management - Environment Settings & Run Configuration
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Mapping
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from safedepth.application import SKY_CLASSES, Aggregation
from safedepth.domain import AffineFit, CornerMethod, FeatureKind, FeatureParams
from safedepth.infrastructure import DensifyMethod


class LogLevel(str, Enum):
    """Logging levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


class LogFormat(str, Enum):
    """Log renderers."""
    CONSOLE = "console"
    JSON = "json"


class Settings(BaseSettings):
    """
    Process-wide configuration loaded from environment variables.
    """

    model_config = SettingsConfigDict(
        env_prefix="SAFEDEPTH_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = "safedepth"
    app_version: str = "1.0.0"
    log_level: LogLevel = LogLevel.INFO
    log_format: LogFormat = LogFormat.CONSOLE

    # Evaluation
    workers: int = Field(default=4, ge=1, description="Samples evaluated concurrently")
    io_retries: int = Field(default=3, ge=1, description="Attempts per raster read")


@lru_cache
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Returns:
        Process settings
    """
    return Settings()


class FeatureSettings(BaseModel):
    """Edge and corner extraction parameters."""
    edge_low: float = Field(default=50.0, ge=0, description="Lower hysteresis threshold")
    edge_high: float = Field(default=150.0, ge=0, description="Upper hysteresis threshold")
    edge_thickness: int = Field(default=2, ge=0, description="Contour dilation radius in px")
    corner_k: float = Field(default=0.04, gt=0, description="Harris sensitivity")
    corner_rel_threshold: float = Field(
        default=0.01, gt=0, le=1, description="Response threshold relative to the image maximum"
    )
    corner_radius: int = Field(default=3, ge=0, description="Corner disk radius in px")
    window: int = Field(default=5, ge=3, description="Structure-tensor window, odd")
    corner_method: CornerMethod = CornerMethod.HARRIS

    @model_validator(mode="after")
    def _check(self) -> "FeatureSettings":
        if self.edge_low > self.edge_high:
            raise ValueError(f"edge_low {self.edge_low} exceeds edge_high {self.edge_high}")
        if self.window % 2 != 1:
            raise ValueError(f"window must be odd, got {self.window}")
        return self

    def to_params(self) -> FeatureParams:
        return FeatureParams(**self.model_dump())


class AffineSettings(BaseModel):
    """Fixed scale/shift for one model's affine-invariant output."""
    scale: float
    shift: float = 0.0

    def to_fit(self) -> AffineFit:
        return AffineFit(scale=self.scale, shift=self.shift, residual_rmse=0.0, sample_count=2)


class RunConfig(BaseModel):
    """
    One evaluation run. Paths must exist when the config is built.
    """
    root: Path = Field(..., description="Dataset root laid out as <scene>/<frame>/")
    models: list[str] = Field(..., min_length=1, description="Model names under pred/")
    weights: Path | None = Field(None, description="Weight table file; built-in table if unset")
    features: FeatureSettings = Field(default_factory=FeatureSettings)
    feature_kind: FeatureKind = FeatureKind.EDGE
    gamma: float = Field(default=1.0, gt=0, description="Scale of the combined score")
    focus: list[str] | None = Field(None, description="Super-classes scored in focus mode")
    aggregation: Aggregation = Aggregation.PER_IMAGE_MEAN
    densify: DensifyMethod = DensifyMethod.LINEAR
    sparse_only: bool = Field(False, description="Skip densification")
    out: Path | None = Field(None, description="Directory for report.json and scenes.csv")
    csv: bool = False
    depth_scale: float = Field(default=256.0, gt=0, description="16-bit PNG depth divisor")
    sky_classes: list[str] = Field(default_factory=lambda: list(SKY_CLASSES))
    renormalize_present: bool = False
    affine: dict[str, AffineSettings] = Field(default_factory=dict)

    @field_validator("root")
    @classmethod
    def _root_exists(cls, value: Path) -> Path:
        if not value.is_dir():
            raise ValueError(f"dataset root {value} does not exist")
        return value

    @field_validator("weights")
    @classmethod
    def _weights_exist(cls, value: Path | None) -> Path | None:
        if value is not None and not value.is_file():
            raise ValueError(f"weight table {value} does not exist")
        return value

    @field_validator("models", "focus")
    @classmethod
    def _no_blank_names(cls, value: list[str] | None) -> list[str] | None:
        if value is None:
            return None
        names = [v.strip() for v in value]
        if any(not n for n in names):
            raise ValueError("names must not be blank")
        if len(set(names)) != len(names):
            raise ValueError("names must be unique")
        return names

    @property
    def effective_densify(self) -> DensifyMethod:
        return DensifyMethod.NONE if self.sparse_only else self.densify

    def echo(self) -> dict[str, Any]:
        """Config as recorded in the report; the output directory is left out."""
        return self.model_dump(mode="json", exclude={"out", "csv"})


_PATH_KEYS = ("root", "weights", "out")


def _read_eval_table(config_file: Path) -> dict[str, Any]:
    with open(config_file, "rb") as fh:
        doc = tomllib.load(fh)
    table = dict(doc.get("eval", {}))
    base = config_file.parent
    for key in _PATH_KEYS:
        if isinstance(table.get(key), str):
            path = Path(table[key])
            table[key] = path if path.is_absolute() else base / path
    return table


def load_run_config(
    config_file: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """
    Build a RunConfig from an optional TOML file and CLI overrides.

    The file's `[eval]` table is read first; overrides that are not None
    win. `features` and `affine` tables are merged key by key. Relative
    paths in the file resolve against the file's directory.

    Raises:
        OSError: If the config file cannot be read
        tomllib.TOMLDecodeError: If it is not valid TOML
        pydantic.ValidationError: If the merged values are invalid
    """
    data: dict[str, Any] = _read_eval_table(config_file) if config_file else {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("features", "affine") and isinstance(value, Mapping):
            merged = dict(data.get(key, {}))
            merged.update({k: v for k, v in value.items() if v is not None})
            data[key] = merged
        else:
            data[key] = value
    return RunConfig.model_validate(data)
