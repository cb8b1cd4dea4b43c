"""
Dataset Catalog - Training-dataset catalog file loader.

    [[dataset]]
    name = "KITTI"
    frames = 93000
    classes = "urban, country"       # or ["urban", "country"]

    [models]                          # optional
    ZoeDepth = ["KITTI", "NYUv2"]
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import structlog
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictInt,
    StrictStr,
    ValidationError,
    field_validator,
    model_validator,
)

from safedepth.domain import BadFormat, DatasetCatalogEntry, IoError

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class DatasetCatalog:
    """Catalog entries plus the datasets each model was trained on."""
    entries: tuple[DatasetCatalogEntry, ...]
    models: Mapping[str, tuple[str, ...]] = field(default_factory=dict)


class DatasetItem(BaseModel):
    """One `[[dataset]]` block."""

    model_config = ConfigDict(extra="forbid")

    name: StrictStr = Field(min_length=1)
    frames: StrictInt = Field(ge=0)
    classes: list[StrictStr]

    @field_validator("classes", mode="before")
    @classmethod
    def split_comma_string(cls, raw: object) -> object:
        return raw.split(",") if isinstance(raw, str) else raw

    @field_validator("classes")
    @classmethod
    def normalize_classes(cls, names: list[str]) -> list[str]:
        cleaned = sorted({n.strip().lower() for n in names if n.strip()})
        if not cleaned:
            raise ValueError("at least one class is required")
        return cleaned

    def to_entry(self) -> DatasetCatalogEntry:
        return DatasetCatalogEntry(self.name, self.frames, frozenset(self.classes))


class CatalogFile(BaseModel):
    """Shape of a catalog file."""

    model_config = ConfigDict(extra="forbid")

    dataset: list[DatasetItem] = Field(default_factory=list)
    models: dict[str, list[StrictStr]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def names_are_unique(self) -> "CatalogFile":
        names = [d.name for d in self.dataset]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate dataset names {duplicates}")
        return self


def parse_catalog(text: str, source: str = "<string>") -> DatasetCatalog:
    """
    Parse catalog file content.

    Raises:
        BadFormat: On syntax errors, missing fields or duplicate names
    """
    try:
        doc = CatalogFile.model_validate(tomllib.loads(text))
    except (tomllib.TOMLDecodeError, ValidationError) as e:
        raise BadFormat(f"{source}: {e}") from e
    return DatasetCatalog(
        entries=tuple(item.to_entry() for item in doc.dataset),
        models={m: tuple(ds) for m, ds in sorted(doc.models.items())},
    )


def load_catalog(path: Path) -> DatasetCatalog:
    """Read and parse a catalog file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read catalog {path}: {e}") from e
    catalog = parse_catalog(text, source=str(path))
    logger.info("catalog_loaded", path=str(path), datasets=len(catalog.entries))
    return catalog
