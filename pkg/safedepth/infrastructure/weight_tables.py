"""
Weight Tables - Built-in accident-opponent weights and the table file parser.

File grammar (TOML subset, duplicate keys rejected):

    normalized = true                # optional, default true
    unmapped_policy = "ignore"       # ignore | error | zero, default ignore

    [super_classes]                  # required: name = weight in [0, 1]
    Car = 0.5004
    "Truck&Van&Bus" = 0.0373

    [main_classes]                   # optional: super-class = group name
    Car = "vehicle"

    [mapping]                        # dataset class = super-class
    car = "Car"
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Mapping
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Annotated, Final, TypeVar

import structlog
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictBool,
    StrictStr,
    ValidationError,
    model_validator,
)

from safedepth.domain import (
    IoError,
    SuperClass,
    UnmappedPolicy,
    WeightTable,
    WeightTableError,
)

logger = structlog.get_logger(__name__)

# (sub-class, share of accident opponents, main class)
GIDAS_WEIGHTS: Final[tuple[tuple[str, float, str], ...]] = (
    ("Car", 0.5004, "vehicle"),
    ("Motorcycle", 0.0738, "vehicle"),
    ("Truck&Van&Bus", 0.0373, "vehicle"),
    ("Trains", 0.0063, "vehicle"),
    ("Other Motorized Vehicle", 0.0027, "vehicle"),
    ("Bicycles", 0.2195, "vru"),
    ("Pedestrian", 0.0805, "vru"),
    ("Pole/tree", 0.0324, "object"),
    ("Guardrail", 0.0117, "object"),
    ("Ditch/Embankment", 0.0107, "object"),
    ("Road/Terrain", 0.0104, "object"),
    ("Other Object", 0.0075, "object"),
    ("Wall/bridge", 0.0056, "object"),
    ("Bush/Fence", 0.0011, "object"),
)
DEFAULT_MAPPING_RESOURCE: Final[str] = "goose_to_gidas.toml"
FileModel = TypeVar("FileModel", bound=BaseModel)


class MappingFile(BaseModel):
    """Shape of the shipped dataset-class mapping file."""

    model_config = ConfigDict(extra="forbid")

    mapping: dict[str, StrictStr]


class WeightTableFile(BaseModel):
    """Shape of a weight table file; WeightTable re-checks sums and mapping targets."""

    model_config = ConfigDict(extra="forbid")

    normalized: StrictBool = True
    unmapped_policy: UnmappedPolicy = UnmappedPolicy.IGNORE
    super_classes: dict[str, Annotated[float, Field(strict=True, ge=0.0, le=1.0)]] = Field(
        min_length=1
    )
    main_classes: dict[str, StrictStr] = Field(default_factory=dict)
    mapping: dict[str, StrictStr] = Field(default_factory=dict)

    @model_validator(mode="after")
    def main_classes_are_declared(self) -> "WeightTableFile":
        stray = sorted(set(self.main_classes) - set(self.super_classes))
        if stray:
            raise ValueError(f"[main_classes] names undeclared super-classes {stray}")
        return self

    def to_table(self) -> WeightTable:
        return WeightTable(
            super_classes=tuple(
                SuperClass(name, weight, self.main_classes.get(name))
                for name, weight in self.super_classes.items()
            ),
            mapping=dict(self.mapping),
            unmapped_policy=self.unmapped_policy,
            normalized=self.normalized,
        )


def _validate(model: type[FileModel], text: str, source: str) -> FileModel:
    try:
        return model.model_validate(tomllib.loads(text))
    except (tomllib.TOMLDecodeError, ValidationError) as e:
        raise WeightTableError(f"{source}: {e}") from e


@lru_cache
def default_mapping() -> Mapping[str, str]:
    """GOOSE class name to GIDAS sub-class, read from the shipped file."""
    text = resources.files("safedepth.infrastructure.data").joinpath(
        DEFAULT_MAPPING_RESOURCE
    ).read_text(encoding="utf-8")
    return _validate(MappingFile, text, DEFAULT_MAPPING_RESOURCE).mapping


def builtin_gidas_table(mapping: Mapping[str, str] | None = None) -> WeightTable:
    """
    Accident-opponent weights of the 14 GIDAS sub-classes.

    Args:
        mapping: Dataset class to sub-class; defaults to the shipped GOOSE mapping

    Returns:
        Normalized table with unmapped classes ignored
    """
    return WeightTable(
        super_classes=tuple(SuperClass(n, w, main) for n, w, main in GIDAS_WEIGHTS),
        mapping=dict(default_mapping() if mapping is None else mapping),
        unmapped_policy=UnmappedPolicy.IGNORE,
        normalized=True,
    )


def parse_weight_table(text: str, source: str = "<string>") -> WeightTable:
    """
    Parse a weight table file's content.

    Raises:
        WeightTableError: On syntax errors, duplicate keys, unknown keys,
            out-of-range weights or mapping targets that are not declared
    """
    return _validate(WeightTableFile, text, source).to_table()


def load_weight_table(path: Path | None) -> WeightTable:
    """
    Load a weight table file, or the built-in table when `path` is None.

    Raises:
        IoError: If the file cannot be read
        WeightTableError: If the content is malformed
    """
    if path is None:
        logger.info("weight_table_builtin")
        return builtin_gidas_table()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read weight table {path}: {e}") from e
    table = parse_weight_table(text, source=str(path))
    logger.info(
        "weight_table_loaded",
        path=str(path),
        super_classes=len(table.super_classes),
        mapped_classes=len(table.mapping),
        unmapped_policy=table.unmapped_policy.value,
    )
    return table
