"""
Training-Data Composition Analysis
Spreads each dataset's frames over its scenario classes and reports the
share of every class, for a whole catalog or per model.
"""
from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction
from types import MappingProxyType
from typing import Final

from safedepth.domain import DatasetCatalogEntry, EmptyCatalog, UnknownDatasetClass, ZeroTotal

# high-level class -> mid-level classes
CLASS_HIERARCHY: Final[Mapping[str, tuple[str, ...]]] = MappingProxyType(
    {
        "indoor": ("home", "office", "public"),
        "outdoor": ("urban", "nature", "country"),
        "closeup": ("human", "object"),
    }
)
PARENT_OF: Final[Mapping[str, str]] = MappingProxyType(
    {
        **{high: high for high in CLASS_HIERARCHY},
        **{mid: high for high, mids in CLASS_HIERARCHY.items() for mid in mids},
    }
)


def check_classes(entry: DatasetCatalogEntry) -> None:
    """Raise UnknownDatasetClass for names outside the hierarchy."""
    unknown = sorted(c for c in entry.classes if c not in PARENT_OF)
    if unknown:
        raise UnknownDatasetClass(
            f"dataset {entry.name!r} uses unknown classes {unknown}; "
            f"known: {sorted(PARENT_OF)}"
        )


def frames_per_class(catalog: Sequence[DatasetCatalogEntry]) -> dict[str, Fraction]:
    """
    N_c = sum over datasets containing c of frame_count / number of classes.

    Values are exact fractions so the class totals add back up to the
    catalog's frame total with no rounding.

    Raises:
        EmptyCatalog: If the catalog has no entry
    """
    if not catalog:
        raise EmptyCatalog("dataset catalog is empty")
    frames: dict[str, Fraction] = {}
    for entry in catalog:
        check_classes(entry)
        part = Fraction(entry.frame_count, len(entry.classes))
        for cls in sorted(entry.classes):
            frames[cls] = frames.get(cls, Fraction(0)) + part
    return dict(sorted(frames.items()))


def class_share(frames: Mapping[str, Fraction | float | int]) -> dict[str, float]:
    """
    p_c = N_c / sum of all N.

    Raises:
        ZeroTotal: If the frames add up to zero
    """
    exact = {c: Fraction(n) for c, n in frames.items()}
    total = sum(exact.values(), Fraction(0))
    if total <= 0:
        raise ZeroTotal("class frames sum to zero")
    return {c: float(n / total) for c, n in sorted(exact.items())}


def roll_up_high_level(frames: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Sum mid-level frame counts into their high-level class."""
    rolled: dict[str, Fraction] = {high: Fraction(0) for high in CLASS_HIERARCHY}
    for cls, n in frames.items():
        rolled[PARENT_OF[cls]] += n
    return rolled


def merge_frames(*maps: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Add per-class frame maps of several catalogs."""
    merged: dict[str, Fraction] = {}
    for frames in maps:
        for cls, n in frames.items():
            merged[cls] = merged.get(cls, Fraction(0)) + n
    return dict(sorted(merged.items()))


def model_distributions(
    catalog: Sequence[DatasetCatalogEntry],
    models: Mapping[str, Iterable[str]],
) -> dict[str, dict[str, float]]:
    """
    High-level class shares of the datasets each model was trained on.

    Raises:
        ValueError: If a model lists a dataset missing from the catalog
    """
    by_name = {e.name: e for e in catalog}
    out: dict[str, dict[str, float]] = {}
    for model, names in sorted(models.items()):
        names = list(names)
        missing = sorted(set(names) - set(by_name))
        if missing:
            raise ValueError(f"model {model!r} lists datasets missing from the catalog: {missing}")
        frames = roll_up_high_level(frames_per_class([by_name[n] for n in names]))
        out[model] = class_share(frames)
    return out
