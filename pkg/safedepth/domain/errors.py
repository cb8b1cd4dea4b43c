"""
Domain Errors - Named failure modes of the evaluation pipeline.
"""


class SafeDepthError(Exception):
    """Base class for every error raised by the package."""


class DimensionMismatch(SafeDepthError, ValueError):
    """Two rasters that must be paired have different sizes."""


class EmptyGroundTruth(SafeDepthError, ValueError):
    """Ground truth has no valid pixel."""


class EmptyDomain(SafeDepthError, ValueError):
    """A metric was asked to reduce over zero pixels."""


class NoLabeledPixels(SafeDepthError, ValueError):
    """No labeled class has valid ground truth in the image."""


class UnmappedClass(SafeDepthError, ValueError):
    """A dataset class has no super-class and the table forbids that."""


class UnknownSuperClass(SafeDepthError, ValueError):
    """A super-class name is not declared in the weight table."""


class WeightTableError(SafeDepthError, ValueError):
    """A weight table file or definition is malformed."""


class DegenerateImage(SafeDepthError, ValueError):
    """Image is too small for the feature window."""


class TooSparse(SafeDepthError, ValueError):
    """Not enough valid pixels to densify with the requested method."""


class DegenerateFit(SafeDepthError, ValueError):
    """Least-squares alignment has no unique solution."""


class EmptyCatalog(SafeDepthError, ValueError):
    """Dataset catalog has no entries."""


class UnknownDatasetClass(SafeDepthError, ValueError):
    """Catalog entry names a class outside the dataset hierarchy."""


class ZeroTotal(SafeDepthError, ValueError):
    """Class shares requested over a zero frame total."""


class EmptyDataset(SafeDepthError, ValueError):
    """Dataset root holds no evaluable sample."""


class UnknownModel(SafeDepthError, KeyError):
    """Model is not present in the report."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown model"


class MissingPrediction(SafeDepthError, FileNotFoundError):
    """Sample has no prediction file for the requested model."""


class IoError(SafeDepthError, OSError):
    """A raster file could not be read or written."""


class BadFormat(SafeDepthError, ValueError):
    """File content does not match the expected container."""


class UnknownLabel(SafeDepthError, ValueError):
    """Label raster holds an ID missing from the name table."""
