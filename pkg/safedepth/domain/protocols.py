"""
Domain Protocols - Interface Definitions
Defines contracts without implementation details.
"""
from abc import abstractmethod
from collections.abc import Sequence
from pathlib import Path
from typing import Protocol

from safedepth.domain.entities import (
    DepthMap,
    FeatureKind,
    FeatureMap,
    FeatureParams,
    RgbImage,
    SceneSample,
    SegmentationMask,
)


class FeatureExtractor(Protocol):
    """
    Turns an unmasked RGB image into a binary feature map.
    New detectors plug in by satisfying this interface.
    """

    @property
    @abstractmethod
    def kind(self) -> FeatureKind:
        """Kind recorded on the produced maps."""
        ...

    @abstractmethod
    def extract(self, img: RgbImage, params: FeatureParams) -> FeatureMap:
        """
        Extract dilated feature pixels.

        Args:
            img: Unmasked camera image
            params: Thresholds and support sizes

        Returns:
            Feature map with the image's dimensions
        """
        ...


class RasterReader(Protocol):
    """
    Loads the rasters of one sample from storage.
    """

    @abstractmethod
    def read_depth(self, path: Path) -> DepthMap:
        """Read a ground-truth or predicted depth raster."""
        ...

    @abstractmethod
    def read_labels(self, path: Path, name_table: dict[int, str]) -> SegmentationMask:
        """Read a label raster and attach its name table."""
        ...

    @abstractmethod
    def read_rgb(self, path: Path) -> RgbImage:
        """Read the camera image."""
        ...


class RasterWriter(Protocol):
    """
    Persists depth rasters.
    """

    @abstractmethod
    def write_depth(self, path: Path, depth: DepthMap) -> None:
        """Write a depth raster; the container follows the file suffix."""
        ...


class GroundTruthPreparer(Protocol):
    """
    Turns a raw ground-truth raster into the one metrics are computed on.
    """

    @abstractmethod
    def prepare(self, gt: DepthMap, seg: SegmentationMask) -> DepthMap:
        """
        Densify and mask the ground truth of one sample.

        Args:
            gt: Ground truth as read from disk, possibly sparse
            seg: Segmentation of the same image

        Returns:
            Ground truth restricted to scorable pixels
        """
        ...


class PredictionAligner(Protocol):
    """
    Maps a model's raw output onto metric depth.
    """

    @abstractmethod
    def align(self, model: str, pred: DepthMap) -> tuple[DepthMap, int]:
        """
        Returns:
            Aligned prediction and the number of pixels clamped to 0
        """
        ...


class SampleSource(Protocol):
    """
    Enumerates and loads evaluation samples.
    """

    @abstractmethod
    def sample_ids(self) -> list[str]:
        """Sample IDs in a fixed order."""
        ...

    @abstractmethod
    def load(self, sample_id: str, models: Sequence[str]) -> SceneSample:
        """Load one sample with the predictions of the requested models."""
        ...
