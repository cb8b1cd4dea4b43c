"""
Dataset Layout - Discovery of evaluation samples on disk.

    <root>/<scene>/<frame>/rgb.png
                          /gt.png | gt.f32
                          /labels.png
                          /pred/<model>.png | <model>.f32

The label name table `labels.txt` is looked up in the frame directory,
then the scene directory, then the root.
"""
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Final

import structlog

from safedepth.domain import (
    DepthMap,
    IoError,
    MissingPrediction,
    SceneSample,
    SegmentationMask,
)
from safedepth.infrastructure.raster_io import FileRasterReader

logger = structlog.get_logger(__name__)

DEPTH_SUFFIXES: Final[tuple[str, ...]] = (".png", ".f32")
NAME_TABLE_FILE: Final[str] = "labels.txt"


@dataclass(frozen=True)
class SampleRef:
    """Paths of one frame directory; optional files are None when absent."""
    id: str
    scene: str
    frame_dir: Path
    gt_path: Path
    labels_path: Path | None
    rgb_path: Path | None
    name_table_path: Path | None

    def prediction_path(self, model: str) -> Path:
        """
        Raises:
            MissingPrediction: If pred/<model>.png and .f32 are both absent
        """
        for suffix in DEPTH_SUFFIXES:
            path = self.frame_dir / "pred" / f"{model}{suffix}"
            if path.is_file():
                return path
        raise MissingPrediction(f"{self.id}: no prediction for model {model!r}")

    def models(self) -> list[str]:
        pred_dir = self.frame_dir / "pred"
        if not pred_dir.is_dir():
            return []
        return sorted({p.stem for p in pred_dir.iterdir() if p.suffix in DEPTH_SUFFIXES})


def _first_file(*candidates: Path) -> Path | None:
    return next((c for c in candidates if c.is_file()), None)


def discover_samples(root: Path) -> list[SampleRef]:
    """
    All frame directories under root that hold a ground-truth raster.

    Returns:
        References sorted by "scene/frame" id
    """
    root = Path(root)
    if not root.is_dir():
        raise IoError(f"dataset root {root} is not a directory")

    refs: list[SampleRef] = []
    for scene_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for frame_dir in sorted(p for p in scene_dir.iterdir() if p.is_dir()):
            gt = _first_file(*(frame_dir / f"gt{s}" for s in DEPTH_SUFFIXES))
            if gt is None:
                logger.debug("frame_without_ground_truth", frame_dir=str(frame_dir))
                continue
            refs.append(
                SampleRef(
                    id=f"{scene_dir.name}/{frame_dir.name}",
                    scene=scene_dir.name,
                    frame_dir=frame_dir,
                    gt_path=gt,
                    labels_path=_first_file(frame_dir / "labels.png"),
                    rgb_path=_first_file(frame_dir / "rgb.png"),
                    name_table_path=_first_file(
                        frame_dir / NAME_TABLE_FILE,
                        scene_dir / NAME_TABLE_FILE,
                        root / NAME_TABLE_FILE,
                    ),
                )
            )
    logger.info("samples_discovered", root=str(root), samples=len(refs))
    return refs


def load_sample(
    ref: SampleRef,
    models: Iterable[str],
    reader: FileRasterReader,
) -> SceneSample:
    """
    Read the rasters of one frame.

    Models without a prediction file are left out of `pred`; the caller
    decides whether that is a failure. A frame without labels.png gets an
    all-UNLABELED mask.

    Raises:
        IoError: If labels.png exists but no name table is found
    """
    gt = reader.read_depth(ref.gt_path)
    if ref.labels_path is None:
        seg = SegmentationMask.unlabeled(*gt.shape)
    else:
        if ref.name_table_path is None:
            raise IoError(f"{ref.id}: labels.png has no {NAME_TABLE_FILE} sidecar")
        seg = reader.read_labels(ref.labels_path, reader.read_name_table(ref.name_table_path))
    rgb = reader.read_rgb(ref.rgb_path) if ref.rgb_path is not None else None

    pred: dict[str, DepthMap] = {}
    for model in models:
        try:
            pred[model] = reader.read_depth(ref.prediction_path(model))
        except MissingPrediction:
            logger.warning("prediction_missing", sample_id=ref.id, model=model)
    return SceneSample(id=ref.id, gt=gt, seg=seg, pred=pred, rgb=rgb)


class DirectorySampleSource:
    """
    SampleSource over a dataset root laid out as <scene>/<frame>/.
    """

    def __init__(self, root: Path, reader: FileRasterReader) -> None:
        self._reader = reader
        self._refs = {ref.id: ref for ref in discover_samples(root)}

    def sample_ids(self) -> list[str]:
        return list(self._refs)

    def ref(self, sample_id: str) -> SampleRef:
        return self._refs[sample_id]

    def load(self, sample_id: str, models: Sequence[str]) -> SceneSample:
        return load_sample(self._refs[sample_id], models, self._reader)
