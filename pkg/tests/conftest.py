"""Test configuration."""
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
import pytest
import structlog

from safedepth.application import EvaluateSampleUseCase, EvaluationOptions
from safedepth.domain import (
    DepthMap,
    RgbImage,
    SceneSample,
    SegmentationMask,
    SuperClass,
    WeightTable,
)
from safedepth.infrastructure import (
    AffineAligner,
    FeatureExtractorFactory,
    SkyMaskingPreparer,
    builtin_gidas_table,
    write_depth_png16,
    write_labels_png,
    write_name_table,
    write_rgb,
)

DATASET_NAMES = {1: "car", 2: "person", 3: "pole", 4: "sky", 5: "asphalt"}


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep structlog output off stdout; capture_logs still works inside tests."""
    structlog.configure(logger_factory=structlog.ReturnLoggerFactory())
    yield
    structlog.reset_defaults()


@pytest.fixture
def three_class_weights() -> WeightTable:
    """One super-class per class, weighted 0.5 / 0.3 / 0.2."""
    return WeightTable(
        super_classes=(SuperClass("SA", 0.5), SuperClass("SB", 0.3), SuperClass("SC", 0.2)),
        mapping={"a": "SA", "b": "SB", "c": "SC"},
    )


@pytest.fixture
def three_class_scene() -> SceneSample:
    """
    Classes a/b/c with minimum depths 2/10/40 m and a 50 m scene maximum.
    The prediction is off by 1/2/4 m on a/b/c.
    """
    labels = np.zeros((6, 6), dtype=np.uint16)
    labels[0:2] = 1
    labels[2:4] = 2
    labels[4:6] = 3
    gt = np.zeros((6, 6))
    gt[0:2] = 2.0
    gt[2:4] = 10.0
    gt[4] = 40.0
    gt[5] = 50.0
    pred = gt.copy()
    pred[0:2] += 1.0
    pred[2:4] -= 2.0
    pred[4:6] += 4.0
    return SceneSample(
        id="synthetic/three_class",
        gt=DepthMap.from_array(gt),
        seg=SegmentationMask(labels=labels, id_to_name={1: "a", 2: "b", 3: "c"}),
        pred={"model": DepthMap.from_array(pred)},
    )


@pytest.fixture
def pole_scene() -> SceneSample:
    """
    250 x 400 street: building at 35 m, road at 10 m and a 200 px pole at 5 m.

    Predictions:
        misses_pole: exact, except the pole reads as the building behind it
        uniform_offset: +0.1 m everywhere, pole preserved
        uniform_equal: +0.06 m everywhere, same MAE as misses_pole
    """
    h, w = 250, 400
    labels = np.full((h, w), 1, dtype=np.uint16)
    labels[125:] = 2
    gt = np.full((h, w), 35.0)
    gt[125:] = 10.0
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[:125] = (90, 90, 110)
    rgb[125:] = (60, 60, 60)

    pole = (slice(100, 140), slice(200, 205))
    labels[pole] = 3
    gt[pole] = 5.0
    rgb[pole] = (220, 220, 40)

    missed = gt.copy()
    missed[pole] = 35.0
    return SceneSample(
        id="street/pole",
        gt=DepthMap.from_array(gt),
        seg=SegmentationMask(labels=labels, id_to_name={1: "building", 2: "asphalt", 3: "pole"}),
        pred={
            "misses_pole": DepthMap.from_array(missed),
            "uniform_offset": DepthMap.from_array(gt + 0.1),
            "uniform_equal": DepthMap.from_array(gt + 0.06),
        },
        rgb=RgbImage(pixels=rgb),
    )


@pytest.fixture
def make_evaluator() -> Callable[..., EvaluateSampleUseCase]:
    """Factory for a sample evaluator on the built-in table."""

    def build(
        weights: WeightTable | None = None,
        options: EvaluationOptions | None = None,
        kind: str = "edge",
    ) -> EvaluateSampleUseCase:
        return EvaluateSampleUseCase(
            weights=weights or builtin_gidas_table(),
            extractor=FeatureExtractorFactory.create(kind),
            preparer=SkyMaskingPreparer(),
            aligner=AffineAligner(),
            options=options,
        )

    return build


@pytest.fixture
def evaluator(make_evaluator) -> EvaluateSampleUseCase:
    """Sample evaluator with default options."""
    return make_evaluator()


class InMemorySampleSource:
    """SampleSource over samples already in memory."""

    def __init__(self, samples: Sequence[SceneSample]) -> None:
        self._samples = {s.id: s for s in samples}

    def sample_ids(self) -> list[str]:
        return list(self._samples)

    def load(self, sample_id: str, models: Sequence[str]) -> SceneSample:
        sample = self._samples[sample_id]
        pred = {m: p for m, p in sample.pred.items() if m in models}
        return SceneSample(sample.id, sample.gt, sample.seg, pred, sample.rgb)


@pytest.fixture
def memory_source() -> type[InMemorySampleSource]:
    return InMemorySampleSource


def street_frame(seed: int, sparse: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Ground truth (meters, multiples of 1/256), labels and RGB of a 32 x 48 frame.
    Sky rows carry no ground truth.
    """
    rng = np.random.default_rng(seed)
    h, w = 32, 48
    rows = np.arange(h)[:, None].repeat(w, axis=1).astype(float)
    labels = np.full((h, w), 5, dtype=np.uint16)
    gt = 40.0 - rows
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[..., 0] = 50 + rows.astype(np.uint8)
    rgb[..., 1] = 50

    labels[:8] = 4
    gt[:8] = 0.0
    rgb[:8] = (120, 160, 230)

    car = (slice(16, 26), slice(4, 16))
    labels[car] = 1
    gt[car] = 12.0 + seed % 5
    rgb[car] = (200, 30, 30)

    person = (slice(12, 28), slice(20, 26))
    labels[person] = 2
    gt[person] = 8.0 + 0.5 * (seed % 3)
    rgb[person] = (30, 200, 30)

    pole = (slice(8, 32), slice(36, 38))
    labels[pole] = 3
    gt[pole] = 5.0 + seed % 4
    rgb[pole] = (240, 240, 240)

    gt = np.round(gt * 256) / 256
    if sparse:
        drop = rng.random((h, w)) < 0.3
        gt[drop & (labels != 4)] = 0.0
    return gt, labels, rgb


@pytest.fixture
def write_dataset(tmp_path: Path) -> Callable[..., Path]:
    """
    Write a synthetic dataset root and return it.

    Every frame has predictions for `good` (+0.25 m) and `coarse` (x1.1);
    frames listed in `skip_coarse` lack the `coarse` file.
    """

    def build(
        scenes: int = 2,
        frames: int = 2,
        *,
        sparse: bool = False,
        skip_coarse: Sequence[str] = (),
    ) -> Path:
        root = tmp_path / "dataset"
        write_name_table(root / "labels.txt", DATASET_NAMES)
        seed = 0
        for s in range(scenes):
            for f in range(frames):
                frame_dir = root / f"scene_{s:02d}" / f"frame_{f:03d}"
                gt, labels, rgb = street_frame(seed, sparse=sparse)
                seed += 1
                write_depth_png16(frame_dir / "gt.png", DepthMap.from_array(gt, gt > 0))
                write_labels_png(
                    frame_dir / "labels.png",
                    SegmentationMask(labels=labels, id_to_name=DATASET_NAMES),
                )
                write_rgb(frame_dir / "rgb.png", RgbImage(pixels=rgb))
                dense = np.where(gt > 0, gt, 60.0)
                good = DepthMap.from_array(dense + 0.25)
                write_depth_png16(frame_dir / "pred" / "good.png", good)
                sample_id = f"scene_{s:02d}/frame_{f:03d}"
                if sample_id not in skip_coarse:
                    write_depth_png16(
                        frame_dir / "pred" / "coarse.png", DepthMap.from_array(dense * 1.1)
                    )
        return root

    return build
