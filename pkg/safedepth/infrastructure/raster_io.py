"""
Raster IO - Depth, label and camera image containers.

Formats:
- 16-bit depth PNG: meters = raw / scale_divisor, raw 0 marks a missing pixel.
- f32 depth: 16-byte header (8-byte magic, little-endian uint32 width and
  height) followed by width*height little-endian float32 in row-major order.
  NaN or negative values mark missing pixels.
- Label PNG: 8- or 16-bit single channel; the dtype's max value is UNLABELED.
- Name table: one `id<TAB>name` per line, `#` comments allowed.
"""
from pathlib import Path
from typing import Final

import cv2
import numpy as np
import structlog
from numpy.typing import NDArray
from tenacity import (
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from safedepth.domain import (
    UNLABELED,
    BadFormat,
    DepthMap,
    IoError,
    RgbImage,
    SegmentationMask,
)

logger = structlog.get_logger(__name__)

DEFAULT_SCALE_DIVISOR: Final[float] = 256.0
DEFAULT_READ_ATTEMPTS: Final[int] = 3
F32_MAGIC: Final[bytes] = b"SDEPTH32"
F32_HEADER: Final[np.dtype] = np.dtype([("magic", "S8"), ("width", "<u4"), ("height", "<u4")])
TRANSIENT_ERRORS: Final[tuple[type[OSError], ...]] = (
    TimeoutError,
    BlockingIOError,
    InterruptedError,
)


def read_bytes(path: Path, attempts: int = DEFAULT_READ_ATTEMPTS) -> bytes:
    """
    Read a whole file, retrying transient filesystem errors.

    Raises:
        IoError: If the file is missing or keeps failing
    """
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(attempts),
            wait=wait_exponential(multiplier=0.05, min=0.05, max=2),
            retry=retry_if_exception_type(TRANSIENT_ERRORS),
            reraise=True,
        ):
            with attempt:
                return Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    raise IoError(f"cannot read {path}")


def write_bytes(path: Path, data: bytes) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def _decode_png(path: Path, flags: int, attempts: int) -> NDArray:
    data = read_bytes(path, attempts)
    image = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), flags)
    if image is None:
        raise BadFormat(f"{path} is not a decodable image")
    return image


def _encode_png(path: Path, image: NDArray) -> None:
    ok, buf = cv2.imencode(".png", image)
    if not ok:
        raise BadFormat(f"cannot encode {path} as PNG")
    write_bytes(path, buf.tobytes())


def read_depth_png16(
    path: Path,
    scale_divisor: float = DEFAULT_SCALE_DIVISOR,
    *,
    attempts: int = DEFAULT_READ_ATTEMPTS,
) -> DepthMap:
    """
    Read a 16-bit single-channel depth PNG.

    Raises:
        IoError: If the file cannot be read
        BadFormat: If it is not a 16-bit single-channel PNG
    """
    if scale_divisor <= 0:
        raise ValueError(f"scale_divisor must be positive, got {scale_divisor}")
    raw = _decode_png(path, cv2.IMREAD_UNCHANGED, attempts)
    if raw.ndim != 2 or raw.dtype != np.uint16:
        raise BadFormat(f"{path}: expected 16-bit single-channel PNG, got {raw.dtype} {raw.shape}")
    return DepthMap(values=raw.astype(np.float64) / scale_divisor, valid=raw > 0)


def write_depth_png16(
    path: Path,
    depth: DepthMap,
    scale_divisor: float = DEFAULT_SCALE_DIVISOR,
) -> None:
    """
    Write a depth map as 16-bit PNG; valid pixels never quantize to 0.

    Depths beyond 65535 / scale_divisor are clipped to that maximum with a warning.
    """
    raw = np.rint(depth.values * scale_divisor)
    limit = np.iinfo(np.uint16).max
    clipped = int(np.count_nonzero(depth.valid & (raw > limit)))
    if clipped:
        logger.warning(
            "depth_clipped_on_write",
            path=str(path),
            clipped_pixels=clipped,
            max_depth=limit / scale_divisor,
        )
    raw = np.clip(raw, 1, limit)
    raw = np.where(depth.valid, raw, 0).astype(np.uint16)
    _encode_png(path, raw)


def read_depth_f32(path: Path, *, attempts: int = DEFAULT_READ_ATTEMPTS) -> DepthMap:
    """
    Read the headered little-endian float32 depth container.

    Raises:
        IoError: If the file cannot be read
        BadFormat: On a wrong magic or a size that disagrees with the header
    """
    data = read_bytes(path, attempts)
    if len(data) < F32_HEADER.itemsize:
        raise BadFormat(f"{path}: file shorter than the f32 header")
    header = np.frombuffer(data[: F32_HEADER.itemsize], dtype=F32_HEADER)[0]
    if bytes(header["magic"]) != F32_MAGIC:
        raise BadFormat(f"{path}: bad magic {bytes(header['magic'])!r}")
    width, height = int(header["width"]), int(header["height"])
    expected = F32_HEADER.itemsize + 4 * width * height
    if len(data) != expected:
        raise BadFormat(f"{path}: expected {expected} bytes for {width}x{height}, got {len(data)}")
    raw = np.frombuffer(data, dtype="<f4", offset=F32_HEADER.itemsize).reshape(height, width)
    return DepthMap.from_array(raw.astype(np.float64))


def write_depth_f32(path: Path, depth: DepthMap) -> None:
    """Write the headered float32 container; invalid pixels become NaN."""
    header = np.array([(F32_MAGIC, depth.width, depth.height)], dtype=F32_HEADER)
    body = np.where(depth.valid, depth.values, np.nan).astype("<f4")
    write_bytes(path, header.tobytes() + body.tobytes())


def read_name_table(path: Path, *, attempts: int = DEFAULT_READ_ATTEMPTS) -> dict[int, str]:
    """
    Read an `id<TAB>name` sidecar.

    Raises:
        BadFormat: On malformed lines or duplicate IDs
    """
    table: dict[int, str] = {}
    text = read_bytes(path, attempts).decode("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.rstrip("\r\n").split("\t")
        if len(parts) != 2 or not parts[0].strip().isdigit() or not parts[1].strip():
            raise BadFormat(f"{path}:{lineno}: expected 'id<TAB>name', got {line!r}")
        label_id, name = int(parts[0]), parts[1].strip()
        if label_id in table:
            raise BadFormat(f"{path}:{lineno}: duplicate label id {label_id}")
        if label_id == UNLABELED:
            raise BadFormat(f"{path}:{lineno}: id {UNLABELED} is reserved for unlabeled pixels")
        table[label_id] = name
    return table


def write_name_table(path: Path, table: dict[int, str]) -> None:
    lines = [f"{i}\t{name}" for i, name in sorted(table.items())]
    write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_labels_png(
    path: Path,
    name_table: dict[int, str],
    *,
    attempts: int = DEFAULT_READ_ATTEMPTS,
) -> SegmentationMask:
    """
    Read a single-channel label PNG.

    Raises:
        BadFormat: If the image has more than one channel or an unsupported depth
        UnknownLabel: If an ID is absent from the name table
    """
    raw = _decode_png(path, cv2.IMREAD_UNCHANGED, attempts)
    if raw.ndim != 2:
        raise BadFormat(f"{path}: label image must have one channel, got shape {raw.shape}")
    if raw.dtype == np.uint8:
        labels = raw.astype(np.uint16)
        labels[raw == np.iinfo(np.uint8).max] = UNLABELED
    elif raw.dtype == np.uint16:
        labels = raw
    else:
        raise BadFormat(f"{path}: label image must be 8- or 16-bit, got {raw.dtype}")
    return SegmentationMask(labels=labels, id_to_name=name_table)


def write_labels_png(path: Path, seg: SegmentationMask) -> None:
    _encode_png(path, np.asarray(seg.labels, dtype=np.uint16))


def read_rgb(path: Path, *, attempts: int = DEFAULT_READ_ATTEMPTS) -> RgbImage:
    """Read a camera image as 8-bit RGB."""
    bgr = _decode_png(path, cv2.IMREAD_COLOR, attempts)
    return RgbImage(pixels=cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB))


def write_rgb(path: Path, img: RgbImage) -> None:
    _encode_png(path, cv2.cvtColor(np.ascontiguousarray(img.pixels), cv2.COLOR_RGB2BGR))


def read_depth(
    path: Path,
    scale_divisor: float = DEFAULT_SCALE_DIVISOR,
    *,
    attempts: int = DEFAULT_READ_ATTEMPTS,
) -> DepthMap:
    """Dispatch on the file suffix (.png or .f32)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return read_depth_png16(path, scale_divisor, attempts=attempts)
    if suffix == ".f32":
        return read_depth_f32(path, attempts=attempts)
    raise BadFormat(f"{path}: unsupported depth container {suffix!r}")


def write_depth(path: Path, depth: DepthMap, scale_divisor: float = DEFAULT_SCALE_DIVISOR) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        write_depth_png16(path, depth, scale_divisor)
    elif suffix == ".f32":
        write_depth_f32(path, depth)
    else:
        raise BadFormat(f"{path}: unsupported depth container {suffix!r}")


class FileRasterReader:
    """
    RasterReader backed by the local filesystem.
    """

    def __init__(
        self,
        scale_divisor: float = DEFAULT_SCALE_DIVISOR,
        attempts: int = DEFAULT_READ_ATTEMPTS,
    ) -> None:
        self._scale_divisor = scale_divisor
        self._attempts = attempts

    def read_depth(self, path: Path) -> DepthMap:
        return read_depth(path, self._scale_divisor, attempts=self._attempts)

    def read_labels(self, path: Path, name_table: dict[int, str]) -> SegmentationMask:
        return read_labels_png(path, name_table, attempts=self._attempts)

    def read_rgb(self, path: Path) -> RgbImage:
        return read_rgb(path, attempts=self._attempts)

    def read_name_table(self, path: Path) -> dict[int, str]:
        return read_name_table(path, attempts=self._attempts)


class FileRasterWriter:
    """
    RasterWriter backed by the local filesystem.
    """

    def __init__(self, scale_divisor: float = DEFAULT_SCALE_DIVISOR) -> None:
        self._scale_divisor = scale_divisor

    def write_depth(self, path: Path, depth: DepthMap) -> None:
        write_depth(path, depth, self._scale_divisor)
        logger.debug("depth_written", path=str(path), valid_pixels=depth.valid_count)
