"""
Feature Extractors - Edge contours and corner seeds on the unmasked image.

Edges: grayscale -> Sobel gradients with hysteresis (Canny) -> border
following (Suzuki-Abe, via OpenCV) -> dilation by a Euclidean disk.
Corners: Gaussian-windowed structure tensor -> Harris or Shi-Tomasi
response -> 3x3 non-maximum suppression -> one seed per plateau -> disk.
"""
from typing import Final

import cv2
import numpy as np
import structlog
from numpy.typing import NDArray
from scipy import ndimage
from skimage.morphology import binary_dilation, disk

from safedepth.domain import (
    CornerMethod,
    DegenerateImage,
    FeatureExtractor,
    FeatureKind,
    FeatureMap,
    FeatureParams,
    RgbImage,
)

logger = structlog.get_logger(__name__)

GRAY_WEIGHTS: Final[NDArray[np.float64]] = np.array([0.299, 0.587, 0.114])
EIGHT_CONNECTED: Final[NDArray[np.bool_]] = np.ones((3, 3), dtype=bool)


def grayscale(img: RgbImage) -> NDArray[np.float64]:
    """Luma 0.299 R + 0.587 G + 0.114 B as float64."""
    return np.asarray(img.pixels, dtype=np.float64) @ GRAY_WEIGHTS


def _check_size(img: RgbImage, params: FeatureParams) -> None:
    if img.width < params.window or img.height < params.window:
        raise DegenerateImage(
            f"image {img.width}x{img.height} is smaller than the {params.window}px window"
        )


def dilate(mask: NDArray[np.bool_], radius: int) -> NDArray[np.bool_]:
    """Dilate by a disk of pixel-center distance <= radius."""
    if radius <= 0:
        return np.array(mask, dtype=bool, copy=True)
    return np.asarray(binary_dilation(mask, footprint=disk(radius)), dtype=bool)


def trace_borders(binary: NDArray[np.bool_]) -> NDArray[np.bool_]:
    """
    Pixels on the borders of every connected component (outer and hole).

    Uses Suzuki-Abe border following with no chain compression, so every
    border pixel is returned, not just the polygon vertices.
    """
    image = np.ascontiguousarray(binary, dtype=np.uint8)
    contours, _ = cv2.findContours(image, cv2.RETR_LIST, cv2.CHAIN_APPROX_NONE)
    out = np.zeros(image.shape, dtype=bool)
    for contour in contours:
        pts = contour.reshape(-1, 2)
        out[pts[:, 1], pts[:, 0]] = True
    return out


def edge_raster(img: RgbImage, params: FeatureParams) -> NDArray[np.bool_]:
    """
    Binary edge raster from hysteresis-thresholded gradient magnitude.

    Non-maximum suppression keeps the lower-index pixel of a step, so top and
    left outlines sit one pixel outside an object, bottom and right ones inside.
    """
    gray = np.clip(np.rint(grayscale(img)), 0, 255).astype(np.uint8)
    edges = cv2.Canny(gray, params.edge_low, params.edge_high, apertureSize=3, L2gradient=True)
    return edges > 0


def corner_response(img: RgbImage, params: FeatureParams) -> NDArray[np.float64]:
    """Harris det(M) - k tr(M)^2, or Shi-Tomasi min eigenvalue, per pixel."""
    gray = grayscale(img)
    ix = cv2.Sobel(gray, cv2.CV_64F, 1, 0, ksize=3)
    iy = cv2.Sobel(gray, cv2.CV_64F, 0, 1, ksize=3)
    size = (params.window, params.window)
    sxx = cv2.GaussianBlur(ix * ix, size, 0)
    syy = cv2.GaussianBlur(iy * iy, size, 0)
    sxy = cv2.GaussianBlur(ix * iy, size, 0)
    det = sxx * syy - sxy * sxy
    trace = sxx + syy
    if params.corner_method is CornerMethod.SHI_TOMASI:
        disc = np.maximum(trace * trace - 4.0 * det, 0.0)
        return 0.5 * (trace - np.sqrt(disc))
    return det - params.corner_k * trace * trace


def corner_seeds(response: NDArray[np.float64], rel_threshold: float) -> NDArray[np.bool_]:
    """
    Local maxima of the response above rel_threshold * max.

    Equal neighbouring maxima form a plateau; only its first pixel in
    row-major order is kept so a single corner yields a single seed.
    """
    peak = float(response.max()) if response.size else 0.0
    seeds = np.zeros(response.shape, dtype=bool)
    if peak <= 0.0:
        return seeds
    local_max = response == ndimage.maximum_filter(response, size=3, mode="nearest")
    candidates = local_max & (response >= rel_threshold * peak) & (response > 0)
    labels, count = ndimage.label(candidates, structure=EIGHT_CONNECTED)
    if count == 0:
        return seeds
    flat = labels.ravel()
    _, first = np.unique(flat, return_index=True)
    first = first[flat[first] > 0]
    seeds.ravel()[first] = True
    return seeds


class BorderFollowingEdgeExtractor:
    """
    Contour pixels of the edge raster, thickened by edge_thickness.
    """

    @property
    def kind(self) -> FeatureKind:
        return FeatureKind.EDGE

    def extract(self, img: RgbImage, params: FeatureParams) -> FeatureMap:
        _check_size(img, params)
        contour = trace_borders(edge_raster(img, params))
        active = dilate(contour, params.edge_thickness)
        logger.debug("edges_extracted", contour_pixels=int(contour.sum()), active=int(active.sum()))
        return FeatureMap(active=active, kind=FeatureKind.EDGE)


class CornerExtractor:
    """
    Corner seeds stamped with a disk of corner_radius.
    """

    @property
    def kind(self) -> FeatureKind:
        return FeatureKind.CORNER

    def extract(self, img: RgbImage, params: FeatureParams) -> FeatureMap:
        _check_size(img, params)
        seeds = corner_seeds(corner_response(img, params), params.corner_rel_threshold)
        active = dilate(seeds, params.corner_radius)
        logger.debug(
            "corners_extracted",
            method=params.corner_method.value,
            seeds=int(seeds.sum()),
            active=int(active.sum()),
        )
        return FeatureMap(active=active, kind=FeatureKind.CORNER)


class UnionExtractor:
    """
    OR of several extractors' maps.
    """

    def __init__(self, extractors: list[FeatureExtractor]) -> None:
        self._extractors = extractors

    @property
    def kind(self) -> FeatureKind:
        return FeatureKind.UNION

    def extract(self, img: RgbImage, params: FeatureParams) -> FeatureMap:
        maps = [e.extract(img, params) for e in self._extractors]
        active = np.logical_or.reduce([m.active for m in maps])
        return FeatureMap(active=active, kind=FeatureKind.UNION)


class FeatureExtractorFactory:
    """
    Builds the extractor for a configured feature kind.
    """

    @staticmethod
    def create(kind: FeatureKind | str) -> FeatureExtractor:
        kind = FeatureKind(kind)
        if kind is FeatureKind.EDGE:
            return BorderFollowingEdgeExtractor()
        if kind is FeatureKind.CORNER:
            return CornerExtractor()
        return UnionExtractor([BorderFollowingEdgeExtractor(), CornerExtractor()])


def extract_edges(img: RgbImage, params: FeatureParams | None = None) -> FeatureMap:
    """Edge feature map of an unmasked image."""
    return BorderFollowingEdgeExtractor().extract(img, params or FeatureParams())


def extract_corners(img: RgbImage, params: FeatureParams | None = None) -> FeatureMap:
    """Corner feature map of an unmasked image."""
    return CornerExtractor().extract(img, params or FeatureParams())
