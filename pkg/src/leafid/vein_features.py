"""Vein-density ratios from grayscale morphological top-hats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import FeatureError
from .imaging import otsu_threshold

VEIN_RADII = (1, 2, 3, 4)


def disk_element(radius: int) -> np.ndarray:
    """Flat disk footprint: (dx, dy) belongs iff dx^2 + dy^2 <= radius^2."""
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return (xx * xx + yy * yy) <= radius * radius


def gray_opening(gray: np.ndarray, radius: int) -> np.ndarray:
    """Erosion then dilation with a flat disk; border pixels use only
    in-image neighbors (pad 255 for the min, 0 for the max)."""
    if not 1 <= radius <= 4:
        raise ValueError("radius must be in [1, 4]")
    gray = np.asarray(gray, dtype=np.uint8)
    fp = disk_element(radius)
    eroded = ndimage.grey_erosion(gray, footprint=fp, mode="constant", cval=255)
    return ndimage.grey_dilation(eroded, footprint=fp, mode="constant", cval=0)


@dataclass
class VeinFeatures:
    v: tuple
    a: tuple
    area: int

    def as_array(self):
        return np.array(self.v, dtype=np.float64)


def vein_features(gray: np.ndarray, mask: np.ndarray, dark_veins: bool = False) -> VeinFeatures:
    """Top-hat vein ratios V_k = A_k / A for disk radii 1..4.

    Each radius' opening residual is thresholded by Otsu over the foreground
    residual values; surviving pixels are counted inside the mask eroded by
    one pixel, so the leaf margin's own top-hat rim is not taken for vein.
    Set ``dark_veins`` when veins are darker than the lamina.
    """
    gray = np.asarray(gray, dtype=np.uint8)
    mask = np.asarray(mask, dtype=bool)
    area = int(np.count_nonzero(mask))
    if area == 0:
        raise FeatureError("empty mask")
    if dark_veins:
        gray = (255 - gray.astype(np.int16)).astype(np.uint8)
    # a bright background can never drive the top-hat, so the features do not
    # depend on whatever surrounds the leaf
    gray = np.where(mask, gray, np.uint8(255))

    # Openings only reach 2 * max radius = 8 px, so working on the mask's
    # bounding box padded by 8 px reproduces the full-frame values at every
    # mask pixel.
    ys, xs = np.nonzero(mask)
    pad = 2 * max(VEIN_RADII)
    y0 = max(int(ys.min()) - pad, 0)
    y1 = min(int(ys.max()) + pad + 1, mask.shape[0])
    x0 = max(int(xs.min()) - pad, 0)
    x1 = min(int(xs.max()) + pad + 1, mask.shape[1])
    gray = gray[y0:y1, x0:x1]
    mask = mask[y0:y1, x0:x1]

    interior = ndimage.binary_erosion(mask, structure=disk_element(1), border_value=0)
    if not interior.any():
        raise FeatureError("mask vanished under margin erosion")

    counts = []
    for radius in VEIN_RADII:
        residual = gray.astype(np.int16) - gray_opening(gray, radius).astype(np.int16)
        residual = residual.astype(np.uint8)  # opening is anti-extensive, so residual >= 0
        t = otsu_threshold(residual[mask])
        veins = (residual > t) & interior
        counts.append(int(np.count_nonzero(veins)))

    return VeinFeatures(
        v=tuple(a / area for a in counts),
        a=tuple(counts),
        area=area,
    )
