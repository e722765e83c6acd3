"""Polar Fourier shape descriptors of the leaf silhouette.

The silhouette is resampled on a centroid-anchored polar raster and a small
2-D DFT is taken over it. Magnitudes are kept (rotation turns into a circular
shift of the angle axis, which the magnitude ignores), the DC term is reduced
to an area ratio against the enclosing circle, and every other coefficient is
divided by the DC magnitude. The result is invariant to translation, rotation
and scale up to raster resampling error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FeatureError, SegmentationError

DEFAULT_RADIAL = 64
DEFAULT_ANGULAR = 128
RADIAL_FREQS = 4
ANGULAR_FREQS = 6


@dataclass
class PolarGrid:
    """Silhouette samples on an (radial x angular) polar raster."""

    samples: np.ndarray
    rmax: float

    @property
    def radial(self) -> int:
        return self.samples.shape[0]

    @property
    def angular(self) -> int:
        return self.samples.shape[1]


def polar_resample(
    mask: np.ndarray,
    centroid: tuple[float, float],
    radial: int = DEFAULT_RADIAL,
    angular: int = DEFAULT_ANGULAR,
) -> PolarGrid:
    """Bilinear polar raster of the mask around the centroid.

    Ring k is sampled at radius (k + 0.5) * rmax / radial, spoke i at angle
    i * 2*pi / angular, where rmax is the largest centroid-to-foreground
    distance. Sample positions are formed from the centroid's fractional part
    so an integer translation of mask and centroid reproduces the grid
    bit for bit.
    """
    if radial < 8 or angular < 8:
        raise ValueError("polar raster needs at least 8 rings and 8 spokes")
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise SegmentationError("cannot resample an empty mask")

    xc, yc = float(centroid[0]), float(centroid[1])
    dx = xs - xc
    dy = ys - yc
    rmax = math.sqrt(float(np.max(dx * dx + dy * dy)))
    if rmax <= 0:
        raise SegmentationError("mask collapses onto its centroid")

    icx, fcx = math.floor(xc), xc - math.floor(xc)
    icy, fcy = math.floor(yc), yc - math.floor(yc)

    radii = (np.arange(radial) + 0.5) * (rmax / radial)
    theta = np.arange(angular) * (2.0 * math.pi / angular)
    px = fcx + radii[:, None] * np.cos(theta)[None, :]
    py = fcy + radii[:, None] * np.sin(theta)[None, :]

    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = mask

    gx = np.floor(px)
    gy = np.floor(py)
    fx = px - gx
    fy = py - gy
    ix = np.clip(gx.astype(np.int64) + icx + 1, 0, w + 1)
    iy = np.clip(gy.astype(np.int64) + icy + 1, 0, h + 1)
    ix1 = np.minimum(ix + 1, w + 1)
    iy1 = np.minimum(iy + 1, h + 1)

    samples = (
        padded[iy, ix] * (1 - fx) * (1 - fy)
        + padded[iy, ix1] * fx * (1 - fy)
        + padded[iy1, ix] * (1 - fx) * fy
        + padded[iy1, ix1] * fx * fy
    )
    # bilinear weights sum to 1 only up to roundoff
    np.clip(samples, 0.0, 1.0, out=samples)
    return PolarGrid(samples=samples, rmax=rmax)


def pft_descriptors(grid: PolarGrid, radial_freqs: int = RADIAL_FREQS, angular_freqs: int = ANGULAR_FREQS) -> np.ndarray:
    """Normalized polar Fourier magnitudes, radial-frequency major.

    Returns (radial_freqs + 1) * (angular_freqs + 1) values. Each polar sample
    carries its ring-area weight r*dr*dtheta, which makes the DC coefficient
    approximate the silhouette area in px^2; dividing it by 2*pi*rmax^2 then
    cancels scale, and the remaining coefficients are ratios to the DC
    magnitude.
    """
    f = np.asarray(grid.samples, dtype=np.float64)
    nr, nt = f.shape
    dr = grid.rmax / nr
    dtheta = 2.0 * math.pi / nt
    weighted = f * ((np.arange(nr) + 0.5) * dr * dr * dtheta)[:, None]

    rho = np.arange(radial_freqs + 1)
    phi = np.arange(angular_freqs + 1)
    basis_r = np.exp(-2j * math.pi * np.outer(rho, np.arange(nr)) / nr)
    basis_t = np.exp(-2j * math.pi * np.outer(np.arange(nt), phi) / nt)
    coeffs = basis_r @ weighted.astype(np.complex128) @ basis_t
    mags = np.abs(coeffs)

    dc = mags[0, 0]
    if dc <= 0:
        raise FeatureError("empty shape: zero DC coefficient")
    values = mags / dc
    values[0, 0] = dc / (2.0 * math.pi * grid.rmax * grid.rmax)
    return values.ravel()
