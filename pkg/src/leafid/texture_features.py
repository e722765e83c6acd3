"""GLCM Haralick statistics and lacunarity measures over the leaf region."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FeatureError

DIRECTIONS = (0, 45, 90, 135)
# pixel offsets (drow, dcol) per direction at distance 1
_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}
DEFAULT_LEVELS = 8
LACUNARITY_POWERS = (2, 4, 6)
CHANNELS = ("r", "g", "b", "gray")


@dataclass
class Glcm:
    """Symmetric, normalized co-occurrence matrix at distance 1."""

    p: np.ndarray
    levels: int
    direction: int


def compute_glcm(gray: np.ndarray, mask: np.ndarray, levels: int = DEFAULT_LEVELS, direction: int = 0) -> Glcm:
    """Co-occurrence frequencies of quantized intensities along one direction.

    Intensities are quantized to ``levels`` uniform bins of [0, 255]; a pixel
    pair counts only when both pixels are foreground, and both orders are
    accumulated so the matrix is symmetric.
    """
    if not (2 <= levels <= 256):
        raise ValueError("levels must be in [2, 256]")
    if direction not in _OFFSETS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    gray = np.asarray(gray, dtype=np.uint8)
    mask = np.asarray(mask, dtype=bool)

    q = (gray.astype(np.int64) * levels) >> 8
    drow, dcol = _OFFSETS[direction]
    h, w = gray.shape

    r0 = slice(max(0, -drow), min(h, h - drow))
    c0 = slice(max(0, -dcol), min(w, w - dcol))
    r1 = slice(max(0, drow), min(h, h + drow))
    c1 = slice(max(0, dcol), min(w, w + dcol))

    a = q[r0, c0]
    b = q[r1, c1]
    valid = mask[r0, c0] & mask[r1, c1]
    if not valid.any():
        raise FeatureError("no within-mask pixel pairs for this direction")

    idx = a[valid] * levels + b[valid]
    counts = np.bincount(idx, minlength=levels * levels).reshape(levels, levels).astype(np.float64)
    counts = counts + counts.T
    return Glcm(p=counts / counts.sum(), levels=levels, direction=direction)


@dataclass
class HaralickFeatures:
    asm: float
    contrast: float
    idm: float
    entropy: float
    correlation: float

    def as_array(self):
        return np.array(
            [self.asm, self.contrast, self.idm, self.entropy, self.correlation],
            dtype=np.float64,
        )


def haralick_features(glcm: Glcm) -> HaralickFeatures:
    """Five Haralick statistics of a normalized GLCM.

    Angular second moment sum(p^2), contrast sum((i-j)^2 p), inverse
    difference moment sum(p / (1 + (i-j)^2)), entropy -sum(p ln p) and the
    normalized correlation; a matrix with zero spread along either axis gets
    correlation 0.
    """
    p = glcm.p
    n = glcm.levels
    i = np.arange(1, n + 1, dtype=np.float64)
    diff2 = (i[:, None] - i[None, :]) ** 2

    asm = float(np.sum(p * p))
    contrast = float(np.sum(diff2 * p))
    idm = float(np.sum(p / (1.0 + diff2)))
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))

    pi = p.sum(axis=1)
    pj = p.sum(axis=0)
    mu_i = float(np.sum(i * pi))
    mu_j = float(np.sum(i * pj))
    var_i = float(np.sum((i - mu_i) ** 2 * pi))
    var_j = float(np.sum((i - mu_j) ** 2 * pj))
    if var_i <= 0.0 or var_j <= 0.0:
        correlation = 0.0
    else:
        second = float(np.sum(np.outer(i, i) * p))
        correlation = (second - mu_i * mu_j) / (math.sqrt(var_i) * math.sqrt(var_j))
    return HaralickFeatures(asm=asm, contrast=contrast, idm=idm, entropy=entropy, correlation=correlation)


def glcm_feature_vector(gray: np.ndarray, mask: np.ndarray, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Haralick features averaged over the four directions; 5 values."""
    stack = [haralick_features(compute_glcm(gray, mask, levels, d)).as_array() for d in DIRECTIONS]
    return np.mean(stack, axis=0)


@dataclass
class LacunarityFeatures:
    """Mean-normalized deviation statistics per channel; 4 x 5 = 20 values."""

    per_channel: dict

    def as_array(self):
        out = []
        for c in CHANNELS:
            out.extend(self.per_channel[c])
        return np.array(out, dtype=np.float64)


def _lacunarity_one(values: np.ndarray) -> list[float]:
    v = values.astype(np.float64)
    n = v.size
    mean = float(v.mean())
    if mean == 0.0:
        return [0.0] * (2 + len(LACUNARITY_POWERS))
    rel = v / mean - 1.0
    rel2 = rel * rel
    l_s = float(v @ v) / n / (mean * mean) - 1.0
    l_a = float(np.mean(np.abs(rel)))
    l_2 = (float(rel @ rel) / n) ** 0.5
    l_4 = (float(rel2 @ rel2) / n) ** 0.25
    l_6 = (float((rel2 * rel2) @ rel2) / n) ** (1.0 / 6.0)
    return [l_s, l_a, l_2, l_4, l_6]


def lacunarity_features(img: np.ndarray, gray: np.ndarray, mask: np.ndarray) -> LacunarityFeatures:
    """L_s, L_a and L_p (p = 2, 4, 6) of each channel over foreground pixels.

    All five are ratios against the channel mean, hence exactly invariant to
    positive rescaling of the channel; a zero-mean channel reports zeros.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise FeatureError("empty mask")
    planes = {
        "r": img[..., 0][mask],
        "g": img[..., 1][mask],
        "b": img[..., 2][mask],
        "gray": gray[mask],
    }
    return LacunarityFeatures(per_channel={c: _lacunarity_one(v) for c, v in planes.items()})
