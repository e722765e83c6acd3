"""Color moments (mean, std, skewness, excess kurtosis) over the leaf region."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FeatureError

CHANNELS = ("r", "g", "b", "gray")


@dataclass
class ColorMoments:
    """Per-channel population moments; 4 channels x 4 moments = 16 values."""

    mean: dict
    std: dict
    skew: dict
    kurt: dict

    def as_array(self):
        out = []
        for c in CHANNELS:
            out.extend([self.mean[c], self.std[c], self.skew[c], self.kurt[c]])
        return np.array(out, dtype=np.float64)


def _moments(values: np.ndarray) -> tuple[float, float, float, float]:
    v = values.astype(np.float64)
    n = v.size
    mean = float(v.mean())
    dev = v - mean
    dev2 = dev * dev
    var = float(dev @ dev) / n
    std = math.sqrt(var)
    if std == 0.0:
        return mean, 0.0, 0.0, 0.0
    skew = float(dev2 @ dev) / n / std**3
    kurt = float(dev2 @ dev2) / n / std**4 - 3.0
    return mean, std, skew, kurt


def color_moments(img: np.ndarray, gray: np.ndarray, mask: np.ndarray) -> ColorMoments:
    """Population moments of R, G, B and gray intensities over foreground pixels.

    Degenerate channels (zero spread) report skew and kurtosis of 0.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise FeatureError("empty mask")
    if img.shape[:2] != mask.shape or gray.shape != mask.shape:
        raise FeatureError("image, gray and mask dimensions disagree")

    planes = {
        "r": img[..., 0][mask],
        "g": img[..., 1][mask],
        "b": img[..., 2][mask],
        "gray": gray[mask],
    }
    mean, std, skew, kurt = {}, {}, {}, {}
    for name, vals in planes.items():
        mean[name], std[name], skew[name], kurt[name] = _moments(vals)
    return ColorMoments(mean=mean, std=std, skew=skew, kurt=kurt)
