"""Convex-hull ratios, contour-roughness moments and auxiliary shape features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FeatureError, HullError
from .imaging import RadialSignature

SQRT2 = math.sqrt(2.0)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull of 2-D points, counter-clockwise, collinear points dropped.

    Monotone-chain scan over the lexicographically sorted points; the output
    starts at the lowest (x, y) vertex. Raises HullError when every point is
    collinear.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in np.asarray(points)})
    if len(pts) < 3:
        raise HullError("need at least 3 distinct points")

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) > 1 and _cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise HullError("all points are collinear")
    return np.asarray(hull, dtype=np.float64)


def polygon_area(vertices: np.ndarray) -> float:
    """Absolute shoelace area of a closed polygon."""
    v = np.asarray(vertices, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    return abs(math.fsum(x * np.roll(y, -1) - np.roll(x, -1) * y)) / 2.0


def polygon_perimeter(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=np.float64)
    d = np.roll(v, -1, axis=0) - v
    return math.fsum(np.hypot(d[:, 0], d[:, 1]))


def chain_perimeter(contour: np.ndarray) -> float:
    """Contour path length: 1 per axial step, sqrt(2) per diagonal step."""
    c = np.asarray(contour, dtype=np.int64)
    d = np.abs(np.roll(c, -1, axis=0) - c)
    steps = np.where((d[:, 0] == 1) & (d[:, 1] == 1), SQRT2, 1.0)
    return math.fsum(steps)


@dataclass
class HullFeatures:
    solidity: float
    convexity: float
    hull_vertices: np.ndarray

    def as_array(self):
        return np.array([self.solidity, self.convexity], dtype=np.float64)


def hull_features(mask: np.ndarray, contour: np.ndarray) -> HullFeatures:
    """Solidity (area / hull area) and convexity (hull perimeter / perimeter).

    Leaf area is the foreground pixel count, leaf perimeter the chain-code
    length of the traced boundary; the hull is taken over boundary pixel
    centers with shoelace area and straight edge lengths.
    """
    area = float(np.count_nonzero(mask))
    perimeter = chain_perimeter(contour)
    hull = convex_hull(contour)
    hull_area = polygon_area(hull)
    hull_perimeter = polygon_perimeter(hull)
    if hull_area <= 0 or perimeter <= 0:
        raise FeatureError("degenerate region for hull ratios")
    return HullFeatures(
        solidity=area / hull_area,
        convexity=hull_perimeter / perimeter,
        hull_vertices=hull,
    )


@dataclass
class ShenFeatures:
    """Normalized central-moment roughness descriptors of d(n)."""

    f2: float
    f3: float
    mf: float
    f1: float

    def as_array(self):
        return np.array([self.f2, self.f3, self.mf], dtype=np.float64)


def shen_features(sig: RadialSignature) -> ShenFeatures:
    """Roughness moments of the radial signature.

    f1 = M2^(1/2)/m1, f2 = sign-preserving M3^(1/3)/m1, f3 = M4^(1/4)/m1 and
    mf = f3 - f1, with Mk the k-th central moment of d(n). Exactly invariant
    to uniform scaling of d and to circular shifts (order-free summation).
    """
    d = np.asarray(sig.d, dtype=np.float64)
    n = d.size
    if n < 4:
        raise FeatureError("signature too short")
    m1 = sig.m1
    if m1 <= 0:
        raise FeatureError("degenerate shape: mean radial distance is zero")

    dev = d - m1
    m2 = math.fsum(dev * dev) / n
    m3 = math.fsum(dev * dev * dev) / n
    m4 = math.fsum(dev * dev * dev * dev) / n

    f1 = math.sqrt(m2) / m1
    f2 = float(np.cbrt(m3)) / m1  # sign-preserving real cube root
    f3 = math.sqrt(math.sqrt(m4)) / m1
    return ShenFeatures(f2=f2, f3=f3, mf=f3 - f1, f1=f1)


@dataclass
class AuxShapeFeatures:
    eccentricity: float
    roundness: float
    dispersion: float

    def as_array(self):
        return np.array([self.eccentricity, self.roundness, self.dispersion], dtype=np.float64)


def aux_shape_features(mask: np.ndarray, contour: np.ndarray, sig: RadialSignature) -> AuxShapeFeatures:
    """Moment eccentricity, isoperimetric roundness and radial dispersion."""
    ys, xs = np.nonzero(np.asarray(mask, dtype=bool))
    if xs.size == 0:
        raise FeatureError("empty mask")
    x = xs - xs.mean()
    y = ys - ys.mean()
    cxx = float(np.mean(x * x))
    cyy = float(np.mean(y * y))
    cxy = float(np.mean(x * y))
    # eigenvalues of [[cxx, cxy], [cxy, cyy]]
    half_trace = 0.5 * (cxx + cyy)
    root = math.sqrt(max(0.25 * (cxx - cyy) ** 2 + cxy * cxy, 0.0))
    lam_max = half_trace + root
    lam_min = max(half_trace - root, 0.0)
    eccentricity = math.sqrt(1.0 - lam_min / lam_max) if lam_max > 0 else 0.0

    area = float(np.count_nonzero(mask))
    perimeter = chain_perimeter(contour)
    roundness = 4.0 * math.pi * area / (perimeter * perimeter)

    dmin = float(np.min(sig.d))
    if dmin <= 0:
        raise FeatureError("signature touches the centroid; dispersion undefined")
    dispersion = float(np.max(sig.d)) / dmin
    return AuxShapeFeatures(eccentricity=eccentricity, roundness=roundness, dispersion=dispersion)
