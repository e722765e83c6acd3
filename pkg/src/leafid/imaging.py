"""Image loading, leaf segmentation, boundary tracing and radial signatures.

Conventions used throughout the package:

* images are numpy arrays indexed ``[row, col]``; a pixel coordinate is the
  pair ``(x, y)`` with ``x`` the column and ``y`` the row,
* an RGB image is ``(H, W, 3) uint8``, a gray image ``(H, W) uint8``,
  a mask ``(H, W) bool`` with True foreground,
* a contour is an ``(n, 2) int`` array of ``(x, y)`` boundary pixel centers,
  closed implicitly (last point is 8-adjacent to the first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import ContourError, ImageFormatError, SegmentationError

# Rec.601 luma weights.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# 8-neighborhood ring in clockwise screen order (x right, y down); tracing
# with this scan order yields a positive shoelace sum in raw (x, y).
_RING = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def load_image(path) -> np.ndarray:
    """Decode a PNG/JPEG file into an (H, W, 3) uint8 RGB array."""
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot decode {path}: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageFormatError(f"unexpected raster shape {arr.shape} in {path}")
    return arr


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Luma grayscale: round(0.299 R + 0.587 G + 0.114 B), clipped to [0, 255]."""
    rgb = np.asarray(img, dtype=np.float64)
    gray = rgb[..., 0] * GRAY_WEIGHTS[0] + rgb[..., 1] * GRAY_WEIGHTS[1] + rgb[..., 2] * GRAY_WEIGHTS[2]
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


def otsu_threshold(values: np.ndarray) -> int:
    """Otsu threshold t over uint8 samples; classes are {v <= t} and {v > t}.

    Maximizes the between-class variance over integer thresholds; the lowest
    maximizing t is returned. A constant input yields its single value.
    """
    values = np.asarray(values).ravel()
    if values.size == 0:
        raise ValueError("otsu_threshold needs at least one sample")
    hist = np.bincount(values.astype(np.uint8), minlength=256).astype(np.float64)
    total = hist.sum()
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * np.arange(256))
    w1 = total - w0
    mean_total = m0[-1]
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return int(values[0])
    # between-class variance: w0*w1*(mu0-mu1)^2
    mu0 = np.where(w0 > 0, m0 / np.maximum(w0, 1), 0.0)
    mu1 = np.where(w1 > 0, (mean_total - m0) / np.maximum(w1, 1), 0.0)
    sigma_b = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(sigma_b))


def segment_leaf(gray: np.ndarray) -> np.ndarray:
    """Segment a single leaf on a near-uniform light background.

    Otsu threshold, darker side as candidate foreground; polarity flips if
    the darker side dominates the image border. The largest 8-connected
    component is kept and its interior holes are filled.
    """
    gray = np.asarray(gray, dtype=np.uint8)
    t = otsu_threshold(gray)
    fg = gray <= t

    border = np.concatenate([fg[0, :], fg[-1, :], fg[1:-1, 0], fg[1:-1, -1]])
    if border.size and border.mean() > 0.5:
        fg = ~fg

    if not fg.any():
        raise SegmentationError("no foreground after thresholding")

    labels, nlab = ndimage.label(fg, structure=np.ones((3, 3), dtype=bool))
    counts = np.bincount(labels.ravel())
    counts[0] = 0
    comp = labels == int(np.argmax(counts))
    return ndimage.binary_fill_holes(comp)


def save_mask_png(mask: np.ndarray, path) -> None:
    """Debug export of a binary mask, foreground written as 255."""
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path)


def extract_contour(mask: np.ndarray) -> np.ndarray:
    """Moore boundary trace of the (single-component) foreground.

    Returns (n, 2) int (x, y) points, 8-connected and closed, traced with
    positive shoelace orientation starting from the topmost-then-leftmost
    foreground pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise ContourError("empty mask")
    if ys.size == 1:
        raise ContourError("single-pixel foreground has no traceable boundary")

    h, w = mask.shape

    def fg(x, y):
        return 0 <= x < w and 0 <= y < h and mask[y, x]

    y0 = int(ys.min())
    x0 = int(xs[ys == y0].min())
    start = (x0, y0)

    # Walk (pixel, backtrack) states until one repeats; the repeating cycle is
    # the full boundary. A plain "stop at start" test breaks on boundaries
    # that legitimately pass through the start pixel twice.
    cur = start
    backtrack = (x0 - 1, y0)  # West of start is background by construction
    seen = {}
    trail = []
    cycle = None
    max_steps = 8 * ys.size + 8

    for _ in range(max_steps):
        state = (cur, backtrack)
        if state in seen:
            cycle = [pixel for pixel, _ in trail[seen[state]:]]
            break
        seen[state] = len(trail)
        trail.append(state)

        bx, by = backtrack
        cx, cy = cur
        k = _RING.index((bx - cx, by - cy))
        nxt = None
        for j in range(1, 9):
            dx, dy = _RING[(k + j) % 8]
            cand = (cx + dx, cy + dy)
            if fg(*cand):
                nxt = cand
                break
            backtrack = cand
        if nxt is None:
            raise ContourError("single-pixel foreground has no traceable boundary")
        cur = nxt

    if cycle is None:
        raise ContourError("boundary trace did not close")
    if len(cycle) < 4:
        raise ContourError(f"degenerate contour of {len(cycle)} points")

    # rotate the cycle to begin at the canonical start pixel
    at = cycle.index(start)
    cycle = cycle[at:] + cycle[:at]
    return np.asarray(cycle, dtype=np.int64)


def centroid(mask: np.ndarray) -> tuple[float, float]:
    """Arithmetic mean (x_c, y_c) of the foreground pixel coordinates."""
    ys, xs = np.nonzero(np.asarray(mask, dtype=bool))
    if xs.size == 0:
        raise SegmentationError("cannot take the centroid of an empty mask")
    n = xs.size
    return float(int(xs.sum(dtype=np.int64)) / n), float(int(ys.sum(dtype=np.int64)) / n)


@dataclass
class RadialSignature:
    """Distances d(n) from the centroid to n resampled boundary points."""

    d: np.ndarray
    centroid: tuple[float, float]
    m1: float

    def __len__(self):
        return self.d.size


def radial_signature(contour: np.ndarray, centroid: tuple[float, float], n_points: int = 128) -> RadialSignature:
    """Resample the closed contour to ``n_points`` equal arc-length steps and
    measure each point's distance to the centroid."""
    if n_points < 4:
        raise ValueError("n_points must be >= 4")
    pts = np.asarray(contour, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ContourError("contour must hold at least 4 points")

    closed = np.vstack([pts, pts[:1]])
    seg = np.hypot(np.diff(closed[:, 0]), np.diff(closed[:, 1]))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = cum[-1]
    if perimeter <= 0:
        raise ContourError("contour has zero perimeter")

    targets = np.arange(n_points) * (perimeter / n_points)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    t = (targets - cum[idx]) / seg[idx]
    sample = closed[idx] + t[:, None] * (closed[idx + 1] - closed[idx])

    d = np.hypot(sample[:, 0] - centroid[0], sample[:, 1] - centroid[1])
    m1 = math.fsum(d) / n_points
    return RadialSignature(d=d, centroid=(float(centroid[0]), float(centroid[1])), m1=m1)
