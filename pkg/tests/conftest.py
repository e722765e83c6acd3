"""Shared synthetic-image factories for the test suite."""

import numpy as np
import pytest
from PIL import Image


def disk_mask(radius, center=None, shape=None):
    if shape is None:
        side = 2 * radius + 21
        shape = (side, side)
    if center is None:
        center = ((shape[1] - 1) / 2.0, (shape[0] - 1) / 2.0)
    yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
    return ((xx - center[0]) ** 2 + (yy - center[1]) ** 2) <= radius * radius


def rect_mask(width, height, origin=(10, 10), shape=(80, 80)):
    mask = np.zeros(shape, dtype=bool)
    x0, y0 = origin
    mask[y0 : y0 + height, x0 : x0 + width] = True
    return mask


def blob_mask(rng, shape=(64, 64), n_seeds=4, radius_range=(4, 9)):
    """Single connected blob: union of overlapping random disks."""
    h, w = shape
    cx = rng.integers(w // 3, 2 * w // 3)
    cy = rng.integers(h // 3, 2 * h // 3)
    yy, xx = np.mgrid[0:h, 0:w]
    mask = np.zeros(shape, dtype=bool)
    px, py = cx, cy
    for _ in range(n_seeds):
        r = int(rng.integers(*radius_range))
        mask |= ((xx - px) ** 2 + (yy - py) ** 2) <= r * r
        px = int(np.clip(px + rng.integers(-r, r + 1), r + 2, w - r - 3))
        py = int(np.clip(py + rng.integers(-r, r + 1), r + 2, h - r - 3))
    return mask


def bumpy_mask(shape=(160, 160), center=(80.0, 80.0), base=42.0, harmonics=((3, 9.0, 0.7), (5, 5.0, 2.1), (7, 3.0, 1.3))):
    """Asymmetric star-like blob with angular content at several frequencies."""
    yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
    dx = xx - center[0]
    dy = yy - center[1]
    theta = np.arctan2(dy, dx)
    r_lim = base + sum(a * np.cos(k * theta + p) for k, a, p in harmonics)
    return np.hypot(dx, dy) <= r_lim


LEAF_CLASSES = [
    # axes, RGB base, noise amplitude, vein spacing, vein brightness
    {"axes": (30, 18), "base": (52, 108, 48), "noise": 8, "vein_gap": 8, "vein_lift": 75},
    {"axes": (22, 20), "base": (95, 140, 60), "noise": 18, "vein_gap": 14, "vein_lift": 45},
    {"axes": (34, 10), "base": (70, 90, 100), "noise": 4, "vein_gap": 5, "vein_lift": 95},
    {"axes": (26, 25), "base": (40, 80, 42), "noise": 26, "vein_gap": 20, "vein_lift": 30},
]


def synthetic_leaf(rng, cls, size=96):
    """Leaf-like test image: noisy ellipse with a midrib and lateral veins."""
    spec = LEAF_CLASSES[cls % len(LEAF_CLASSES)]
    ax, ay = spec["axes"]
    ax = max(8, ax + int(rng.integers(-2, 3)))
    ay = max(6, ay + int(rng.integers(-2, 3)))
    cx = size // 2 + int(rng.integers(-3, 4))
    cy = size // 2 + int(rng.integers(-3, 4))

    yy, xx = np.mgrid[0:size, 0:size]
    inside = (((xx - cx) / ax) ** 2 + ((yy - cy) / ay) ** 2) <= 1.0

    img = np.full((size, size, 3), 244, dtype=np.int16)
    for ch, base in enumerate(spec["base"]):
        noise = rng.integers(-spec["noise"], spec["noise"] + 1, size=(size, size))
        img[..., ch] = np.where(inside, base + noise, img[..., ch])

    # midrib plus lateral vein lines, clipped to the lamina
    lift = spec["vein_lift"]
    veins = np.zeros((size, size), dtype=bool)
    veins[cy, :] = True
    for y in range(cy - ay, cy + ay + 1, spec["vein_gap"]):
        if 0 <= y < size and y != cy:
            veins[y, :] = True
    veins &= inside
    img[veins] = np.minimum(img[veins] + lift, 255)

    return np.clip(img, 0, 255).astype(np.uint8)


def write_dataset(root, n_classes=3, per_class=8, size=96, seed=11):
    """Class-subdir tree of synthetic leaf PNGs; returns the root path."""
    root.mkdir(parents=True, exist_ok=True)
    for cls in range(n_classes):
        d = root / f"species_{cls:02d}"
        d.mkdir(exist_ok=True)
        for i in range(per_class):
            rng = np.random.default_rng(seed + 1000 * cls + i)
            img = synthetic_leaf(rng, cls, size=size)
            Image.fromarray(img).save(d / f"leaf_{i:03d}.png")
    return root


@pytest.fixture
def leaf_image():
    rng = np.random.default_rng(7)
    return synthetic_leaf(rng, 0)


@pytest.fixture
def dataset_dir(tmp_path):
    return write_dataset(tmp_path / "synthleaves")
