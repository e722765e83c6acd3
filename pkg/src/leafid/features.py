"""Fixed-layout feature vectors, group selection and feature caches.

Canonical group order and sizes:

    pft 35, hull 2, color 16, vein 4, glcm 5, lacunarity 20, shen 3,
    aux_shape 3

The default "full" selection is the first seven groups (85 values);
aux_shape is extracted and cached but only enters a vector when asked for.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from . import color_features, imaging, pft_features, shape_features, texture_features, vein_features
from .errors import CacheError, ExtractionError, FeatureError, LeafIdError

GROUP_SIZES = {
    "pft": 35,
    "hull": 2,
    "color": 16,
    "vein": 4,
    "glcm": 5,
    "lacunarity": 20,
    "shen": 3,
    "aux_shape": 3,
}
GROUP_ORDER = tuple(GROUP_SIZES)
FULL_GROUPS = ("pft", "hull", "color", "vein", "glcm", "lacunarity", "shen")

CACHE_FORMAT = "leafid-cache"
CACHE_VERSION = 1


@dataclass(frozen=True)
class ExtractionParams:
    """Knobs of the extraction pipeline, echoed into every artifact."""

    signature_points: int = 128
    pft_radial: int = 64
    pft_angular: int = 128
    glcm_levels: int = 8
    dark_veins: bool = False

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


DEFAULT_PARAMS = ExtractionParams()


@dataclass
class FeatureVector:
    """Per-leaf feature groups plus provenance."""

    groups: dict
    label: int | None = None
    source: str = ""

    @property
    def group_names(self):
        return tuple(g for g in GROUP_ORDER if g in self.groups)

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.groups[g] for g in self.group_names])

    def __len__(self):
        return sum(self.groups[g].size for g in self.groups)


@dataclass(frozen=True)
class FeatureSetSpec:
    """Subset of feature groups, kept in canonical order.

    ``include_shen_mf=False`` trims the shen group to its first two values.
    """

    groups: tuple
    include_shen_mf: bool = True
    name: str = ""

    def __post_init__(self):
        unknown = [g for g in self.groups if g not in GROUP_SIZES]
        if unknown:
            raise ValueError(f"unknown feature groups: {unknown}")
        if not self.groups:
            raise ValueError("a feature selection needs at least one group")
        ordered = tuple(g for g in GROUP_ORDER if g in self.groups)
        object.__setattr__(self, "groups", ordered)

    def group_size(self, name: str) -> int:
        if name == "shen" and not self.include_shen_mf:
            return 2
        return GROUP_SIZES[name]

    @property
    def dimension(self) -> int:
        return sum(self.group_size(g) for g in self.groups)

    def describe(self) -> str:
        return self.name or "+".join(self.groups)


FULL_SPEC = FeatureSetSpec(groups=FULL_GROUPS, name="full")


def extract_all(img: np.ndarray, params: ExtractionParams = DEFAULT_PARAMS, source: str = "", label: int | None = None) -> FeatureVector:
    """Run the whole pipeline on one RGB image and fill all eight groups.

    Failures are re-raised as ExtractionError naming the stage and image.
    """
    stage = "grayscale"
    try:
        gray = imaging.to_grayscale(img)
        stage = "segmentation"
        mask = imaging.segment_leaf(gray)
        stage = "contour"
        contour = imaging.extract_contour(mask)
        center = imaging.centroid(mask)
        sig = imaging.radial_signature(contour, center, params.signature_points)

        stage = "pft"
        grid = pft_features.polar_resample(mask, center, params.pft_radial, params.pft_angular)
        pft = pft_features.pft_descriptors(grid)
        stage = "hull"
        hull = shape_features.hull_features(mask, contour)
        stage = "color"
        color = color_features.color_moments(img, gray, mask)
        stage = "vein"
        vein = vein_features.vein_features(gray, mask, params.dark_veins)
        stage = "glcm"
        glcm = texture_features.glcm_feature_vector(gray, mask, params.glcm_levels)
        stage = "lacunarity"
        lac = texture_features.lacunarity_features(img, gray, mask)
        stage = "shen"
        shen = shape_features.shen_features(sig)
        stage = "aux_shape"
        aux = shape_features.aux_shape_features(mask, contour, sig)
    except LeafIdError as exc:
        raise ExtractionError(stage, source or "<array>", exc) from exc

    groups = {
        "pft": np.asarray(pft, dtype=np.float64),
        "hull": hull.as_array(),
        "color": color.as_array(),
        "vein": vein.as_array(),
        "glcm": np.asarray(glcm, dtype=np.float64),
        "lacunarity": lac.as_array(),
        "shen": shen.as_array(),
        "aux_shape": aux.as_array(),
    }
    for name, arr in groups.items():
        if arr.size != GROUP_SIZES[name]:
            raise FeatureError(f"group {name} produced {arr.size} values")
        if not np.isfinite(arr).all():
            raise ExtractionError(name, source or "<array>", FeatureError("non-finite feature value"))
    return FeatureVector(groups=groups, label=label, source=source)


def extract_file(path, params: ExtractionParams = DEFAULT_PARAMS, label: int | None = None) -> FeatureVector:
    """Load an image file and extract its features."""
    img = imaging.load_image(path)
    return extract_all(img, params, source=str(path), label=label)


def project(vector: FeatureVector, spec: FeatureSetSpec) -> FeatureVector:
    """Keep only the selected groups, in canonical order."""
    missing = [g for g in spec.groups if g not in vector.groups]
    if missing:
        raise FeatureError(f"vector lacks groups {missing}")
    groups = {}
    for g in spec.groups:
        arr = vector.groups[g]
        if g == "shen" and not spec.include_shen_mf:
            arr = arr[:2]
        groups[g] = arr
    return FeatureVector(groups=groups, label=vector.label, source=vector.source)


def matrix(rows, spec: FeatureSetSpec | None = None):
    """Stack rows into (X, y) arrays, optionally projecting first."""
    if spec is not None:
        rows = [project(r, spec) for r in rows]
    X = np.stack([r.values for r in rows])
    y = np.array([-1 if r.label is None else r.label for r in rows], dtype=np.int64)
    return X, y


def _format_value(v: float) -> str:
    return repr(float(v))


@dataclass
class FeatureCache:
    """A loaded feature cache: rows plus the header it was written with."""

    rows: list
    params: ExtractionParams
    class_names: list

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def save_cache(rows, path, params: ExtractionParams = DEFAULT_PARAMS, class_names=None) -> None:
    """Write rows as a one-line JSON header plus one CSV line per leaf.

    Values are serialized with shortest round-trip repr, so a load returns
    bit-identical floats.
    """
    rows = list(rows)
    layouts = {tuple((g, r.groups[g].size) for g in r.group_names) for r in rows}
    if len(layouts) > 1:
        raise CacheError("rows have inconsistent group layouts")
    group_layout = [[g, int(rows[0].groups[g].size)] for g in rows[0].group_names] if rows else [[g, GROUP_SIZES[g]] for g in GROUP_ORDER]
    header = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "groups": group_layout,
        "params": params.to_dict(),
        "class_names": list(class_names) if class_names else [],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for r in rows:
            vals = ",".join(_format_value(v) for v in r.values)
            label = "" if r.label is None else str(int(r.label))
            fh.write(f"{r.source},{label},{vals}\n")


def load_cache(path, params: ExtractionParams | None = None) -> FeatureCache:
    """Read a feature cache.

    Passing ``params`` asserts the cache was built with those extraction
    parameters and raises CacheError otherwise.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise CacheError(f"bad cache header in {path}: {exc}") from exc
        if header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION:
            raise CacheError(f"unsupported cache format/version in {path}")
        try:
            layout = [(str(g), int(n)) for g, n in header["groups"]]
            cache_params = ExtractionParams.from_dict(header["params"])
            class_names = [str(n) for n in header.get("class_names", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise CacheError(f"malformed cache header in {path}: {exc}") from exc
        if params is not None and cache_params != params:
            raise CacheError(
                f"cache {path} was built with {cache_params}, expected {params}"
            )
        total = sum(n for _, n in layout)

        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.rsplit(",", total + 1)
            if len(parts) != total + 2:
                raise CacheError(f"{path}:{lineno}: expected {total + 2} fields")
            source, label_s = parts[0], parts[1]
            values = np.array([float(v) for v in parts[2:]], dtype=np.float64)
            groups = {}
            at = 0
            for g, n in layout:
                groups[g] = values[at : at + n]
                at += n
            label = int(label_s) if label_s else None
            rows.append(FeatureVector(groups=groups, label=label, source=source))
    return FeatureCache(rows=rows, params=cache_params, class_names=class_names)
