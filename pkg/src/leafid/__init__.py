"""Leaf-based plant identification toolkit.

Pipeline: segment a leaf scan, extract shape / color / texture / vein feature
groups into a fixed 85-value layout, classify with an equal-covariance
Gaussian Bayes model, and evaluate nested feature selections on a
reference/test split.
"""

from . import classifier, color_features, features, harness, imaging, pft_features, shape_features, texture_features, vein_features
from .errors import (
    CacheError,
    ContourError,
    ExtractionError,
    FeatureError,
    HullError,
    ImageFormatError,
    LeafIdError,
    ManifestError,
    ModelError,
    SegmentationError,
    SplitError,
)
from .features import DEFAULT_PARAMS, FULL_SPEC, ExtractionParams, FeatureSetSpec, FeatureVector, extract_all, extract_file

__version__ = "0.1.0"

__all__ = [
    "classifier",
    "color_features",
    "features",
    "harness",
    "imaging",
    "pft_features",
    "shape_features",
    "texture_features",
    "vein_features",
    "CacheError",
    "ContourError",
    "ExtractionError",
    "FeatureError",
    "HullError",
    "ImageFormatError",
    "LeafIdError",
    "ManifestError",
    "ModelError",
    "SegmentationError",
    "SplitError",
    "DEFAULT_PARAMS",
    "FULL_SPEC",
    "ExtractionParams",
    "FeatureSetSpec",
    "FeatureVector",
    "extract_all",
    "extract_file",
]
