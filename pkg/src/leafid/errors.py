"""Exception types raised across the leafid pipeline."""


class LeafIdError(Exception):
    """Base class for all leafid failures."""


class ImageFormatError(LeafIdError):
    """File exists but cannot be decoded as a supported image."""


class SegmentationError(LeafIdError):
    """Thresholding produced no usable foreground."""


class ContourError(LeafIdError):
    """Foreground too small or broken to trace a boundary."""


class HullError(LeafIdError):
    """Point set is degenerate (all collinear) for a convex hull."""


class FeatureError(LeafIdError):
    """A feature computation received a degenerate input."""


class ExtractionError(LeafIdError):
    """A pipeline stage failed for a specific image."""

    def __init__(self, stage, source, cause):
        super().__init__(f"{stage} failed for {source}: {cause}")
        self.stage = stage
        self.source = source
        self.cause = cause


class CacheError(LeafIdError):
    """Feature cache file is malformed or inconsistent."""


class ModelError(LeafIdError):
    """Classifier model file or dimensions are inconsistent."""


class ManifestError(LeafIdError):
    """Dataset directory or manifest file cannot be resolved."""


class SplitError(LeafIdError):
    """A split plan is infeasible for the given manifest."""
