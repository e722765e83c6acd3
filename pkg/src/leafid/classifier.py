"""Equal-covariance Gaussian Bayes classifier.

Each class is modeled as a Gaussian with its own mean and one covariance
pooled over all classes, so the posterior reduces to comparing Mahalanobis
distances. Features are standardized before fitting (an affine map, which
does not move the decision boundaries when the ridge is zero) and all density
work happens in the log domain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ModelError

MODEL_FORMAT = "leafid-model"
MODEL_VERSION = 1
AUTO_RIDGE_FACTOR = 1e-6


@dataclass
class ClassModel:
    """Fitted classifier state; immutable after fit, safe to share."""

    means: np.ndarray          # (c, d) class means of standardized features
    pooled_cov: np.ndarray     # (d, d) pooled within-class covariance
    priors: np.ndarray         # (c,)
    shift: np.ndarray          # (d,) standardizer offset
    scale: np.ndarray          # (d,) standardizer divisor
    ridge: float
    class_names: list = field(default_factory=list)
    layout: dict = field(default_factory=dict)
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    def _factor(self):
        if self._chol is None:
            s = self.pooled_cov + self.ridge * np.eye(self.dimension)
            try:
                self._chol = linalg.cho_factor(s, lower=True)
            except linalg.LinAlgError as exc:
                raise ModelError(f"pooled covariance is not positive-definite: {exc}") from exc
        return self._chol


def fit(X, y, ridge="auto", class_names=None, layout=None) -> ClassModel:
    """Fit class means, pooled covariance and uniform priors.

    Parameters
    ----------
    X : (n, d) array of feature rows.
    y : (n,) integer labels, dense 0..c-1.
    ridge : "auto" for trace(S)/d * 1e-6 on the diagonal, or a float.

    Every class needs at least 2 samples; the pooled covariance uses the
    n - c divisor.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ModelError("X must be (n, d) with one label per row")
    if not np.isfinite(X).all():
        raise ModelError("training features contain non-finite values")

    classes = np.unique(y)
    c = classes.size
    n, d = X.shape
    if c < 2:
        raise ModelError("need at least 2 classes")
    if not np.array_equal(classes, np.arange(c)):
        raise ModelError("labels must be dense 0..c-1")
    counts = np.bincount(y, minlength=c)
    if counts.min() < 2:
        lonely = int(np.argmin(counts))
        raise ModelError(f"class {lonely} has {counts.min()} sample(s); need >= 2")

    shift = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    Z = (X - shift) / scale

    means = np.stack([Z[y == k].mean(axis=0) for k in range(c)])
    scatter = np.zeros((d, d))
    for k in range(c):
        dev = Z[y == k] - means[k]
        scatter += dev.T @ dev
    pooled = scatter / (n - c)
    pooled = 0.5 * (pooled + pooled.T)

    if ridge == "auto":
        ridge_val = AUTO_RIDGE_FACTOR * float(np.trace(pooled)) / d
    else:
        ridge_val = float(ridge)

    model = ClassModel(
        means=means,
        pooled_cov=pooled,
        priors=np.full(c, 1.0 / c),
        shift=shift,
        scale=scale,
        ridge=ridge_val,
        class_names=list(class_names) if class_names else [str(k) for k in range(c)],
        layout=dict(layout) if layout else {},
    )
    model._factor()  # fail fast on a singular covariance
    return model


def log_likelihoods(model: ClassModel, x) -> np.ndarray:
    """Per-class log p(x | class) up to one shared additive constant."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != model.dimension:
        raise ModelError(f"feature dimension {x.size} != model dimension {model.dimension}")
    z = (x - model.shift) / model.scale
    chol = model._factor()
    diffs = z[None, :] - model.means
    solved = linalg.cho_solve(chol, diffs.T)
    quad = np.einsum("ij,ji->i", diffs, solved)
    return -0.5 * quad


def posterior(model: ClassModel, x) -> np.ndarray:
    """Posterior class probabilities, normalized with log-sum-exp."""
    logp = log_likelihoods(model, x) + np.log(model.priors)
    m = logp.max()
    w = np.exp(logp - m)
    return w / w.sum()


def classify(model: ClassModel, x) -> int:
    """Most probable class; ties resolve to the lowest class index."""
    return int(np.argmax(posterior(model, x)))


def save_model(model: ClassModel, path) -> None:
    """Serialize to JSON with full-precision floats."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": int(model.n_classes),
        "dimension": int(model.dimension),
        "class_names": model.class_names,
        "layout": model.layout,
        "ridge": model.ridge,
        "priors": model.priors.tolist(),
        "shift": model.shift.tolist(),
        "scale": model.scale.tolist(),
        "means": model.means.tolist(),
        "pooled_cov": model.pooled_cov.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ClassModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"cannot parse model file {path}: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise ModelError(f"unsupported model format/version in {path}")
    try:
        model = ClassModel(
            means=np.array(doc["means"], dtype=np.float64),
            pooled_cov=np.array(doc["pooled_cov"], dtype=np.float64),
            priors=np.array(doc["priors"], dtype=np.float64),
            shift=np.array(doc["shift"], dtype=np.float64),
            scale=np.array(doc["scale"], dtype=np.float64),
            ridge=float(doc["ridge"]),
            class_names=list(doc["class_names"]),
            layout=dict(doc.get("layout", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model file {path}: {exc}") from exc
    if model.means.shape != (doc["classes"], doc["dimension"]):
        raise ModelError(f"inconsistent dimensions in {path}")
    return model
