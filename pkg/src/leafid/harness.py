"""Dataset manifests, reference/test splits, evaluation and the ablation runner."""

from __future__ import annotations

import concurrent.futures
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import classifier, features
from .errors import ManifestError, ModelError, SplitError

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
LAYOUTS = ("class-subdirs", "flavia-ranges", "manifest-file")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: int
    species: str


@dataclass
class DatasetManifest:
    entries: list
    dataset_id: str = "custom"

    @property
    def n_classes(self) -> int:
        return 1 + max(e.label for e in self.entries)

    @property
    def class_names(self) -> list:
        names = [""] * self.n_classes
        for e in self.entries:
            names[e.label] = e.species
        return names

    def by_class(self) -> dict:
        out = {}
        for e in self.entries:
            out.setdefault(e.label, []).append(e)
        return out


def _validate(entries, dataset_id) -> DatasetManifest:
    if not entries:
        raise ManifestError("manifest is empty")
    paths = [e.path for e in entries]
    if len(set(paths)) != len(paths):
        dupes = sorted({p for p in paths if paths.count(p) > 1})
        raise ManifestError(f"duplicate paths in manifest: {dupes[:5]}")
    labels = sorted({e.label for e in entries})
    if len(labels) < 2:
        raise ManifestError("manifest needs at least 2 classes")
    if labels != list(range(len(labels))):
        raise ManifestError(f"labels are not dense 0..{len(labels) - 1}: {labels}")
    return DatasetManifest(entries=entries, dataset_id=dataset_id)


def flavia_range_table(path=None):
    """(start, end, species) rows for the Flavia filename numbering."""
    if path is None:
        text = resources.files("leafid.data").joinpath("flavia_ranges.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        start, end, species = line.split(",", 2)
        rows.append((int(start), int(end), species.strip()))
    return rows


def build_manifest(root, layout: str = "class-subdirs", range_table=None) -> DatasetManifest:
    """Enumerate a dataset directory (or manifest file) into a manifest.

    Layouts: ``class-subdirs`` (one directory per species), ``flavia-ranges``
    (flat numeric filenames mapped through the bundled range table), or
    ``manifest-file`` (a CSV manifest written by this module).
    """
    root = Path(root)
    if layout == "manifest-file":
        return load_manifest(root)
    if not root.is_dir():
        raise ManifestError(f"{root} is not a directory")

    if layout == "class-subdirs":
        entries = []
        dirs = sorted(p for p in root.iterdir() if p.is_dir())
        for label, d in enumerate(dirs):
            for f in sorted(d.iterdir()):
                if f.suffix.lower() in IMAGE_SUFFIXES:
                    entries.append(ManifestEntry(path=str(f), label=label, species=d.name))
        return _validate(entries, dataset_id=root.name)

    if layout == "flavia-ranges":
        table = flavia_range_table() if range_table is None else range_table
        entries = []
        strays = []
        for f in sorted(root.iterdir()):
            if not f.is_file() or f.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            try:
                num = int(f.stem)
            except ValueError:
                strays.append(f.name)
                continue
            for label, (start, end, species) in enumerate(table):
                if start <= num <= end:
                    entries.append(ManifestEntry(path=str(f), label=label, species=species))
                    break
            else:
                strays.append(f.name)
        if strays:
            raise ManifestError(f"{len(strays)} file(s) outside every filename range: {strays[:10]}")
        return _validate(entries, dataset_id="flavia")

    raise ManifestError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("path,label,species\n")
        for e in manifest.entries:
            fh.write(f"{e.path},{e.label},{e.species}\n")


def load_manifest(path) -> DatasetManifest:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "path,label,species":
            raise ManifestError(f"{path} does not look like a manifest file")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                p, label, species = line.split(",", 2)
                entries.append(ManifestEntry(path=p, label=int(label), species=species))
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    return _validate(entries, dataset_id=Path(path).stem)


@dataclass(frozen=True)
class SplitPlan:
    """Per-class reference/test counts and how members are chosen."""

    reference: int
    test: int
    rule: str = "sorted"  # or "random"
    seed: int = 0

    def __post_init__(self):
        if self.reference < 1 or self.test < 1:
            raise ValueError("reference and test counts must be positive")
        if self.rule not in ("sorted", "random"):
            raise ValueError("rule must be 'sorted' or 'random'")


def split(items, plan: SplitPlan):
    """Split labeled items into disjoint (references, tests).

    Works on anything with ``label`` and a path-like identity: manifest
    entries use ``path``, feature rows use ``source``. Per class the items
    are ordered by that identity; the first ``reference`` become references
    and the next ``test`` become tests (surplus items are dropped). The
    random rule shuffles each class reproducibly from the seed instead.
    """
    def ident(item):
        return getattr(item, "path", None) or getattr(item, "source")

    per_class = {}
    for it in items:
        if it.label is None:
            raise SplitError(f"unlabeled item {ident(it)}")
        per_class.setdefault(it.label, []).append(it)

    refs, tests = [], []
    rng = np.random.default_rng(plan.seed)
    for label in sorted(per_class):
        members = sorted(per_class[label], key=ident)
        need = plan.reference + plan.test
        if len(members) < need:
            raise SplitError(
                f"class {label} has {len(members)} item(s); plan needs {need}"
            )
        if plan.rule == "random":
            members = [members[i] for i in rng.permutation(len(members))]
        refs.extend(members[: plan.reference])
        tests.extend(members[plan.reference : need])
    return refs, tests


@dataclass
class EvaluationReport:
    """Held-out accuracy n_r / n_t with the full confusion matrix."""

    accuracy: float
    n_correct: int
    n_tested: int
    confusion: np.ndarray
    per_class_accuracy: np.ndarray
    spec_name: str = ""
    spec_groups: tuple = ()
    dimension: int = 0
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "spec": self.spec_name,
            "groups": list(self.spec_groups),
            "dimension": self.dimension,
            "accuracy": self.accuracy,
            "n_correct": self.n_correct,
            "n_tested": self.n_tested,
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": self.per_class_accuracy.tolist(),
            "params": self.params,
        }


def evaluate(model: classifier.ClassModel, rows, spec: features.FeatureSetSpec | None = None) -> EvaluationReport:
    """Classify feature rows and tabulate accuracy and confusion counts."""
    rows = list(rows)
    if not rows:
        raise ModelError("no test rows")
    X, y = features.matrix(rows, spec)
    if X.shape[1] != model.dimension:
        raise ModelError(f"feature dimension {X.shape[1]} != model dimension {model.dimension}")
    if y.min() < 0:
        raise ModelError("test rows must be labeled")

    c = model.n_classes
    confusion = np.zeros((c, c), dtype=np.int64)
    for xi, yi in zip(X, y):
        confusion[yi, classifier.classify(model, xi)] += 1

    n_tested = int(confusion.sum())
    n_correct = int(np.trace(confusion))
    row_sums = confusion.sum(axis=1)
    per_class = np.divide(
        np.diag(confusion), row_sums,
        out=np.zeros(c, dtype=np.float64), where=row_sums > 0,
    )
    return EvaluationReport(
        accuracy=n_correct / n_tested,
        n_correct=n_correct,
        n_tested=n_tested,
        confusion=confusion,
        per_class_accuracy=per_class,
        spec_name=spec.describe() if spec else "",
        spec_groups=spec.groups if spec else (),
        dimension=X.shape[1],
    )


def extract_manifest(manifest: DatasetManifest, params=features.DEFAULT_PARAMS, jobs: int = 1, progress=None):
    """Extract features for every manifest entry, preserving entry order."""
    entries = manifest.entries
    if jobs <= 1:
        rows = []
        for i, e in enumerate(entries):
            rows.append(features.extract_file(e.path, params, label=e.label))
            if progress:
                progress(i + 1, len(entries))
        return rows
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(features.extract_file, e.path, params, e.label) for e in entries]
        rows = []
        for i, f in enumerate(futs):
            rows.append(f.result())
            if progress:
                progress(i + 1, len(entries))
        return rows


def train_on_rows(rows, spec: features.FeatureSetSpec, class_names=None, ridge="auto", params=None) -> classifier.ClassModel:
    X, y = features.matrix(rows, spec)
    layout = {
        "groups": list(spec.groups),
        "include_shen_mf": spec.include_shen_mf,
        "params": (params.to_dict() if params else {}),
    }
    return classifier.fit(X, y, ridge=ridge, class_names=class_names, layout=layout)


def run_ablation(rows, plan: SplitPlan, specs, class_names=None, params=None, ridge="auto"):
    """Train and evaluate one model per feature selection on a shared split.

    ``rows`` are full extracted feature vectors; each spec projects them,
    fits on the references and evaluates on the tests.
    """
    refs, tests = split(rows, plan)
    reports = []
    for spec in specs:
        model = train_on_rows(refs, spec, class_names=class_names, ridge=ridge, params=params)
        report = evaluate(model, tests, spec)
        report.params = {
            "plan": {"reference": plan.reference, "test": plan.test, "rule": plan.rule, "seed": plan.seed},
            "extraction": params.to_dict() if params else {},
            "ridge": model.ridge,
        }
        reports.append(report)
    return reports


def render_table(reports) -> str:
    """Aligned text table of ablation results."""
    rows = [("No.", "Features", "Dim", "Accuracy")]
    for i, r in enumerate(reports, start=1):
        rows.append((str(i), r.spec_name, str(r.dimension), f"{100.0 * r.accuracy:.2f}%"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(4)))
    return "\n".join(lines)


def save_reports(reports, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")
