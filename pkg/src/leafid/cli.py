"""Command-line surface: extract, train, classify, evaluate, ablate."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import classifier, features, harness
from .errors import LeafIdError

# Ablation rows of the accompanying experiment protocol, in order.
TABLE1_SPECS = [
    features.FeatureSetSpec(("pft",), name="pft"),
    features.FeatureSetSpec(("pft", "hull"), name="pft+hull"),
    features.FeatureSetSpec(("pft", "hull", "color"), name="pft+hull+color"),
    features.FeatureSetSpec(("pft", "hull", "color", "vein"), name="pft+hull+color+vein"),
    features.FeatureSetSpec(("pft", "hull", "color", "glcm"), name="pft+hull+color+glcm"),
    features.FeatureSetSpec(("pft", "hull", "color", "vein", "glcm"), name="pft+hull+color+vein+glcm"),
    features.FeatureSetSpec(("pft", "hull", "color", "vein", "lacunarity"), name="pft+hull+color+vein+lacunarity"),
    features.FeatureSetSpec(("pft", "hull", "color", "vein", "glcm", "lacunarity"), name="pft+hull+color+vein+glcm+lacunarity"),
    features.FeatureSetSpec(
        ("pft", "hull", "color", "vein", "glcm", "lacunarity", "aux_shape"),
        name="pft+hull+color+vein+glcm+lacunarity+aux_shape",
    ),
    features.FeatureSetSpec(features.FULL_GROUPS, name="full"),
]


def _read_config(path):
    """Flat key=value config file; '#' starts a comment line."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise LeafIdError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _params_from(args) -> features.ExtractionParams:
    cfg = _read_config(args.config) if getattr(args, "config", None) else {}

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in cfg:
            return cast(cfg[key])
        return default

    dflt = features.DEFAULT_PARAMS
    return features.ExtractionParams(
        signature_points=pick(args.signature_points, "signature_points", int, dflt.signature_points),
        pft_radial=pick(args.pft_radial, "pft_radial", int, dflt.pft_radial),
        pft_angular=pick(args.pft_angular, "pft_angular", int, dflt.pft_angular),
        glcm_levels=pick(args.glcm_levels, "glcm_levels", int, dflt.glcm_levels),
        dark_veins=pick(
            True if getattr(args, "dark_veins", False) else None,
            "dark_veins",
            lambda s: s.lower() in ("1", "true", "yes"),
            dflt.dark_veins,
        ),
    )


def _jobs_from(args) -> int:
    if getattr(args, "jobs", None):
        return args.jobs
    env = os.environ.get("LEAFID_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _spec_from(args) -> features.FeatureSetSpec:
    if getattr(args, "spec", None):
        groups = tuple(g.strip() for g in args.spec.split(",") if g.strip())
        return features.FeatureSetSpec(groups)
    return features.FULL_SPEC


def _plan_from(args) -> harness.SplitPlan | None:
    if not getattr(args, "split", None):
        return None
    ref_s, test_s = args.split.split(",")
    return harness.SplitPlan(
        reference=int(ref_s), test=int(test_s), rule=args.rule, seed=args.seed
    )


def _load_rows(args, params, jobs):
    """Rows from either a cache file or a dataset directory."""
    src = Path(args.input)
    if src.is_file():
        rows, _ = features.load_cache(src, params)
        return rows, None
    manifest = harness.build_manifest(src, layout=args.layout)
    rows = harness.extract_manifest(manifest, params, jobs=jobs, progress=_progress(args))
    return rows, manifest


def _specs_from_file(path):
    specs = []
    for name, value in _read_config(path).items():
        groups = tuple(g.strip() for g in value.split(",") if g.strip())
        specs.append(features.FeatureSetSpec(groups, name=name))
    if not specs:
        raise LeafIdError(f"no feature selections found in {path}")
    return specs


def cmd_extract(args) -> int:
    params = _params_from(args)
    jobs = _jobs_from(args)
    manifest = harness.build_manifest(Path(args.input), layout=args.layout)
    rows = harness.extract_manifest(manifest, params, jobs=jobs, progress=_progress(args))
    features.save_cache(rows, args.out, params)
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return 0


def cmd_train(args) -> int:
    params = _params_from(args)
    spec = _spec_from(args)
    rows, manifest = _load_rows(args, params, _jobs_from(args))
    plan = _plan_from(args)
    if plan is not None:
        rows, _ = harness.split(rows, plan)
    names = manifest.class_names if manifest else _names_from_rows(rows)
    model = harness.train_on_rows(rows, spec, class_names=names, ridge=args.ridge, params=params)
    classifier.save_model(model, args.out)
    print(f"trained on {len(rows)} rows ({model.n_classes} classes, {model.dimension} features) -> {args.out}")
    return 0


def cmd_classify(args) -> int:
    model = classifier.load_model(args.model)
    layout = model.layout or {}
    spec = features.FeatureSetSpec(
        tuple(layout.get("groups", features.FULL_GROUPS)),
        include_shen_mf=layout.get("include_shen_mf", True),
    )
    params = (
        features.ExtractionParams.from_dict(layout["params"])
        if layout.get("params")
        else _params_from(args)
    )
    k = max(1, args.top)
    for path in args.images:
        row = features.extract_file(path, params)
        probs = classifier.posterior(model, features.project(row, spec).values)
        order = probs.argsort()[::-1][:k]
        ranked = "  ".join(f"{model.class_names[i]} {probs[i]:.4f}" for i in order)
        print(f"{path}: {ranked}")
    return 0


def cmd_evaluate(args) -> int:
    model = classifier.load_model(args.model)
    params = (
        features.ExtractionParams.from_dict(model.layout["params"])
        if model.layout.get("params")
        else _params_from(args)
    )
    spec = features.FeatureSetSpec(
        tuple(model.layout.get("groups", features.FULL_GROUPS)),
        include_shen_mf=model.layout.get("include_shen_mf", True),
    )
    rows, _ = _load_rows(args, params, _jobs_from(args))
    plan = _plan_from(args)
    if plan is not None:
        _, rows = harness.split(rows, plan)
    report = harness.evaluate(model, rows, spec)
    report.params = {"extraction": params.to_dict(), "ridge": model.ridge}
    print(f"accuracy {report.accuracy:.4f} ({report.n_correct}/{report.n_tested})")
    if args.out:
        harness.save_reports([report], args.out)
        print(f"report written to {args.out}")
    return 0


def cmd_ablate(args) -> int:
    params = _params_from(args)
    rows, manifest = _load_rows(args, params, _jobs_from(args))
    names = manifest.class_names if manifest else _names_from_rows(rows)
    if getattr(args, "cache_out", None):
        features.save_cache(rows, args.cache_out, params)
    specs = _specs_from_file(args.specs) if args.specs else TABLE1_SPECS
    ref_s, test_s = args.plan.split(",")
    plan = harness.SplitPlan(reference=int(ref_s), test=int(test_s), rule=args.rule, seed=args.seed)
    reports = harness.run_ablation(rows, plan, specs, class_names=names, params=params, ridge=args.ridge)
    print(harness.render_table(reports))
    if args.out:
        harness.save_reports(reports, args.out)
        print(f"reports written to {args.out}")
    return 0


def _names_from_rows(rows):
    c = 1 + max(r.label for r in rows if r.label is not None)
    return [str(k) for k in range(c)]


def _progress(args):
    if not getattr(args, "verbose", False):
        return None

    def show(done, total):
        print(f"\rextracted {done}/{total}", end="" if done < total else "\n", file=sys.stderr)

    return show


def _add_common(p, with_layout=True):
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--signature-points", type=int, dest="signature_points", help="radial signature sample count")
    p.add_argument("--pft-radial", type=int, dest="pft_radial", help="polar raster rings")
    p.add_argument("--pft-angular", type=int, dest="pft_angular", help="polar raster spokes")
    p.add_argument("--glcm-levels", type=int, dest="glcm_levels", help="GLCM quantization levels")
    p.add_argument("--dark-veins", action="store_true", help="veins darker than the lamina")
    p.add_argument("--jobs", type=int, help="parallel image extraction (env LEAFID_JOBS)")
    p.add_argument("--verbose", action="store_true")
    if with_layout:
        p.add_argument("--layout", choices=harness.LAYOUTS, default="class-subdirs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leafid", description="Leaf-based plant identification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract a feature cache from a dataset directory")
    p.add_argument("input", help="dataset root directory")
    p.add_argument("--out", required=True, help="feature cache to write")
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit a classifier from a cache or dataset")
    p.add_argument("input", help="feature cache or dataset root")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--spec", help="comma-separated feature groups (default: full)")
    p.add_argument("--split", help="REF,TEST per-class counts; train on the reference side")
    p.add_argument("--rule", choices=("sorted", "random"), default="sorted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge", default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify leaf images with a trained model")
    p.add_argument("model")
    p.add_argument("images", nargs="+")
    p.add_argument("--top", type=int, default=1, help="print the top-k species")
    _add_common(p, with_layout=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="evaluate a model on a cache or dataset")
    p.add_argument("model")
    p.add_argument("input", help="feature cache or dataset root")
    p.add_argument("--split", help="REF,TEST per-class counts; evaluate on the test side")
    p.add_argument("--rule", choices=("sorted", "random"), default="sorted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON report path")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="train/evaluate nested feature selections")
    p.add_argument("input", help="feature cache or dataset root")
    p.add_argument("--plan", required=True, help="REF,TEST per-class counts")
    p.add_argument("--rule", choices=("sorted", "random"), default="sorted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--specs", help="key=value file of named group selections")
    p.add_argument("--ridge", default="auto")
    p.add_argument("--out", help="JSON reports path")
    p.add_argument("--cache-out", dest="cache_out", help="also save the extracted features")
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LeafIdError as exc:
        print(f"leafid: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"leafid: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
