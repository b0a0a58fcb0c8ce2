"""Command-line entry point: ``pfx train|evaluate|predict|synth``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import evaluation, modelio, pipeline, synth
from .errors import ConvergenceError, InvalidArgumentError, PfxError
from .landmarks import LayoutConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


class UsageError(Exception):
    pass


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--kernel", choices=("linear", "poly", "polynomial", "rbf"), default="rbf")
    g.add_argument("--c", type=float, default=1.0, help="SVM box constraint")
    g.add_argument("--gamma", type=float, default=None, help="RBF width (default 1/q)")
    g.add_argument("--degree", type=int, default=3)
    g.add_argument("--coef0", type=float, default=1.0)
    g.add_argument("--tol", type=float, default=1e-3, help="SMO duality-gap tolerance per sample")
    g.add_argument("--lbp-bins", type=int, default=64)
    g.add_argument("--phog-bins", type=int, default=9)
    g.add_argument("--phog-levels", type=int, default=3)
    g.add_argument("--patch-size", type=int, default=32)
    g.add_argument("--smooth-sigma", type=float, default=1.0, help="0 disables smoothing")
    g.add_argument("--pca-dim", type=int, default=None)
    g.add_argument("--lda-dim", type=int, default=None)
    g.add_argument("--layout", type=Path, default=None, help="JSON file of patch offsets")
    g.add_argument("--features", choices=pipeline.FEATURE_SETS, default="both")
    g.add_argument("--seed", type=int, default=0)


def _config(args) -> pipeline.PipelineConfig:
    try:
        layout = LayoutConfig.load(args.layout) if args.layout else LayoutConfig()
        return pipeline.PipelineConfig(
            smooth_sigma=args.smooth_sigma, patch_size=args.patch_size, layout=layout,
            lbp_bins=args.lbp_bins, phog_bins=args.phog_bins, phog_levels=args.phog_levels,
            features=args.features, kernel=args.kernel, C=args.c, gamma=args.gamma,
            degree=args.degree, coef0=args.coef0, tol=args.tol, seed=args.seed,
            pca_dim=args.pca_dim, lda_dim=args.lda_dim)
    except (InvalidArgumentError, OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_train(args) -> int:
    config = _config(args)
    manifest = pipeline.read_manifest(args.manifest)
    model = pipeline.train(manifest, config)
    modelio.save_model(model, args.out)
    print(f"trained {len(model.ensemble.members)} pairwise machines on {len(manifest)} images; "
          f"model written to {args.out}")
    return EXIT_OK


def _write(path: Path, text: str) -> None:
    path.write_text(text, newline="")


def cmd_evaluate(args) -> int:
    config = _config(args)
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    manifest = pipeline.read_manifest(args.manifest)
    labels = manifest.label_ids
    pipeline.check_classes(labels, minimum=args.folds)
    # extract the full hybrid vector once; single-family runs slice columns
    full = replace(config, features="both")
    X = pipeline.extract_features(manifest, full)
    plan = evaluation.stratified_folds(labels, args.folds, args.seed)
    names = pipeline.CLASS_NAMES
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    runs = pipeline.FEATURE_SETS if args.ablation else (config.features,)
    summary_rows = []
    for feats in runs:
        cfg = replace(config, features=feats)
        cols = np.arange(X.shape[1]) if feats == "both" else pipeline.family_columns(full, feats)
        result = evaluation.cross_validate(
            X[:, cols], labels, lambda a, b: pipeline.fit_model(a, b, cfg),
            pipeline.predict_features, len(names), plan=plan)
        tag = "" if len(runs) == 1 else f"{feats}_"
        for i, m in enumerate(result.fold_matrices):
            print(evaluation.format_table(m, names, f"[{feats}] fold {i + 1}/{plan.k}"))
            print()
            _write(out / f"{tag}fold{i + 1}_confusion.csv", evaluation.matrix_csv(m, names))
        print(evaluation.format_table(result.pooled, names, f"[{feats}] pooled over {plan.k} folds"))
        print(f"[{feats}] mean of fold rates = {result.mean_fold_rate:.2f}%")
        print()
        _write(out / f"{tag}pooled_confusion.csv", evaluation.matrix_csv(result.pooled, names))
        _write(out / f"{tag}summary.csv", evaluation.summary_csv(result))
        summary_rows.append((feats, result.pooled_rate, result.mean_fold_rate))
    if len(runs) > 1:
        lines = ["features,pooled_rate,mean_fold_rate"]
        lines += [f"{f},{p:.4f},{m:.4f}" for f, p, m in summary_rows]
        _write(out / "ablation.csv", "\n".join(lines) + "\n")
    print(f"CSV written to {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = modelio.load_model(args.model)
    label, votes = pipeline.predict(model, args.image, args.landmarks)
    print(label)
    if args.votes:
        for name, v in zip(model.class_names, votes):
            print(f"  {name}: {int(v)}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.per_class < 10:
        raise UsageError("--per-class must be at least 10")
    path = synth.generate_synthetic(args.out, args.per_class, args.seed)
    print(f"wrote {args.per_class * len(pipeline.CLASS_NAMES)} images; manifest {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfx", description="Patch-based PHOG+LBP expression recognition")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="stratified k-fold cross-validation")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out-dir", type=Path, default=Path("evaluation"), help="directory for CSV output")
    p.add_argument("--ablation", action="store_true", help="also run PHOG-only and LBP-only on the same folds")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="classify one image")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--image", required=True, type=Path)
    p.add_argument("--landmarks", required=True, help='"lex,ley,rex,rey,nx,ny,llx,lly,lrx,lry"')
    p.add_argument("--votes", action="store_true", help="print the pairwise vote counts")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate the synthetic six-class dataset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--per-class", type=int, default=60)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pfx {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"pfx {args.command}: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (PfxError, OSError) as exc:
        print(f"pfx {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
