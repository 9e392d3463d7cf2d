"""Command-line entry point: synth, cv, sweep, converge, interpret."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .artifact import load_run, write_rows, write_run
from .config import KEYS, RunConfig, apply_settings, load_config, parse_overrides
from .data import load_csv, save_csv
from .experiments import compare_convergence, run_cv, sweep_scales
from .interpret import rank_regions, saliency_map, write_saliency_csv
from .synth import synth_generate

log = logging.getLogger("covletnet")


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return apply_settings(cfg, parse_overrides(args.set))


def _dataset(args, cfg: RunConfig):
    if args.data:
        return load_csv(args.data)
    log.info("no --data given; generating synthetic data from synth.* keys")
    return synth_generate(cfg.synth)


def interpret_cmd(run_dir, sample_index: int, out=None, target: str = None) -> str:
    """Write the ranked saliency CSV for one sample and return its path.

    The sample is explained by the fold model that held it out.
    """
    art, data = load_run(run_dir)
    if art.model_kind != "ours":
        raise ValueError(f"run {run_dir} holds {art.model_kind} models; saliency needs 'ours'")
    if not 0 <= sample_index < data.n_samples:
        raise IndexError(f"sample index {sample_index} outside 0..{data.n_samples - 1}")
    fold = next(f for f in art.folds if sample_index in set(f.test_index.tolist()))
    x = fold.standardizer.transform(data.features[:, [sample_index]])[:, 0]
    smap = saliency_map(fold.model, x, sample_index, target or art.config.cam_target)
    ranked = rank_regions(smap, data.feature_names)
    out = out or os.path.join(run_dir, f"saliency_sample{sample_index}.csv")
    write_saliency_csv(out, ranked, data.class_names[smap.predicted_class])
    return out


def _cmd_synth(args):
    cfg = _config(args)
    data = synth_generate(cfg.synth)
    save_csv(data, args.out)
    print(f"wrote {data.n_samples} samples x {data.n_features} features to {args.out}")


def _cmd_cv(args):
    cfg = _config(args)
    if args.model:
        cfg = apply_settings(cfg, {"model": args.model})
    data = _dataset(args, cfg)
    art = run_cv(data, cfg.model, cfg)
    write_run(args.out, art, data)
    summ = art.summary()
    print("metric\tmean±std")
    for name in ("accuracy", "precision", "recall"):
        print(f"{name}\t{summ[name]['formatted']}")


def _cmd_sweep(args):
    cfg = _config(args)
    data = _dataset(args, cfg)
    J_list = [int(j) for j in args.J.split(",")] if args.J else list(cfg.sweep_J)
    result = sweep_scales(data, J_list, cfg)
    os.makedirs(args.out, exist_ok=True)
    columns = ["J", "scales"] + [k for k in result.rows[0] if k not in ("J", "scales")]
    write_rows(os.path.join(args.out, "sweep.csv"), result.rows, columns)
    for (J, mode), art in result.runs.items():
        write_run(os.path.join(args.out, f"J{J}_{mode}"), art, data)
    print("J\tscales\taccuracy")
    for row in result.rows:
        print(f"{row['J']}\t{row['scales']}\t{row['accuracy_mean']:.3f}±{row['accuracy_std']:.3f}")


def _cmd_converge(args):
    cfg = _config(args)
    data = _dataset(args, cfg)
    lrs = [float(v) for v in args.lrs.split(",")] if args.lrs else list(cfg.converge_lrs)
    result = compare_convergence(data, cfg, lrs, args.threshold)
    os.makedirs(args.out, exist_ok=True)
    write_rows(os.path.join(args.out, "curves.csv"), result.curves,
               ("epoch", "model", "lr", "fold", "test_accuracy"))
    write_rows(os.path.join(args.out, "thresholds.csv"), result.thresholds,
               ("model", "lr", "fold", "epochs_to_threshold"))
    for (kind, lr), art in result.runs.items():
        write_run(os.path.join(args.out, f"{kind}_lr{lr:g}"), art, data)
    print("model\tlr\tfold\tepochs_to_threshold")
    for row in result.thresholds:
        reached = row["epochs_to_threshold"]
        print(f"{row['model']}\t{row['lr']:g}\t{row['fold']}\t{'none' if reached is None else reached}")


def _cmd_interpret(args):
    path = interpret_cmd(args.run_dir, args.sample, args.out, args.target)
    print(f"wrote {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covletnet",
        description="Scale-trained covariance wavelet network for small tabular datasets.",
        epilog="Config keys: " + ", ".join(KEYS))
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        if data:
            p.add_argument("--data", help="dataset CSV (default: synthetic data from synth.* keys)")

    p = sub.add_parser("synth", help="write a synthetic dataset CSV")
    common(p, data=False)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("cv", help="k-fold cross-validated training of one model")
    common(p)
    p.add_argument("--model", choices=("ours", "mlp1", "mlp2_r", "mlp2_i"))
    p.add_argument("--out", required=True, help="run directory")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("sweep", help="CV accuracy vs number of scales, trained and frozen")
    common(p)
    p.add_argument("--J", help="comma-separated scale counts (default: sweep_J key)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("converge", help="per-epoch test accuracy of ours vs 2-MLP_I")
    common(p)
    p.add_argument("--lrs", help="comma-separated learning rates (default: converge_lrs key)")
    p.add_argument("--threshold", type=float, help="accuracy threshold (default: converge_threshold key)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("interpret", help="ranked Grad-CAM saliency for one sample of a cv run")
    p.add_argument("run_dir")
    p.add_argument("--sample", type=int, required=True, help="row index into the run's data.csv")
    p.add_argument("--target", choices=("probability", "logit"))
    p.add_argument("--out", help="output CSV (default: <run_dir>/saliency_sample<i>.csv)")
    p.set_defaults(func=_cmd_interpret)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (OSError, ValueError, KeyError, IndexError, FloatingPointError, RuntimeError) as exc:
        print(f"covletnet: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
