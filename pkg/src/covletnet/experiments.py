"""Cross-validated runs, the scale sweep and the convergence comparison."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import make_1mlp, make_2mlp_identity, matched_reduced, train_mlp
from .config import RunConfig
from .data import Dataset, Standardizer, apply_standardizer, fit_standardizer, make_folds
from .metrics import classification_report, format_mean_std, mean_std
from .model import TrainedModel, train
from .seeding import subseed

log = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall")


@dataclass
class FoldResult:
    fold: int
    train_index: np.ndarray
    test_index: np.ndarray
    standardizer: Standardizer
    model: TrainedModel
    epochs: list
    metrics: dict
    predictions: np.ndarray
    seconds: float = 0.0


@dataclass
class RunArtifact:
    config: RunConfig
    model_kind: str
    folds: list = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.train.seed

    def fold_metrics(self, name: str) -> list:
        return [f.metrics[name] for f in self.folds]

    def summary(self) -> dict:
        out = {}
        for name in METRICS:
            values = self.fold_metrics(name)
            m, s = mean_std(values)
            out[name] = {"mean": m, "std": s, "formatted": format_mean_std(values)}
        return out

    def metrics_dict(self) -> dict:
        return {"model": self.model_kind,
                "seed": self.seed,
                "folds": [{"fold": f.fold, **f.metrics} for f in self.folds],
                "aggregate": self.summary()}


def _fit(kind: str, train_set: Dataset, test_set: Dataset, cfg: RunConfig, fold: int):
    tcfg = cfg.train
    p, C = train_set.n_features, train_set.n_classes
    if kind == "ours":
        return train(train_set, test_set, tcfg, fold=fold)
    specs = {"mlp1": lambda: make_1mlp(p, C, tcfg.activation),
             "mlp2_r": lambda: matched_reduced(p, C, tcfg.J, tcfg.activation),
             "mlp2_i": lambda: make_2mlp_identity(p, C, tcfg.activation)}
    if kind not in specs:
        raise ValueError(f"unknown model kind {kind!r}")
    return train_mlp(specs[kind](), train_set, test_set, tcfg, fold=fold, kind=kind)


def run_fold(data: Dataset, kind: str, cfg: RunConfig, fold: int,
             train_index: np.ndarray, test_index: np.ndarray) -> FoldResult:
    start = time.perf_counter()
    raw_train = data.subset(train_index)
    std = fit_standardizer(raw_train, scale=cfg.standardize == "zscore")
    train_set = apply_standardizer(std, raw_train)
    test_set = apply_standardizer(std, data.subset(test_index))
    model, epochs = _fit(kind, train_set, test_set, cfg, fold)
    predicted = model.predict(test_set.features).labels
    metrics = classification_report(test_set.labels, predicted, data.n_classes)
    return FoldResult(fold, train_index, test_index, std, model, epochs, metrics,
                      predicted, time.perf_counter() - start)


def fold_plan(data: Dataset, cfg: RunConfig):
    return make_folds(data, cfg.folds, subseed(cfg.train.seed, "folds"))


def _run_fold_args(args):
    return run_fold(*args)


def run_cv(data: Dataset, model_kind: str, cfg: RunConfig) -> RunArtifact:
    """k-fold CV; every fold-level statistic is fitted on that fold's training part."""
    plan = fold_plan(data, cfg)
    jobs = [(data, model_kind, cfg, f, *plan.split(f)) for f in range(cfg.folds)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_fold_args, jobs))
    else:
        results = [run_fold(*job) for job in jobs]
    results.sort(key=lambda r: r.fold)
    art = RunArtifact(cfg, model_kind, results)
    log.info("%s: accuracy %s", model_kind, art.summary()["accuracy"]["formatted"])
    return art


def evaluate_artifact(data: Dataset, art: RunArtifact) -> list:
    """Recompute per-fold metrics from the stored models and test indices."""
    out = []
    for f in art.folds:
        test_set = apply_standardizer(f.standardizer, data.subset(f.test_index))
        predicted = f.model.predict(test_set.features).labels
        out.append(classification_report(test_set.labels, predicted, data.n_classes))
    return out


# -- sweeps ------------------------------------------------------------------

@dataclass
class SweepResult:
    rows: list  # dicts: J, scales, accuracy_mean, accuracy_std, ...
    runs: dict  # (J, "trained" | "frozen") -> RunArtifact


def sweep_scales(data: Dataset, J_list, cfg: RunConfig) -> SweepResult:
    rows, runs = [], {}
    for J in J_list:
        for mode, frozen in (("trained", False), ("frozen", True)):
            run_cfg = replace(cfg, train=replace(cfg.train, J=int(J), freeze_scales=frozen))
            art = run_cv(data, "ours", run_cfg)
            runs[(int(J), mode)] = art
            summ = art.summary()
            rows.append({"J": int(J), "scales": mode,
                         **{f"{m}_{stat}": summ[m][stat]
                            for m in METRICS for stat in ("mean", "std")}})
    return SweepResult(rows, runs)


@dataclass
class ConvergenceResult:
    curves: list  # dicts: epoch, model, lr, fold, test_accuracy
    thresholds: list  # dicts: model, lr, fold, epochs_to_threshold (int or None)
    runs: dict  # (model, lr) -> RunArtifact


def first_epoch_reaching(records, threshold: float):
    for r in records:
        if r.test_accuracy >= threshold:
            return r.epoch
    return None


def compare_convergence(data: Dataset, cfg: RunConfig, lrs, threshold: float = None,
                        models=("ours", "mlp2_i")) -> ConvergenceResult:
    threshold = cfg.converge_threshold if threshold is None else threshold
    curves, table, runs = [], [], {}
    for lr in lrs:
        run_cfg = replace(cfg, train=replace(cfg.train, lr_weights=float(lr),
                                             lr_scales=float(lr)))
        for kind in models:
            art = run_cv(data, kind, run_cfg)
            runs[(kind, float(lr))] = art
            for f in art.folds:
                for r in f.epochs:
                    curves.append({"epoch": r.epoch, "model": kind, "lr": float(lr),
                                   "fold": f.fold, "test_accuracy": r.test_accuracy})
                table.append({"model": kind, "lr": float(lr), "fold": f.fold,
                              "epochs_to_threshold": first_epoch_reaching(f.epochs, threshold)})
    return ConvergenceResult(curves, table, runs)
