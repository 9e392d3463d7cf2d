"""Run directories: config snapshot, dataset copy, metrics, epoch logs and models.

Layout of a ``cv`` run directory::

    config.txt            flat key = value snapshot
    data.csv              the dataset the run was trained on
    metrics.json          per-fold and aggregate accuracy / precision / recall
    epochs_fold<k>.csv    epoch, train_loss, test_accuracy
    model.json            per fold: indices, standardizer, model, predictions
    timings.json          wall-clock seconds (kept apart so the rest is reproducible)
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .config import dump_config, parse_config
from .data import Dataset, Standardizer, load_csv, save_csv
from .experiments import FoldResult, RunArtifact
from .model import EpochRecord, TrainedModel


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, allow_nan=True)
        fh.write("\n")


def write_rows(path, rows: list, columns) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["none" if row[c] is None else
                             repr(row[c]) if isinstance(row[c], float) else row[c]
                             for c in columns])


def write_epoch_log(path, records) -> None:
    write_rows(path, [vars(r) for r in records], ("epoch", "train_loss", "test_accuracy"))


def read_epoch_log(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return [EpochRecord(int(r["epoch"]), float(r["train_loss"]), float(r["test_accuracy"]))
                for r in csv.DictReader(fh)]


def _fold_to_dict(f: FoldResult) -> dict:
    return {"fold": f.fold,
            "train_index": f.train_index.tolist(),
            "test_index": f.test_index.tolist(),
            "standardizer": {"means": f.standardizer.means.tolist(),
                             "stds": f.standardizer.stds.tolist()},
            "model": f.model.to_dict(),
            "metrics": f.metrics,
            "predictions": f.predictions.tolist()}


def write_run(run_dir, art: RunArtifact, data: Dataset) -> None:
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write(dump_config(art.config))
    save_csv(data, os.path.join(run_dir, "data.csv"))
    _write_json(os.path.join(run_dir, "metrics.json"), art.metrics_dict())
    for f in art.folds:
        write_epoch_log(os.path.join(run_dir, f"epochs_fold{f.fold}.csv"), f.epochs)
    _write_json(os.path.join(run_dir, "model.json"),
                {"model_kind": art.model_kind, "seed": art.seed,
                 "folds": [_fold_to_dict(f) for f in art.folds]})
    _write_json(os.path.join(run_dir, "timings.json"),
                {"folds": [{"fold": f.fold, "seconds": f.seconds} for f in art.folds]})


def load_run(run_dir) -> tuple[RunArtifact, Dataset]:
    model_path = os.path.join(run_dir, "model.json")
    if not os.path.exists(model_path):
        raise FileNotFoundError(f"no run artifact in {run_dir}")
    with open(os.path.join(run_dir, "config.txt"), encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    with open(model_path, encoding="utf-8") as fh:
        stored = json.load(fh)
    folds = []
    for d in stored["folds"]:
        k = d["fold"]
        std = Standardizer(np.array(d["standardizer"]["means"]),
                           np.array(d["standardizer"]["stds"]))
        folds.append(FoldResult(
            k, np.array(d["train_index"], dtype=np.int64), np.array(d["test_index"], dtype=np.int64),
            std, TrainedModel.from_dict(d["model"]),
            read_epoch_log(os.path.join(run_dir, f"epochs_fold{k}.csv")),
            d["metrics"], np.array(d["predictions"], dtype=np.int64)))
    data = load_csv(os.path.join(run_dir, "data.csv"))
    return RunArtifact(cfg, stored["model_kind"], folds), data
