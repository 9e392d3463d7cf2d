"""Classification metrics with per-class (macro) averaging."""
from __future__ import annotations

import numpy as np


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    if y_true.size == 0:
        return float("nan")
    return float(np.mean(y_true == np.asarray(y_pred)))


def macro_precision(y_true, y_pred, n_classes: int) -> float:
    cm = confusion_matrix(y_true, y_pred, n_classes)
    return float(np.mean(_safe_ratio(np.diag(cm), cm.sum(axis=0))))


def macro_recall(y_true, y_pred, n_classes: int) -> float:
    cm = confusion_matrix(y_true, y_pred, n_classes)
    return float(np.mean(_safe_ratio(np.diag(cm), cm.sum(axis=1))))


def classification_report(y_true, y_pred, n_classes: int) -> dict:
    return {"accuracy": accuracy(y_true, y_pred),
            "precision": macro_precision(y_true, y_pred, n_classes),
            "recall": macro_recall(y_true, y_pred, n_classes)}


def mean_std(values) -> tuple[float, float]:
    """Mean and population std across folds."""
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std())


def format_mean_std(values, digits: int = 3) -> str:
    m, s = mean_std(values)
    return f"{m:.{digits}f}±{s:.{digits}f}"
