"""Grad-CAM over scales: per-variable saliency summed across the scale blocks."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import TrainedModel, activate, activation_slope, forward


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray  # p x C
    sample_id: int
    predicted_class: int


def embedding_gradient(model: TrainedModel, x, c: int, target: str = "probability"):
    """(E, dy_c/dE) for one sample, both shaped J x p.

    ``target`` selects the softmax probability or the raw logit of class ``c``.
    """
    if model.kind != "ours":
        raise ValueError("Grad-CAM over scales needs a scale network, not an MLP")
    params = model.params()
    if not 0 <= c < params.n_classes:
        raise ValueError(f"class index {c} out of range")
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    pred, cache = forward(params, model.effective_basis(), x, model.kernel)
    e = cache.embedding[:, 0]
    prob = pred.probabilities[:, 0]
    if target == "probability":
        d_logits = -prob[c] * prob
        d_logits[c] += prob[c]
    elif target == "logit":
        d_logits = np.zeros_like(prob)
        d_logits[c] = 1.0
    else:
        raise ValueError("target must be 'probability' or 'logit'")
    dz = params.weights.T @ d_logits
    de = dz * activation_slope(params.activation, e, activate(params.activation, e))
    J, p = params.scales.J, params.n_features
    return e.reshape(J, p), de.reshape(J, p)


def grad_cam(model: TrainedModel, x, c: int, target: str = "probability") -> np.ndarray:
    """Saliency of every input variable for class ``c`` (length p, nonnegative)."""
    e, de = embedding_gradient(model, x, c, target)
    return np.maximum(de * e, 0.0).sum(axis=0)


def saliency_map(model: TrainedModel, x, sample_id: int = 0,
                 target: str = "probability") -> SaliencyMap:
    """Saliency for all classes, tagged with the model's predicted class."""
    x = np.asarray(x, dtype=float)
    C = model.arrays["weights"].shape[0]
    values = np.stack([grad_cam(model, x, c, target) for c in range(C)], axis=1)
    predicted = int(model.predict(x.reshape(-1, 1)).labels[0])
    return SaliencyMap(values, sample_id, predicted)


def rank_regions(smap: SaliencyMap, names) -> list[tuple[str, float]]:
    scores = smap.values[:, smap.predicted_class]
    if len(names) != scores.shape[0]:
        raise ValueError(f"expected {scores.shape[0]} names, got {len(names)}")
    order = np.lexsort((np.arange(scores.size), -scores))
    return [(names[k], float(scores[k])) for k in order]


def write_saliency_csv(path, ranked, class_name: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["region_name", "class", "saliency", "rank"])
        for rank, (name, score) in enumerate(ranked, start=1):
            writer.writerow([name, class_name, repr(score), rank])
