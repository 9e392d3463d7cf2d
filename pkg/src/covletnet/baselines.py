"""Fully connected baselines trained with the same loop as the scale network."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .model import (ACTIVATIONS, TrainConfig, TrainedModel, _Network, activate,
                    activation_slope, fit_loop, make_prediction, output_residual,
                    oversampled, parameter_count)
from .seeding import substream


@dataclass(frozen=True)
class MlpSpec:
    layer_widths: tuple
    activation: str = "relu"

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        if len(widths) < 2 or min(widths) < 1:
            raise ValueError("an MLP needs at least input and output widths, all positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "layer_widths", widths)

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    def parameter_count(self) -> int:
        w = self.layer_widths
        return sum(w[i] * w[i + 1] + w[i + 1] for i in range(len(w) - 1))


def make_1mlp(p: int, C: int, activation: str = "relu") -> MlpSpec:
    return MlpSpec((p, C), activation)


def make_2mlp_identity(p: int, C: int, activation: str = "relu") -> MlpSpec:
    return MlpSpec((p, p, C), activation)


def make_2mlp_reduced(p: int, C: int, target_params: int, activation: str = "relu") -> MlpSpec:
    """Widest single hidden layer whose parameter count stays within ``target_params``."""
    h = (target_params - C) // (p + C + 1)
    if h < 1:
        raise ValueError(f"target of {target_params} parameters is too small for a hidden layer "
                         f"(need at least {p + 2 * C + 1})")
    return MlpSpec((p, h, C), activation)


def matched_reduced(p: int, C: int, J: int, activation: str = "relu") -> MlpSpec:
    """2-MLP sized to the scale network with ``J`` scales."""
    return make_2mlp_reduced(p, C, parameter_count(p, C, J), activation)


def init_mlp(spec: MlpSpec, rng: np.random.Generator) -> dict:
    arrays = {}
    w = spec.layer_widths
    for i in range(spec.n_layers):
        arrays[f"W{i}"] = rng.normal(0.0, np.sqrt(2.0 / w[i]), size=(w[i + 1], w[i]))
        arrays[f"b{i}"] = np.zeros(w[i + 1])
    return arrays


def _n_layers(arrays: dict) -> int:
    return sum(1 for k in arrays if k.startswith("W"))


def mlp_forward(arrays: dict, activation: str, X):
    """Returns (Prediction, cache) where cache holds each layer's input and pre-activation."""
    h = np.asarray(X, dtype=float)
    inputs, pre = [], []
    L = _n_layers(arrays)
    for i in range(L):
        inputs.append(h)
        a = arrays[f"W{i}"] @ h + arrays[f"b{i}"][:, None]
        pre.append(a)
        h = activate(activation, a) if i < L - 1 else a
    if not np.all(np.isfinite(h)):
        raise FloatingPointError("non-finite logits")
    pred = make_prediction(h)
    return pred, {"inputs": inputs, "pre": pre, "probabilities": pred.probabilities}


def mlp_backward(arrays: dict, activation: str, cache: dict, labels) -> dict:
    labels = np.asarray(labels, dtype=np.int64)
    grads = {}
    delta = output_residual(cache["probabilities"], labels)
    for i in reversed(range(_n_layers(arrays))):
        grads[f"W{i}"] = delta @ cache["inputs"][i].T
        grads[f"b{i}"] = delta.sum(axis=1)
        if i:
            upstream = arrays[f"W{i}"].T @ delta
            prev_pre = cache["pre"][i - 1]
            delta = upstream * activation_slope(activation, prev_pre, cache["inputs"][i])
    return grads


class _MlpNetwork(_Network):
    def __init__(self, spec: MlpSpec):
        self.activation = spec.activation
        self.decay_keys = tuple(f"W{i}" for i in range(spec.n_layers))

    def forward(self, arrays, X, train):
        return mlp_forward(arrays, self.activation, X)

    def backward(self, arrays, cache, labels):
        return mlp_backward(arrays, self.activation, cache, labels)


def train_mlp(spec: MlpSpec, train_data: Dataset, test_data: Dataset, cfg: TrainConfig, *,
              fold: int = 0, kind: str = "mlp"):
    if spec.layer_widths[0] != train_data.n_features or spec.layer_widths[-1] != train_data.n_classes:
        raise ValueError("MLP widths do not match the data")
    x, y = oversampled(train_data, cfg, fold)
    arrays = init_mlp(spec, substream(cfg.seed, "init", fold))
    test_x = None if test_data is None else test_data.features
    test_y = None if test_data is None else test_data.labels
    arrays, records = fit_loop(_MlpNetwork(spec), arrays, x, y, test_x, test_y, cfg)
    return TrainedModel(kind, arrays, spec.activation), records
