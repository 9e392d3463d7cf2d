"""Synthetic classification data with class signal planted in chosen directions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .seeding import substream


@dataclass(frozen=True)
class SynthSpec:
    p: int = 40
    n: int = 200
    C: int = 2
    informative_components: int = 4
    signal_strength: float = 2.0
    noise_std: float = 1.0
    seed: int = 0
    # relative class sizes; default 2:1 (majority first) for two classes
    class_weights: tuple = None
    # "random" rotates the signal into a random orthonormal basis;
    # "axis" plants it on individual (randomly chosen) features.
    basis: str = "random"

    def __post_init__(self):
        if self.p < 1 or self.n < 1 or self.C < 2:
            raise ValueError("need p >= 1, n >= 1 and C >= 2")
        if not 0 <= self.informative_components <= self.p:
            raise ValueError("informative_components must lie in [0, p]")
        if self.signal_strength < 0 or self.noise_std < 0:
            raise ValueError("signal_strength and noise_std must be nonnegative")
        if self.basis not in ("random", "axis"):
            raise ValueError("basis must be 'random' or 'axis'")
        weights = self.class_weights
        if weights is None:
            weights = (2.0,) + (1.0,) * (self.C - 1)
        weights = tuple(float(w) for w in weights)
        if len(weights) != self.C or min(weights) <= 0:
            raise ValueError("class_weights needs C positive entries")
        object.__setattr__(self, "class_weights", weights)


def class_signs(C: int, k: int) -> np.ndarray:
    """C x k sign pattern; rows are distinct and class 1 mirrors class 0 when C = 2."""
    bits = max(1, int(np.ceil(np.log2(C))))
    d = np.arange(k)
    return np.array([np.where((c >> (d % bits)) & 1, -1.0, 1.0) for c in range(C)])


def class_counts(spec: SynthSpec) -> np.ndarray:
    w = np.asarray(spec.class_weights)
    raw = w / w.sum() * spec.n
    counts = np.floor(raw).astype(int)
    # hand leftovers to the largest remainders, earlier classes first on ties
    order = np.lexsort((np.arange(spec.C), -(raw - counts)))
    counts[order[: spec.n - counts.sum()]] += 1
    return counts


def signal_basis(spec: SynthSpec) -> np.ndarray:
    rng = substream(spec.seed, "synth", 0)
    if spec.basis == "axis":
        return np.eye(spec.p)[:, rng.permutation(spec.p)]
    q, r = np.linalg.qr(rng.standard_normal((spec.p, spec.p)))
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


def informative_features(spec: SynthSpec) -> np.ndarray:
    """Feature indices carrying signal (only meaningful for ``basis="axis"``)."""
    Q = signal_basis(spec)
    return np.argmax(np.abs(Q[:, : spec.informative_components]), axis=0)


def synth_generate(spec: SynthSpec) -> Dataset:
    Q = signal_basis(spec)
    rng = substream(spec.seed, "synth", 1)
    k = spec.informative_components
    counts = class_counts(spec)
    labels = np.repeat(np.arange(spec.C), counts)
    labels = labels[rng.permutation(spec.n)]
    # lead with one sample per class so ids match first-appearance order in CSV dumps
    firsts = [int(np.flatnonzero(labels == c)[0]) for c in range(spec.C)]
    rest = np.setdiff1d(np.arange(spec.n), firsts)
    labels = labels[np.concatenate([firsts, rest])]

    coords = np.zeros((spec.C, spec.p))
    coords[:, :k] = spec.signal_strength * class_signs(spec.C, k)
    means = Q @ coords.T  # p x C
    # noise spread decays gently across directions so the spectrum is not flat
    spread = spec.noise_std * np.linspace(1.0, 0.5, spec.p)
    noise = Q @ (spread[:, None] * rng.standard_normal((spec.p, spec.n)))
    features = means[:, labels] + noise

    width = len(str(spec.p - 1))
    names = [f"f{i:0{width}d}" for i in range(spec.p)]
    return Dataset(features, labels, names, [f"class{c}" for c in range(spec.C)])
