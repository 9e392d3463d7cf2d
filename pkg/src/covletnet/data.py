"""Dataset ingestion, standardization, stratified folds and ADASYN oversampling.

Feature matrices are stored variable-major: ``features[i, j]`` is variable
``i`` of sample ``j`` (shape ``p x n``).
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # p x n
    labels: np.ndarray  # length n, ints in [0, C)
    feature_names: list[str]
    class_names: list[str]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("features must be a p x n matrix")
        p, n = features.shape
        if labels.shape != (n,):
            raise ValueError(f"expected {n} labels, got {labels.shape[0]}")
        if len(self.feature_names) != p:
            raise ValueError(f"expected {p} feature names, got {len(self.feature_names)}")
        n_classes = len(self.class_names)
        if n > 0 and (labels.min() < 0 or labels.max() >= n_classes):
            raise ValueError("label ids out of range")
        missing = set(range(n_classes)) - set(labels.tolist())
        if missing:
            raise ValueError(f"classes with no samples: {sorted(missing)}")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", list(self.feature_names))
        object.__setattr__(self, "class_names", list(self.class_names))

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, index) -> "Dataset":
        """Samples at ``index`` (class list kept, so every class must remain present)."""
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.features[:, index], self.labels[index],
                       self.feature_names, self.class_names)

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.feature_names, self.class_names)


def load_csv(path) -> Dataset:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such dataset file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if len(header) < 2 or header[-1] != "label":
        raise ValueError(f"{path}: last header column must be 'label'")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ValueError(f"{path}: dataset has no samples")

    p = len(header) - 1
    values = np.empty((len(body), p))
    raw_labels = []
    for r, row in enumerate(body, start=2):
        if len(row) != p + 1:
            raise ValueError(f"row {r}: expected {p + 1} fields, got {len(row)}")
        for c, cell in enumerate(row[:-1], start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"non-numeric value {cell!r} at row {r}, column {c}") from None
            if not math.isfinite(v):
                raise ValueError(f"non-finite value at row {r}, column {c}")
            values[r - 2, c - 1] = v
        raw_labels.append(row[-1])

    class_names: list[str] = []
    ids = {}
    for name in raw_labels:
        if name not in ids:
            ids[name] = len(class_names)
            class_names.append(name)
    if len(class_names) < 2:
        raise ValueError(f"{path}: dataset has a single class")
    labels = np.array([ids[name] for name in raw_labels], dtype=np.int64)
    return Dataset(values.T.copy(), labels, header[:-1], class_names)


def save_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*data.feature_names, "label"])
        for j in range(data.n_samples):
            writer.writerow([repr(float(v)) for v in data.features[:, j]]
                            + [data.class_names[data.labels[j]]])


# -- standardization ---------------------------------------------------------

@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        if np.any(self.stds <= 0):
            raise ValueError("standardizer stds must be strictly positive")

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[0] != self.means.shape[0]:
            raise ValueError(f"standardizer fitted on {self.means.shape[0]} features, "
                             f"data has {features.shape[0]}")
        return (features - self.means[:, None]) / self.stds[:, None]


def fit_standardizer(train: Dataset, scale: bool = True) -> Standardizer:
    """Per-feature mean and population std of the training samples.

    With ``scale=False`` only centering is applied (stds are set to 1).
    """
    if train.n_samples == 0:
        raise ValueError("cannot fit a standardizer on an empty dataset")
    x = train.features
    means = x.mean(axis=1)
    stds = x.std(axis=1)
    # A constant column can leave a tiny nonzero std from roundoff.
    tol = 1e-12 * np.maximum(1.0, np.abs(means))
    bad = np.flatnonzero(stds <= tol)
    if bad.size:
        names = ", ".join(train.feature_names[i] for i in bad)
        raise ValueError(f"zero-variance feature(s): {names}")
    if not scale:
        stds = np.ones_like(stds)
    return Standardizer(means, stds)


def apply_standardizer(std: Standardizer, data: Dataset) -> Dataset:
    return data.with_features(std.transform(data.features))


# -- folds -------------------------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train_index, test_index) for ``fold``, both ascending."""
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def make_folds(data: Dataset, k: int, seed: int) -> FoldPlan:
    if k < 2:
        raise ValueError("k must be at least 2")
    counts = np.bincount(data.labels, minlength=data.n_classes)
    small = [data.class_names[c] for c in range(data.n_classes) if counts[c] < k]
    if small:
        raise ValueError(f"classes smaller than k={k}: {', '.join(small)}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(data.n_samples, dtype=np.int64)
    offset = 0
    for c in range(data.n_classes):
        members = rng.permutation(np.flatnonzero(data.labels == c))
        # Rotate the starting fold per class so the remainders spread out.
        assignments[members] = (np.arange(members.size) + offset) % k
        offset += members.size
    return FoldPlan(k, assignments, seed)


# -- ADASYN ------------------------------------------------------------------

@dataclass(frozen=True)
class OversampleConfig:
    neighbors: int = 5
    balance: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.neighbors < 1:
            raise ValueError("neighbors must be >= 1")
        if not 0 < self.balance <= 1:
            raise ValueError("balance must be in (0, 1]")


def _nearest(dist_row: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    # stable sort: equal distances resolve to the lower sample index
    order = np.argsort(dist_row[candidates], kind="stable")
    return candidates[order[:k]]


def adasyn_oversample(features: np.ndarray, labels: np.ndarray,
                      cfg: OversampleConfig) -> tuple[np.ndarray, np.ndarray]:
    """ADASYN on a ``p x n`` matrix; synthetic samples are appended after the originals."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise ValueError("ADASYN needs at least two classes")
    K = cfg.neighbors
    n_major = counts.max()
    minority = [(c, m) for c, m in zip(classes, counts) if m < n_major]
    for c, m in minority:
        if m <= K:
            raise ValueError(f"class {c} has {m} samples, needs more than neighbors={K}")
    if not minority:
        return features.copy(), labels.copy()

    pts = features.T
    sq = np.sum(pts**2, axis=1)
    dist = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T, 0.0))
    rng = np.random.default_rng(cfg.seed)
    everyone = np.arange(labels.size)

    new_x, new_y = [], []
    for c, m in minority:
        members = np.flatnonzero(labels == c)
        G = (n_major - m) * cfg.balance
        ratios = np.empty(m)
        same_nn = []
        for t, i in enumerate(members):
            others = everyone[everyone != i]
            nn = _nearest(dist[i], others, K)
            ratios[t] = np.count_nonzero(labels[nn] != c) / K
            peers = members[members != i]
            same_nn.append(_nearest(dist[i], peers, K))
        total = ratios.sum()
        weights = ratios / total if total > 0 else np.full(m, 1.0 / m)
        n_new = np.rint(weights * G).astype(np.int64)
        for t, i in enumerate(members):
            for _ in range(n_new[t]):
                z = same_nn[t][rng.integers(K)]
                delta = rng.random()
                new_x.append(pts[i] + delta * (pts[z] - pts[i]))
                new_y.append(c)

    if not new_x:
        return features.copy(), labels.copy()
    out_x = np.concatenate([features, np.array(new_x).T], axis=1)
    out_y = np.concatenate([labels, np.array(new_y, dtype=np.int64)])
    return out_x, out_y
