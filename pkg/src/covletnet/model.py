"""The scale-trained network: covariance embedding -> activation -> linear -> softmax.

Parameters live in plain dicts of arrays so the optimizer and the training
loop can be shared with the MLP baselines.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, OversampleConfig, adasyn_oversample
from .kernel import KernelSpec
from .metrics import accuracy
from .seeding import subseed, substream
from .spectral import SpectralBasis, fit_basis, project
from .transform import ScaleSet, embed_all, scale_gradients

log = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "tanh", "identity")
PROB_FLOOR = 1e-12


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite training loss ({value}) at epoch {epoch}")
        self.epoch = epoch


# -- activations -------------------------------------------------------------

def activate(kind: str, x: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "identity":
        return x
    raise ValueError(f"unknown activation {kind!r}")


def activation_slope(kind: str, x: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Derivative given pre-activation ``x`` and output ``out``; relu'(0) = 0."""
    if kind == "relu":
        return (x > 0).astype(float)
    if kind == "tanh":
        return 1.0 - out**2
    if kind == "identity":
        return np.ones_like(x)
    raise ValueError(f"unknown activation {kind!r}")


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    seed: int = 0
    lr_weights: float = 0.01
    lr_scales: float = 0.01
    weight_decay: float = 0.01
    J: int = 16
    scale_init_low: float = 0.1
    scale_init_high: float = 10.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    activation: str = "relu"
    freeze_scales: bool = False
    normalize_eigenvalues: bool = False
    optimizer: str = "adamw"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    oversample: bool = True
    adasyn_neighbors: int = 5
    adasyn_balance: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.J < 1:
            raise ValueError("J must be >= 1")
        if self.lr_weights <= 0 or self.lr_scales <= 0:
            raise ValueError("learning rates must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if not 0 < self.scale_init_low < self.scale_init_high:
            raise ValueError("scale_init range must satisfy 0 < low < high")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.optimizer not in ("adamw", "sgd"):
            raise ValueError("optimizer must be 'adamw' or 'sgd'")


# -- parameters and predictions ----------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    weights: np.ndarray  # C x (J*p)
    bias: np.ndarray  # C
    activation: str
    scales: ScaleSet

    def __post_init__(self):
        C, width = self.weights.shape
        if self.bias.shape != (C,):
            raise ValueError("bias length must match the number of classes")
        if width % self.scales.J:
            raise ValueError("weight width must be a multiple of J")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] // self.scales.J

    def arrays(self) -> dict:
        return {"weights": self.weights, "bias": self.bias,
                "log_scales": self.scales.log_scales}

    def with_arrays(self, arrays: dict) -> "ModelParams":
        return ModelParams(arrays["weights"], arrays["bias"], self.activation,
                           ScaleSet(arrays["log_scales"]))


def parameter_count(p: int, C: int, J: int) -> int:
    return C * J * p + C + J


@dataclass(frozen=True)
class Prediction:
    logits: np.ndarray  # C x n
    probabilities: np.ndarray

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.logits, axis=0)


def softmax_columns(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def make_prediction(logits: np.ndarray) -> Prediction:
    return Prediction(logits, softmax_columns(logits))


def init_params(p: int, C: int, cfg: TrainConfig, rng: np.random.Generator = None) -> ModelParams:
    """He-normal classifier weights, zero bias, log-uniform scales."""
    if p < 1 or C < 2:
        raise ValueError("need p >= 1 and C >= 2")
    if rng is None:
        rng = substream(cfg.seed, "init")
    fan_in = cfg.J * p
    W = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(C, fan_in))
    theta = rng.uniform(np.log10(cfg.scale_init_low), np.log10(cfg.scale_init_high), size=cfg.J)
    return ModelParams(W, np.zeros(C), cfg.activation, ScaleSet(theta))


# -- forward / loss / backward -----------------------------------------------

@dataclass
class ForwardCache:
    embedding: np.ndarray  # E, (J*p) x n
    hidden: np.ndarray  # sigma(E)
    probabilities: np.ndarray
    projected: np.ndarray  # U^T X


def forward(params: ModelParams, basis: SpectralBasis, X, kernel, *,
            projected=None) -> tuple[Prediction, ForwardCache]:
    X = np.asarray(X, dtype=float)
    if X.shape[0] != params.n_features or basis.dim != params.n_features:
        raise ValueError("data, basis and parameters disagree on the number of features")
    xhat = project(basis, X) if projected is None else projected
    E = embed_all(basis, kernel, X, params.scales, projected=xhat).stacked
    Z = activate(params.activation, E)
    if not np.all(np.isfinite(Z)):
        raise FloatingPointError("non-finite values after the activation")
    logits = params.weights @ Z + params.bias[:, None]
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("non-finite logits")
    pred = make_prediction(logits)
    return pred, ForwardCache(E, Z, pred.probabilities, xhat)


def loss(pred: Prediction, labels) -> float:
    """Mean cross-entropy of the true-class probabilities."""
    labels = np.asarray(labels, dtype=np.int64)
    C, n = pred.probabilities.shape
    if labels.shape != (n,):
        raise ValueError("label count does not match predictions")
    if np.any((labels < 0) | (labels >= C)):
        raise ValueError("label out of range")
    picked = pred.probabilities[labels, np.arange(n)]
    return float(-np.mean(np.log(np.maximum(picked, PROB_FLOOR))))


def output_residual(probabilities: np.ndarray, labels) -> np.ndarray:
    """dL/dlogits for the mean cross-entropy."""
    C, n = probabilities.shape
    resid = probabilities.copy()
    resid[labels, np.arange(n)] -= 1.0
    return resid / n


def backward(cache: ForwardCache, params: ModelParams, basis: SpectralBasis, X, labels,
             kernel, *, freeze_scales: bool = False) -> dict:
    labels = np.asarray(labels, dtype=np.int64)
    if cache.embedding.shape != (params.weights.shape[1], labels.size):
        raise ValueError("stale forward cache")
    d_logits = output_residual(cache.probabilities, labels)
    dW = d_logits @ cache.hidden.T
    db = d_logits.sum(axis=1)
    dZ = params.weights.T @ d_logits
    dE = dZ * activation_slope(params.activation, cache.embedding, cache.hidden)
    if freeze_scales:
        dtheta = np.zeros(params.scales.J)
    else:
        dtheta = scale_gradients(basis, kernel, X, params.scales, dE,
                                 projected=cache.projected)
    return {"weights": dW, "bias": db, "log_scales": dtheta}


# -- optimizers --------------------------------------------------------------

@dataclass
class OptimState:
    first: dict
    second: dict
    step_count: int = 0
    lr_weights: float = 0.01
    lr_scales: float = 0.01
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.01
    scale_keys: frozenset = frozenset({"log_scales"})
    decay_keys: frozenset = frozenset({"weights"})

    @classmethod
    def fresh(cls, params: dict, cfg: TrainConfig, *, scale_keys=("log_scales",),
              decay_keys=("weights",)) -> "OptimState":
        return cls({k: np.zeros_like(v) for k, v in params.items()},
                   {k: np.zeros_like(v) for k, v in params.items()},
                   0, cfg.lr_weights, cfg.lr_scales, (cfg.beta1, cfg.beta2), cfg.eps,
                   cfg.weight_decay, frozenset(scale_keys), frozenset(decay_keys))

    def lr_for(self, key: str) -> float:
        return self.lr_scales if key in self.scale_keys else self.lr_weights


def adamw_step(params: dict, grads: dict, opt: OptimState) -> tuple[dict, OptimState]:
    """One AdamW update; decay is decoupled and applied only to ``decay_keys``."""
    b1, b2 = opt.betas
    t = opt.step_count + 1
    first, second, updated = {}, {}, {}
    for key, value in params.items():
        g = grads[key]
        if g.shape != value.shape:
            raise ValueError(f"gradient shape mismatch for {key}")
        lr = opt.lr_for(key)
        m = b1 * opt.first[key] + (1 - b1) * g
        v = b2 * opt.second[key] + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        new = value * (1 - lr * opt.weight_decay) if key in opt.decay_keys else value
        updated[key] = new - lr * m_hat / (np.sqrt(v_hat) + opt.eps)
        first[key], second[key] = m, v
    return updated, replace(opt, first=first, second=second, step_count=t)


def sgd_step(params: dict, grads: dict, opt: OptimState) -> tuple[dict, OptimState]:
    """Plain gradient descent with the same learning-rate groups (no decay, no moments)."""
    updated = {k: v - opt.lr_for(k) * grads[k] for k, v in params.items()}
    return updated, replace(opt, step_count=opt.step_count + 1)


# -- trained model and the shared training loop ------------------------------

@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    test_accuracy: float


@dataclass
class TrainedModel:
    """A fitted network of either kind; ``basis`` is None for MLPs."""

    kind: str
    arrays: dict
    activation: str
    basis: SpectralBasis = None
    kernel: KernelSpec = None
    normalize_eigenvalues: bool = False

    def params(self) -> ModelParams:
        return ModelParams(self.arrays["weights"], self.arrays["bias"], self.activation,
                           ScaleSet(self.arrays["log_scales"]))

    def effective_basis(self) -> SpectralBasis:
        return self.basis.normalized() if self.normalize_eigenvalues else self.basis

    def predict(self, X) -> Prediction:
        if self.kind == "ours":
            return forward(self.params(), self.effective_basis(), X, self.kernel)[0]
        from .baselines import mlp_forward
        return mlp_forward(self.arrays, self.activation, X)[0]

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.arrays.values()))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "activation": self.activation,
               "normalize_eigenvalues": self.normalize_eigenvalues,
               "arrays": {k: {"shape": list(v.shape), "values": v.ravel().tolist()}
                          for k, v in self.arrays.items()}}
        if self.basis is not None:
            out["basis"] = self.basis.to_dict()
            k = self.kernel
            out["kernel"] = {"alpha": k.alpha, "beta": k.beta, "x1": k.x1, "x2": k.x2,
                             "spline_coeffs": list(k.spline_coeffs)}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        arrays = {k: np.array(v["values"], dtype=float).reshape(v["shape"])
                  for k, v in d["arrays"].items()}
        basis = SpectralBasis.from_dict(d["basis"]) if "basis" in d else None
        kernel = None
        if "kernel" in d:
            kd = d["kernel"]
            kernel = KernelSpec(kd["alpha"], kd["beta"], kd["x1"], kd["x2"],
                                tuple(kd["spline_coeffs"]))
        return cls(d["kind"], arrays, d["activation"], basis, kernel,
                   d.get("normalize_eigenvalues", False))


class _Network:
    """Adapter the training loop drives: parameter dict plus forward/backward closures."""

    scale_keys: tuple = ()
    decay_keys: tuple = ()

    def forward(self, arrays, X, train: bool):
        raise NotImplementedError

    def backward(self, arrays, cache, labels):
        raise NotImplementedError


class _CovletNetwork(_Network):
    scale_keys = ("log_scales",)
    decay_keys = ("weights",)

    def __init__(self, template: ModelParams, basis, kernel, train_x, freeze_scales):
        self.template = template
        self.basis = basis
        self.kernel = kernel
        self.train_x = train_x
        self.train_projected = project(basis, train_x)  # fixed for the whole run
        self.freeze_scales = freeze_scales

    def forward(self, arrays, X, train):
        params = self.template.with_arrays(arrays)
        proj = self.train_projected if train else None
        return forward(params, self.basis, X, self.kernel, projected=proj)

    def backward(self, arrays, cache, labels):
        params = self.template.with_arrays(arrays)
        return backward(cache, params, self.basis, self.train_x, labels, self.kernel,
                        freeze_scales=self.freeze_scales)


def fit_loop(net: _Network, arrays: dict, train_x, train_y, test_x, test_y,
             cfg: TrainConfig) -> tuple[dict, list[EpochRecord]]:
    """Full-batch training for ``cfg.epochs`` updates.

    Row ``e`` of the log is measured after ``e`` updates, so there are
    ``epochs + 1`` rows and row 0 describes the initialization.
    """
    opt = OptimState.fresh(arrays, cfg, scale_keys=net.scale_keys, decay_keys=net.decay_keys)
    step = adamw_step if cfg.optimizer == "adamw" else sgd_step
    records = []
    for epoch in range(cfg.epochs + 1):
        pred, cache = net.forward(arrays, train_x, True)
        value = loss(pred, train_y)
        if not np.isfinite(value):
            raise TrainingDiverged(epoch, value)
        test_acc = float("nan")
        if test_x is not None and test_x.shape[1]:
            test_acc = accuracy(test_y, net.forward(arrays, test_x, False)[0].labels)
        records.append(EpochRecord(epoch, value, test_acc))
        if epoch == cfg.epochs:
            break
        grads = net.backward(arrays, cache, train_y)
        arrays, opt = step(arrays, grads, opt)
    return arrays, records


def oversampled(train: Dataset, cfg: TrainConfig, fold: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Training matrix and labels after ADASYN (if enabled)."""
    if not cfg.oversample:
        return train.features, train.labels
    ocfg = OversampleConfig(cfg.adasyn_neighbors, cfg.adasyn_balance,
                            subseed(cfg.seed, "adasyn", fold))
    return adasyn_oversample(train.features, train.labels, ocfg)


def train(train_data: Dataset, test_data: Dataset, cfg: TrainConfig, *,
          fold: int = 0) -> tuple[TrainedModel, list[EpochRecord]]:
    """Train on standardized data; the basis comes from the real training samples only."""
    basis = fit_basis(train_data.features)
    run_basis = basis.normalized() if cfg.normalize_eigenvalues else basis
    x, y = oversampled(train_data, cfg, fold)
    template = init_params(train_data.n_features, train_data.n_classes, cfg,
                           substream(cfg.seed, "init", fold))
    net = _CovletNetwork(template, run_basis, cfg.kernel, x, cfg.freeze_scales)
    test_x = None if test_data is None else test_data.features
    test_y = None if test_data is None else test_data.labels
    arrays, records = fit_loop(net, template.arrays(), x, y, test_x, test_y, cfg)
    log.debug("trained fold %d: final loss %.4g", fold, records[-1].train_loss)
    model = TrainedModel("ours", arrays, cfg.activation, basis, cfg.kernel,
                         cfg.normalize_eigenvalues)
    return model, records
