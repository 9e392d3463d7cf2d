"""Flat ``key = value`` run configuration.

Keys (one per line, ``#`` starts a comment):

training      epochs, seed, lr_weights, lr_scales, weight_decay, J,
              scale_init_low, scale_init_high, activation, freeze_scales,
              normalize_eigenvalues, optimizer, beta1, beta2, eps,
              oversample, adasyn_neighbors, adasyn_balance
kernel        kernel.alpha, kernel.beta, kernel.x1, kernel.x2
synthetic     synth.p, synth.n, synth.C, synth.informative_components,
              synth.signal_strength, synth.noise_std, synth.seed,
              synth.class_weights (comma list), synth.basis
experiment    model (ours | mlp1 | mlp2_r | mlp2_i), folds, workers,
              standardize (zscore | center), sweep_J (comma list),
              converge_lrs (comma list), converge_threshold,
              cam_target (probability | logit)

Booleans accept true/false/1/0/yes/no.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

from .kernel import KernelSpec
from .model import TrainConfig
from .synth import SynthSpec

MODEL_KINDS = ("ours", "mlp1", "mlp2_r", "mlp2_i")


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    synth: SynthSpec = field(default_factory=SynthSpec)
    model: str = "ours"
    folds: int = 5
    workers: int = 1
    standardize: str = "zscore"
    sweep_J: tuple = (2, 4, 8, 16, 32, 64)
    converge_lrs: tuple = (0.01, 0.1)
    converge_threshold: float = 0.9
    cam_target: str = "probability"

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValueError(f"model must be one of {MODEL_KINDS}")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.standardize not in ("zscore", "center"):
            raise ValueError("standardize must be 'zscore' or 'center'")
        if self.cam_target not in ("probability", "logit"):
            raise ValueError("cam_target must be 'probability' or 'logit'")


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(kind):
    def parse(text: str) -> tuple:
        return tuple(kind(t) for t in text.replace(" ", "").split(",") if t)
    return parse


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


_SCALAR = {"int": int, "float": float, "bool": _bool, "str": str}
_LISTS = {"synth.class_weights": _list(float), "sweep_J": _list(int),
          "converge_lrs": _list(float)}
_KERNEL_KEYS = ("alpha", "beta", "x1", "x2")


def _keys() -> dict:
    """key -> (section, field name, parser)."""
    table = {}
    for f in dataclasses.fields(TrainConfig):
        if f.name != "kernel":
            table[f.name] = ("train", f.name, _SCALAR[f.type])
    for name in _KERNEL_KEYS:
        table[f"kernel.{name}"] = ("kernel", name, float)
    for f in dataclasses.fields(SynthSpec):
        key = f"synth.{f.name}"
        table[key] = ("synth", f.name, _LISTS.get(key) or _SCALAR[f.type])
    for f in dataclasses.fields(RunConfig):
        if f.name not in ("train", "synth"):
            table[f.name] = ("run", f.name, _LISTS.get(f.name) or _SCALAR[f.type])
    return table


KEYS = _keys()


def apply_settings(cfg: RunConfig, settings: dict) -> RunConfig:
    """Return ``cfg`` with string-valued ``settings`` parsed and applied."""
    buckets = {"train": {}, "kernel": {}, "synth": {}, "run": {}}
    for key, text in settings.items():
        if key not in KEYS:
            raise KeyError(f"unknown config key {key!r}")
        section, name, parse = KEYS[key]
        try:
            buckets[section][name] = parse(text)
        except ValueError as exc:
            raise ValueError(f"bad value for {key}: {exc}") from None
    train = cfg.train
    if buckets["kernel"]:
        k = train.kernel
        merged = {n: getattr(k, n) for n in _KERNEL_KEYS} | buckets["kernel"]
        train = replace(train, kernel=KernelSpec(**merged))
    if buckets["train"]:
        train = replace(train, **buckets["train"])
    synth = replace(cfg.synth, **buckets["synth"]) if buckets["synth"] else cfg.synth
    return replace(cfg, train=train, synth=synth, **buckets["run"])


def parse_config(text: str, base: RunConfig = None) -> RunConfig:
    settings = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key] = value
    return apply_settings(base or RunConfig(), settings)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for key, (section, name, _) in KEYS.items():
        if section == "train":
            value = getattr(cfg.train, name)
        elif section == "kernel":
            value = getattr(cfg.train.kernel, name)
        elif section == "synth":
            value = getattr(cfg.synth, name)
        else:
            value = getattr(cfg, name)
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"
