"""Multi-scale covariance embedding C_X(s) = U g(s Lambda) U^T X and its scale gradient.

Any object with ``value(x)`` and ``slope(x)`` methods can stand in for the
kernel (``KernelSpec`` provides both).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralBasis, project

LN10 = math.log(10.0)


@dataclass(frozen=True)
class ScaleSet:
    """Trainable scales stored as base-10 logarithms."""

    log_scales: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.log_scales, dtype=float))
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("a ScaleSet needs at least one scale")
        object.__setattr__(self, "log_scales", theta)

    @property
    def J(self) -> int:
        return self.log_scales.size

    @property
    def scales(self) -> np.ndarray:
        return 10.0 ** self.log_scales

    @classmethod
    def from_scales(cls, scales) -> "ScaleSet":
        s = np.asarray(scales, dtype=float)
        if np.any(s <= 0):
            raise ValueError("scales must be positive")
        return cls(np.log10(s))


@dataclass(frozen=True)
class ScaleEmbedding:
    coefficients: np.ndarray  # p x n
    scale_index: int
    cached_filter: np.ndarray  # g(s * lambda_k)


@dataclass(frozen=True)
class MultiScaleEmbedding:
    blocks: list
    stacked: np.ndarray  # (J*p) x n


def _projected(basis: SpectralBasis, X, projected):
    if projected is not None:
        if projected.shape[0] != basis.dim:
            raise ValueError("projected data does not match the basis dimension")
        return projected
    return project(basis, X)


def embed_one(basis: SpectralBasis, spec, X, s: float, *, scale_index: int = 0,
              projected=None) -> ScaleEmbedding:
    """Filter ``X`` at scale ``s``.

    ``projected`` may carry a precomputed U^T X; ``X`` is then only used for
    the shape check.
    """
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    xhat = _projected(basis, X, projected)
    filt = np.asarray(spec.value(s * basis.eigenvalues), dtype=float)
    coeffs = basis.eigenvectors @ (filt[:, None] * xhat)
    if not np.all(np.isfinite(coeffs)):
        raise FloatingPointError(f"non-finite embedding at scale {s:g}")
    return ScaleEmbedding(coeffs, scale_index, filt)


def embed_all(basis: SpectralBasis, spec, X, scales: ScaleSet, *,
              projected=None) -> MultiScaleEmbedding:
    xhat = _projected(basis, X, projected)
    blocks = [embed_one(basis, spec, X, s, scale_index=j, projected=xhat)
              for j, s in enumerate(scales.scales)]
    stacked = np.concatenate([b.coefficients for b in blocks], axis=0)
    return MultiScaleEmbedding(blocks, stacked)


def scale_gradients(basis: SpectralBasis, spec, X, scales: ScaleSet, upstream, *,
                    projected=None) -> np.ndarray:
    """dL/dtheta_j for theta_j = log10(s_j), given ``upstream`` = dL/dE."""
    xhat = _projected(basis, X, projected)
    p, n = xhat.shape
    J = scales.J
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (J * p, n):
        raise ValueError(f"upstream must have shape {(J * p, n)}, got {upstream.shape}")
    lam = basis.eigenvalues
    U = basis.eigenvectors
    grads = np.empty(J)
    for j, s in enumerate(scales.scales):
        block = upstream[j * p:(j + 1) * p]
        # <G, U diag(lam * g'(s lam)) U^T X> = sum_k lam_k g'(s lam_k) (U^T G . U^T X)_k
        per_component = np.sum((U.T @ block) * xhat, axis=1)
        dg = np.asarray(spec.slope(s * lam), dtype=float)
        grads[j] = LN10 * s * np.dot(lam * dg, per_component)
    return grads
