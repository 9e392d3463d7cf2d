"""Sample covariance and its eigenbasis (the dual space the filters act in)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CENTER_TOL = 1e-8
CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class CovarianceMatrix:
    matrix: np.ndarray
    n_samples: int


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvectors as columns of ``eigenvectors``, eigenvalues ascending."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def normalized(self) -> "SpectralBasis":
        """Same basis with eigenvalues divided by the largest one."""
        top = self.eigenvalues[-1]
        if top <= 0:
            return self
        return SpectralBasis(self.eigenvectors, self.eigenvalues / top)

    def to_dict(self) -> dict:
        return {"shape": list(self.eigenvectors.shape),
                "eigenvectors": self.eigenvectors.ravel().tolist(),
                "eigenvalues": self.eigenvalues.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralBasis":
        U = np.array(d["eigenvectors"], dtype=float).reshape(d["shape"])
        return cls(U, np.array(d["eigenvalues"], dtype=float))


def covariance(X: np.ndarray) -> CovarianceMatrix:
    """(1/n) X X^T for a row-centered ``p x n`` matrix."""
    X = np.asarray(X, dtype=float)
    p, n = X.shape
    if n < 1:
        raise ValueError("covariance needs at least one sample")
    worst = np.max(np.abs(X.mean(axis=1))) if p else 0.0
    if worst > CENTER_TOL:
        raise ValueError(f"input rows are not centered (max |row mean| = {worst:.3g})")
    A = X @ X.T / n
    return CovarianceMatrix((A + A.T) / 2, n)


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; argmax returns the first index on ties
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def eigendecompose(cov: CovarianceMatrix) -> SpectralBasis:
    A = np.asarray(cov.matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0))):
        raise ValueError("covariance is not symmetric")
    # LinAlgError on non-convergence propagates unchanged
    lam, U = np.linalg.eigh(A)
    scale = max(1.0, abs(lam[-1])) if lam.size else 1.0
    if lam.size and lam[0] < -CLAMP_TOL * scale:
        raise ValueError(f"covariance has a negative eigenvalue {lam[0]:.3g}")
    lam = np.where(lam < 0, 0.0, lam)
    return SpectralBasis(_fix_signs(U), lam)


def project(basis: SpectralBasis, X: np.ndarray) -> np.ndarray:
    """Coordinates of ``X`` in the eigenbasis, U^T X."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] != basis.dim:
        raise ValueError(f"basis has dimension {basis.dim}, data has {X.shape[0]} rows")
    return basis.eigenvectors.T @ X


def fit_basis(X: np.ndarray) -> SpectralBasis:
    return eigendecompose(covariance(X))
