"""Band-pass spline kernel g and its derivative.

g(x) = (x / x1)**alpha                 for x < x1
       c0 + c1 x + c2 x**2 + c3 x**3   for x1 <= x <= x2
       (x2 / x)**beta                  for x > x2

The cubic is fixed by C1 matching at both knots. The defaults
(alpha = beta = 2, x1 = 1, x2 = 2) give the cubic -5 + 11x - 6x^2 + x^3.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def solve_spline(alpha: float, beta: float, x1: float, x2: float) -> tuple[float, ...]:
    """Cubic coefficients (c0..c3) matching value and slope at both knots."""
    rows = []
    rhs = []
    for x, value, slope in ((x1, 1.0, alpha / x1), (x2, 1.0, -beta / x2)):
        rows.append([1.0, x, x**2, x**3])
        rhs.append(value)
        rows.append([0.0, 1.0, 2 * x, 3 * x**2])
        rhs.append(slope)
    coeffs = np.linalg.solve(np.array(rows), np.array(rhs))
    return tuple(float(c) for c in coeffs)


@dataclass(frozen=True)
class KernelSpec:
    alpha: float = 2.0
    beta: float = 2.0
    x1: float = 1.0
    x2: float = 2.0
    spline_coeffs: tuple = field(default=None)

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("kernel exponents must be positive")
        if not 0 < self.x1 < self.x2:
            raise ValueError("kernel knots must satisfy 0 < x1 < x2")
        if self.spline_coeffs is None:
            coeffs = solve_spline(self.alpha, self.beta, self.x1, self.x2)
            if (self.alpha, self.beta, self.x1, self.x2) == (2.0, 2.0, 1.0, 2.0):
                coeffs = (-5.0, 11.0, -6.0, 1.0)  # exact; the solve is off by an ulp or so
            object.__setattr__(self, "spline_coeffs", coeffs)
        else:
            object.__setattr__(self, "spline_coeffs",
                               tuple(float(c) for c in self.spline_coeffs))
        if len(self.spline_coeffs) != 4:
            raise ValueError("spline_coeffs must hold 4 coefficients")

    def value(self, x):
        return kernel_eval(self, x)

    def slope(self, x):
        return kernel_deriv(self, x)


DEFAULT_KERNEL = KernelSpec()


def _check(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("kernel argument must be nonnegative")
    return x


def kernel_eval(spec: KernelSpec, x):
    x = _check(x)
    c0, c1, c2, c3 = spec.spline_coeffs
    with np.errstate(divide="ignore"):
        rise = (x / spec.x1) ** spec.alpha
        mid = c0 + x * (c1 + x * (c2 + x * c3))
        decay = (spec.x2 / np.where(x > 0, x, 1.0)) ** spec.beta
    out = np.where(x < spec.x1, rise, np.where(x <= spec.x2, mid, decay))
    return out if out.ndim else float(out)


def kernel_deriv(spec: KernelSpec, x):
    x = _check(x)
    c0, c1, c2, c3 = spec.spline_coeffs
    a, b = spec.alpha, spec.beta
    safe = np.where(x > 0, x, 1.0)
    at_zero = 0.0 if a > 1 else (1.0 / spec.x1 if a == 1 else np.inf)
    rise = np.where(x > 0, a * safe ** (a - 1) / spec.x1**a, at_zero)
    mid = c1 + x * (2 * c2 + 3 * c3 * x)
    decay = -b * spec.x2**b * safe ** (-b - 1)
    out = np.where(x < spec.x1, rise, np.where(x <= spec.x2, mid, decay))
    return out if out.ndim else float(out)
