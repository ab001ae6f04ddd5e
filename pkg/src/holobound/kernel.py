"""Monomial Gram matrices and truncated reproducing-kernel diagonals.

The degree-N kernel diagonal is the quadratic form

    K_N(z, z) = v(z)^H G^{-1} v(z),   v(z) = (1, z, ..., z^N),

where G is the Gram matrix of the monomials under the weighted inner
product.  K_N(z, z) equals the supremum of |f(z)|^2 / ||f||^2 over
polynomials f of degree at most N, increases monotonically with N, and
converges to the kernel diagonal of the full space.

The solve goes through a symmetric diagonal equilibration of G: the raw
monomial Gram has factorially growing diagonal (already ~n! for Gaussian
weights), so its unscaled condition number is astronomically large even when
the solve is numerically exact.  The reported ``condition_estimate`` is that
of the equilibrated matrix, which is what actually controls solve accuracy;
degradation kicks in when it passes 1e12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .quadrature import QuadratureRule, integrate
from .weights import WeightFunction, eval_weight

__all__ = [
    "SampleFunction",
    "KernelEstimate",
    "PositiveDefinitenessError",
    "sb_kernel",
    "gram_matrix",
    "build_kernel_estimate",
    "kernel_diag",
    "extremal_ratio",
]

MAX_DEGREE = 64
CONDITION_LIMIT = 1e12
_GRAM_CHUNK = 1 << 16


class PositiveDefinitenessError(ArithmeticError):
    """Gram matrix failed to factor; carries a smallest-eigenvalue estimate.

    Usually means the truncation radius is too small or the degree too large
    for the quadrature resolution.
    """

    def __init__(self, smallest_eigenvalue: float, degree: int):
        self.smallest_eigenvalue = float(smallest_eigenvalue)
        self.degree = int(degree)
        super().__init__(
            f"Gram matrix at degree {degree} is not positive definite "
            f"(smallest eigenvalue estimate {smallest_eigenvalue:.3e}); "
            f"increase the truncation radius or quadrature resolution, or "
            f"lower the degree")


def sb_kernel(z: complex, w: complex, t: float) -> complex:
    """Reproducing kernel exp(z * conj(w) / t) of the normalized Gaussian
    space with parameter t (closed form, exact)."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    return complex(np.exp(z * np.conj(w) / t))


@dataclass(frozen=True, eq=False)
class SampleFunction:
    """Entire test function: polynomial times an optional factor exp(a*z)."""

    coefficients: tuple
    exp_rate: complex = 0j

    @staticmethod
    def polynomial(coefficients) -> "SampleFunction":
        return SampleFunction(tuple(complex(c) for c in coefficients))

    @staticmethod
    def monomial(n: int) -> "SampleFunction":
        return SampleFunction((0j,) * n + (1.0 + 0j,))

    @staticmethod
    def exp_taylor(rate: complex, degree: int) -> "SampleFunction":
        """Degree-truncated Taylor polynomial of exp(rate * z)."""
        coeffs = [complex(rate) ** k / math.factorial(k) for k in range(degree + 1)]
        return SampleFunction(tuple(coeffs))

    @staticmethod
    def exponential(rate: complex) -> "SampleFunction":
        """The exact function exp(rate * z)."""
        return SampleFunction((1.0 + 0j,), exp_rate=complex(rate))

    @property
    def degree(self) -> int:
        deg = 0
        for k, c in enumerate(self.coefficients):
            if c != 0:
                deg = k
        return deg

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c in reversed(self.coefficients):
            out = out * z + c
        if self.exp_rate != 0:
            out = out * np.exp(self.exp_rate * z)
        return complex(out) if out.ndim == 0 else out


def _vandermonde(z: np.ndarray, degree: int) -> np.ndarray:
    return np.asarray(z, dtype=complex)[:, None] ** np.arange(degree + 1)


def _assemble_gram(w: WeightFunction, degree: int, rule: QuadratureRule) -> np.ndarray:
    G = np.zeros((degree + 1, degree + 1), dtype=complex)
    for start in range(0, len(rule.nodes), _GRAM_CHUNK):
        nodes = rule.nodes[start:start + _GRAM_CHUNK]
        u = rule.weights[start:start + _GRAM_CHUNK] * np.exp(-np.asarray(eval_weight(w, nodes)))
        V = _vandermonde(nodes, degree)
        G += (V * u[:, None]).T @ V.conj()
    return 0.5 * (G + G.conj().T)  # symmetrize away quadrature asymmetry


def gram_matrix(w: WeightFunction, N: int, rule: QuadratureRule) -> np.ndarray:
    """Gram matrix G_mn = integral of z^m conj(z)^n exp(-phi) over the rule.

    Hermitian by construction (symmetrized after assembly).  Raises
    :class:`PositiveDefinitenessError` if the matrix does not factor.
    """
    if N < 0:
        raise ValueError(f"degree must be >= 0, got {N}")
    if N > MAX_DEGREE:
        raise ValueError(f"degree {N} exceeds the supported cap {MAX_DEGREE}")
    G = _assemble_gram(w, N, rule)
    diag = np.real(np.diag(G))
    if np.any(diag <= 0.0):
        raise PositiveDefinitenessError(float(diag.min()), N)
    d = np.sqrt(diag)
    scaled = G / np.outer(d, d)
    try:
        np.linalg.cholesky(scaled)
    except np.linalg.LinAlgError:
        eigs = np.linalg.eigvalsh(scaled)
        raise PositiveDefinitenessError(float(eigs.min() * diag.min()), N) from None
    return G


@dataclass(eq=False)
class KernelEstimate:
    """Factorized truncated-kernel evaluator for one (weight, degree, rule).

    ``effective_degree`` may be smaller than the requested degree: when the
    equilibrated Gram condition estimate exceeds 1e12 the estimate degrades
    to the largest well-conditioned leading block and records it.
    """

    weight: WeightFunction
    degree: int
    rule: QuadratureRule
    gram: np.ndarray
    condition_estimate: float
    effective_degree: int
    degraded: bool
    _scale: np.ndarray = field(repr=False, default=None)
    _chol: np.ndarray = field(repr=False, default=None)

    def diag(self, z):
        """K_N(z, z) at the effective degree; nonnegative, vectorized."""
        return self.diag_at_degree(z, self.effective_degree)

    def convergence_gap(self, z, step: int = 5):
        """Relative gap (K_N - K_{N-step}) / K_N at the effective degree.

        The diagonals are monotone lower bounds of the full kernel; a small
        gap is the working convergence signal (no rigorous remainder is
        claimed).
        """
        n = self.effective_degree
        if n < step:
            raise ValueError(f"effective degree {n} is below the step {step}")
        hi = np.atleast_1d(self.diag_at_degree(z, n))
        lo = np.atleast_1d(self.diag_at_degree(z, n - step))
        out = (hi - lo) / hi
        return float(out[0]) if np.ndim(z) == 0 else out

    def diag_at_degree(self, z, degree: int):
        """Kernel diagonal of the leading block of the given degree.

        The Cholesky factor of a leading block of the equilibrated Gram is
        exactly the leading block of its Cholesky factor, so nested-degree
        diagonals are monotone by construction.
        """
        if degree > self.effective_degree:
            raise ValueError(
                f"degree {degree} exceeds effective degree {self.effective_degree}")
        z = np.asarray(z, dtype=complex)
        pts = np.atleast_1d(z)
        n = degree + 1
        V = _vandermonde(pts, degree) / self._scale[:n]
        Y = solve_triangular(self._chol[:n, :n], V.conj().T, lower=True)
        out = np.sum(np.abs(Y) ** 2, axis=0)
        return float(out[0]) if z.ndim == 0 else out


def build_kernel_estimate(w: WeightFunction, N: int, rule: QuadratureRule) -> KernelEstimate:
    """Assemble and factor the Gram matrix, degrading N if ill-conditioned."""
    if N < 0:
        raise ValueError(f"degree must be >= 0, got {N}")
    if N > MAX_DEGREE:
        raise ValueError(f"degree {N} exceeds the supported cap {MAX_DEGREE}")
    G = _assemble_gram(w, N, rule)
    diag = np.real(np.diag(G))
    if np.any(diag <= 0.0):
        raise PositiveDefinitenessError(float(diag.min()), N)
    d = np.sqrt(diag)
    scaled = G / np.outer(d, d)

    effective = N
    cond = float(np.linalg.cond(scaled))
    chol = None
    while effective >= 0:
        n = effective + 1
        block = scaled[:n, :n]
        cond = float(np.linalg.cond(block))
        if cond <= CONDITION_LIMIT:
            try:
                chol = np.linalg.cholesky(block)
                break
            except np.linalg.LinAlgError:
                pass
        effective -= 1
    if chol is None:
        eigs = np.linalg.eigvalsh(scaled)
        raise PositiveDefinitenessError(float(eigs.min() * diag.min()), N)
    return KernelEstimate(
        weight=w, degree=N, rule=rule, gram=G,
        condition_estimate=cond,
        effective_degree=effective,
        degraded=effective < N,
        _scale=d,
        _chol=chol,
    )


_estimate_cache: dict = {}


def _cached_estimate(w: WeightFunction, N: int, rule: QuadratureRule) -> KernelEstimate:
    key = (w, N, id(rule))
    est = _estimate_cache.get(key)
    if est is None or est.rule is not rule:
        est = build_kernel_estimate(w, N, rule)
        if len(_estimate_cache) > 64:
            _estimate_cache.clear()
        _estimate_cache[key] = est
    return est


def kernel_diag(w: WeightFunction, N: int, rule: QuadratureRule, z):
    """K_N(z, z): the largest |f(z)|^2 / ||f||^2 over degree-N polynomials."""
    return _cached_estimate(w, N, rule).diag(z)


def extremal_ratio(w: WeightFunction, f: SampleFunction, z, rule: QuadratureRule):
    """|f(z)|^2 / ||f||^2 under the weight; never exceeds the kernel diagonal
    when f is a polynomial of degree at most the kernel's."""
    norm_sq = integrate(rule, lambda p: np.abs(f(p)) ** 2 * np.exp(-np.asarray(eval_weight(w, p))))
    if norm_sq <= 0.0:
        raise ValueError("sample function has zero norm under the weight")
    z = np.asarray(z, dtype=complex)
    out = np.abs(np.asarray(f(z))) ** 2 / norm_sq
    return float(out) if out.ndim == 0 else out
