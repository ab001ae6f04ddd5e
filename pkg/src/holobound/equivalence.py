"""Holomorphic equivalence of weighted spaces.

Two strictly positive densities alpha and beta on the same region admit a
nowhere-zero holomorphic multiplier phi_eq with |phi_eq|^2 * beta = alpha
exactly when log(alpha/beta) is harmonic; the multiplier induces a unitary
map f -> phi_eq * f between the spaces and leaves the weighted kernel
diagonal alpha(z) K_alpha(z, z) invariant.

The constructive branch here covers the case where the difference of the
weight exponents is a harmonic *polynomial*: the harmonic conjugate is then
given by a formal substitution and phi_eq = exp(p/2) for an explicit complex
polynomial p.  Anything else is detected and rejected rather than silently
approximated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernel import SampleFunction, build_kernel_estimate
from .quadrature import QuadratureRule, integrate, sunflower_points
from .weights import (
    Check,
    ValidationReport,
    WeightFunction,
    eval_laplacian,
    eval_weight,
    normalized_gaussian,
    report_from_checks,
)

__all__ = [
    "WeightDensity",
    "EquivalenceMap",
    "EquivalenceError",
    "log_laplacian_equal",
    "harmonic_conjugate_poly",
    "build_equivalence_map",
    "verify_unitary",
    "verify_kernel_invariance",
    "matching_normalized_gaussian",
]


class EquivalenceError(ValueError):
    """The requested equivalence is unsupported or does not exist."""


@dataclass(frozen=True, eq=True)
class WeightDensity:
    """Strictly positive density alpha = exp(-phi) for a weight exponent phi.

    The representation makes log(alpha) = -phi exact, so the equivalence
    criterion reduces to comparing weight Laplacians.
    """

    weight: WeightFunction
    region: str = "plane"

    def density(self, z):
        return np.exp(-np.asarray(eval_weight(self.weight, z)))

    def log_density_laplacian(self, z):
        return -np.asarray(eval_laplacian(self.weight, z))


@dataclass(frozen=True, eq=False)
class EquivalenceMap:
    """Nowhere-zero holomorphic multiplier phi_eq = exp(p(z)/2).

    |phi_eq|^2 * beta = alpha for the source density alpha and target beta.
    """

    exponent_coefficients: tuple
    source: WeightDensity
    target: WeightDensity

    def exponent(self, z):
        """p(z), the polynomial whose real part is phi_target - phi_source."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c in reversed(self.exponent_coefficients):
            out = out * z + c
        return complex(out) if out.ndim == 0 else out

    def __call__(self, z):
        return np.exp(np.asarray(self.exponent(z)) / 2.0)


def log_laplacian_equal(a: WeightDensity, b: WeightDensity, grid,
                        tol: float) -> ValidationReport:
    """Criterion report: lap(log alpha) = lap(log beta) on the grid within tol.

    Truthy iff the criterion holds, in which case the two spaces are
    holomorphically equivalent.
    """
    grid = np.asarray(grid, dtype=complex)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    dev = np.abs(np.asarray(a.log_density_laplacian(grid))
                 - np.asarray(b.log_density_laplacian(grid)))
    worst = int(np.argmax(dev))
    checks = (
        Check("log_laplacian_deviation", float(dev[worst]), tol,
              float(dev[worst]) <= tol, note=f"worst point {grid[worst]!r}"),
    )
    return report_from_checks(checks)


def harmonic_conjugate_poly(u: np.ndarray) -> np.ndarray:
    """Complex polynomial p with Re p = u for a harmonic polynomial u(x, y).

    ``u`` holds coefficients u[i, j] of x^i y^j.  Harmonicity is checked
    coefficient-wise and violations are rejected naming the offending
    Laplacian coefficient.  The construction is the formal substitution
    p(z) = 2 u(z/2, z/(2i)) - u(0, 0), which has p(0) = u(0, 0) real.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise EquivalenceError("polynomial coefficients must form a 2-D array")
    nx, ny = u.shape
    scale = max(1.0, float(np.max(np.abs(u))))
    pad = np.zeros((nx + 2, ny + 2))
    pad[:nx, :ny] = u
    for i in range(nx):
        for j in range(ny):
            lap_ij = ((i + 2) * (i + 1) * pad[i + 2, j]
                      + (j + 2) * (j + 1) * pad[i, j + 2])
            if abs(lap_ij) > 1e-10 * scale:
                raise EquivalenceError(
                    f"polynomial is not harmonic: Laplacian coefficient of "
                    f"x^{i} y^{j} is {lap_ij}")
    degree = 0
    for i in range(nx):
        for j in range(ny):
            if u[i, j] != 0.0:
                degree = max(degree, i + j)
    p = np.zeros(degree + 1, dtype=complex)
    for i in range(nx):
        for j in range(ny):
            if u[i, j] != 0.0:
                k = i + j
                p[k] += 2.0 ** (1 - k) * u[i, j] * (-1j) ** j
    p[0] = u[0, 0]
    return p


def build_equivalence_map(a: WeightDensity, b: WeightDensity) -> EquivalenceMap:
    """Construct phi_eq = exp(p/2) with |phi_eq|^2 = alpha/beta.

    Requires phi_b - phi_a to be a harmonic polynomial (the representable
    case); other inputs raise :class:`EquivalenceError`.  The construction
    is verified on a 100-point grid in D(0, 3) before returning.
    """
    if a.region != b.region:
        raise EquivalenceError(
            f"densities live on different regions: {a.region!r} vs {b.region!r}")
    pa, pb = a.weight.poly_xy(), b.weight.poly_xy()
    if pa is None or pb is None:
        raise EquivalenceError(
            "constructive equivalence needs both weight exponents polynomial "
            "in (x, y); transcendental families are not supported")
    nx = max(pa.shape[0], pb.shape[0])
    ny = max(pa.shape[1], pb.shape[1])
    u = np.zeros((nx, ny))
    u[:pb.shape[0], :pb.shape[1]] += pb
    u[:pa.shape[0], :pa.shape[1]] -= pa
    p = harmonic_conjugate_poly(u)
    emap = EquivalenceMap(tuple(p), source=a, target=b)

    grid = sunflower_points(100, 3.0)
    ratio = np.abs(emap(grid)) ** 2 * b.density(grid) / a.density(grid)
    worst = float(np.max(np.abs(ratio - 1.0)))
    if worst > 1e-10:
        raise EquivalenceError(
            f"constructed multiplier fails |phi_eq|^2 * beta = alpha "
            f"(worst relative deviation {worst:.3e})")
    return emap


def verify_unitary(m: EquivalenceMap, samples, rule: QuadratureRule,
                   tol: float) -> ValidationReport:
    """Check ||phi_eq * f||^2 under beta equals ||f||^2 under alpha.

    Both norms are computed by quadrature on the same rule; the relative
    deviation must stay within tol for every sample.
    """
    checks = []
    for k, f in enumerate(samples):
        lhs = integrate(rule, lambda z: np.abs(np.asarray(m(z)) * np.asarray(f(z))) ** 2
                        * m.target.density(z))
        rhs = integrate(rule, lambda z: np.abs(np.asarray(f(z))) ** 2
                        * m.source.density(z))
        if rhs <= 0.0:
            raise ValueError(f"sample #{k} has zero norm under the source density")
        dev = abs(lhs / rhs - 1.0)
        checks.append(Check(f"norm_ratio_{k}", dev, tol, dev <= tol))
    return report_from_checks(checks)


def verify_kernel_invariance(a: WeightDensity, b: WeightDensity, z_list,
                             N: int, rule: QuadratureRule,
                             tol: float) -> ValidationReport:
    """Check alpha(z) K_alpha(z, z) = beta(z) K_beta(z, z) at the given points.

    Both diagonals are computed at convergence in the truncation degree N
    (the multiplier shuffles polynomial degrees, so finite-N truncations
    only agree once both sides have converged); the report notes the
    effective degrees actually used.
    """
    z = np.asarray(z_list, dtype=complex)
    est_a = build_kernel_estimate(a.weight, N, rule)
    est_b = build_kernel_estimate(b.weight, N, rule)
    lhs = np.atleast_1d(est_a.diag(z)) * np.atleast_1d(a.density(z))
    rhs = np.atleast_1d(est_b.diag(z)) * np.atleast_1d(b.density(z))
    rel = np.abs(lhs - rhs) / np.abs(lhs)
    gap = max(float(np.max(est_a.convergence_gap(z))),
              float(np.max(est_b.convergence_gap(z))))
    note = (f"effective degrees {est_a.effective_degree} / "
            f"{est_b.effective_degree}, worst convergence gap {gap:.2e}")
    checks = tuple(
        Check(f"weighted_diag_{i}", float(rel[i]), tol, float(rel[i]) <= tol,
              note=note)
        for i in range(len(z))
    )
    return report_from_checks(checks)


def matching_normalized_gaussian(c: float) -> WeightDensity:
    """The normalized Gaussian density holomorphically equivalent to any
    density exp(-phi) with constant lap(phi) = c > 0: parameter t = 4/c."""
    if c <= 0:
        raise EquivalenceError(f"constant Laplacian must be positive, got {c}")
    return WeightDensity(normalized_gaussian(4.0 / c))
