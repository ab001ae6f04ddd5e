"""Weight exponents phi on the complex plane with exact Laplacians.

Built-in families keep their Laplacians in closed form so the hypothesis
0 <= lap(phi) <= M can be checked exactly, and every family carries a
truncation hint: a radius beyond which exp(-phi) times any monomial of the
configured degree is numerically negligible.

The toolkit deliberately keeps a strict positivity floor lap(phi) >= c0 > 0
for its numerical experiments (a > 0 in every family): with a vanishing
Laplacian, monomials need not be square-integrable and Gram matrices
degenerate.  The bound theorems themselves cover the degenerate edge; the
experiments simply do not sample it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .greens import LogPotential, cutoff_g

__all__ = [
    "Check",
    "ValidationReport",
    "ScalarField",
    "WeightFunction",
    "WeightError",
    "eval_weight",
    "eval_laplacian",
    "fd_laplacian",
    "validate_laplacian_bounds",
    "translate_weight",
    "truncation_radius",
    "normalized_gaussian",
]

NEGLIGIBLE_LOG = math.log(1e-18)
DEFAULT_MAX_DEGREE = 40

_psi_tokens = itertools.count(1)


class WeightError(ValueError):
    """Invalid weight parameters or an unsupported weight operation."""


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    ok: bool
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a numerical validation: per-check values and a pass flag."""

    passed: bool
    checks: tuple

    def __bool__(self) -> bool:
        return self.passed

    def failures(self):
        return tuple(c for c in self.checks if not c.ok)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def report_from_checks(checks) -> ValidationReport:
    checks = tuple(checks)
    return ValidationReport(passed=all(c.ok for c in checks), checks=checks)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real-valued field on the plane, optionally with compact support.

    If ``support_radius`` is declared, the field returns exactly 0 outside
    that radius no matter what the wrapped evaluator does.
    """

    fn: Callable
    support_radius: Optional[float] = None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        vals = np.asarray(self.fn(z), dtype=float)
        if vals.shape != z.shape:
            vals = np.broadcast_to(vals, z.shape).copy()
        if self.support_radius is not None:
            vals = np.where(np.abs(z) > self.support_radius, 0.0, vals)
        return float(vals) if vals.ndim == 0 else vals


def _scalarize(val, z):
    return float(val) if np.ndim(z) == 0 else val


# ---------------------------------------------------------------------------
# Weight families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class WeightFunction:
    """A weight exponent phi with closed-form Laplacian and decay envelope.

    ``params`` holds the family parameters plus a translation offset
    (z0_re, z0_im): the evaluators compute phi(z0 + z), which is how
    translated weights are represented.  Equality, hashing and JSON
    round-trips go through (family, params, laplacian_bounds).
    """

    family: str
    params: tuple
    laplacian_bounds: tuple
    truncation_hint: float
    _weight_fn: Callable = field(compare=False, repr=False)
    _laplacian_fn: Callable = field(compare=False, repr=False)
    _floor: tuple = field(compare=False, repr=False)
    _poly: Optional[np.ndarray] = field(compare=False, repr=False, default=None)
    _psi: Optional[ScalarField] = field(compare=False, repr=False, default=None)

    # -- evaluation ---------------------------------------------------------

    def weight(self, z):
        z = np.asarray(z, dtype=complex)
        return _scalarize(self._weight_fn(z), z)

    def laplacian(self, z):
        z = np.asarray(z, dtype=complex)
        vals = np.asarray(self._laplacian_fn(z), dtype=float)
        if vals.shape != z.shape:
            vals = np.broadcast_to(vals, z.shape).copy()
        return _scalarize(vals, z)

    def density(self, z):
        """The weight density exp(-phi)."""
        return np.exp(-self.weight(z))

    # -- structure ----------------------------------------------------------

    @property
    def offset(self) -> complex:
        p = dict(self.params)
        return complex(p.get("z0_re", 0.0), p.get("z0_im", 0.0))

    def base_params(self) -> dict:
        return {k: v for k, v in self.params if k not in ("z0_re", "z0_im")}

    def poly_xy(self) -> Optional[np.ndarray]:
        """Coefficients c[i, j] of phi as a polynomial sum c_ij x^i y^j.

        None for families that are not polynomial in (x, y).
        """
        return None if self._poly is None else self._poly.copy()

    def translated(self, z0: complex) -> "WeightFunction":
        return translate_weight(self, z0)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        if any(k == "psi_token" for k, _ in self.params):
            raise WeightError("weights with a user-supplied psi are not serializable")
        return {
            "family": self.family,
            "params": {k: v for k, v in self.params},
            "laplacian_bounds": [self.laplacian_bounds[0], self.laplacian_bounds[1]],
        }

    @staticmethod
    def from_json(desc: dict) -> "WeightFunction":
        return _weight_from_json(desc)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def gaussian(t: float) -> "WeightFunction":
        """phi = |z|^2 / t, the Gaussian exponent; lap(phi) = 4/t."""
        return _build_gaussian(float(t), 0j)

    @staticmethod
    def gaussian_harmonic(a: float, b: complex = 0j, c: complex = 0j,
                          d: float = 0.0) -> "WeightFunction":
        """phi = a|z|^2 + Re(b z^2 + c z) + d; lap(phi) = 4a (constant).

        Requires |b| < a so that exp(-phi) decays in every direction.
        """
        return _build_gaussian_harmonic(float(a), complex(b), complex(c), float(d), 0j)

    @staticmethod
    def oscillatory(a: float, eps: float) -> "WeightFunction":
        """phi = a|z|^2 + eps cos(x) cos(y); lap(phi) = 4a - 2 eps cos(x) cos(y).

        The hypothesis-compliant regime is 2 eps <= 4a (so lap(phi) >= 0);
        larger eps is accepted at construction so that bound validation has
        genuine failures to detect, with the declared lower bound clamped
        at zero.
        """
        return _build_oscillatory(float(a), float(eps), 0j)

    @staticmethod
    def potential_defined(a: float, psi: Optional[ScalarField] = None,
                          psi_sup: Optional[float] = None,
                          psi_height: float = 1.0,
                          resolution: int = 320) -> "WeightFunction":
        """phi = a|z|^2 + Gamma * psi for a nonnegative compactly supported psi.

        lap(phi) = 4a + psi(z) exactly.  With no psi given, the built-in
        bump psi = psi_height * g (the smooth cutoff) is used; a custom psi
        must be supported in D(0, 2) and declare its supremum ``psi_sup``.
        """
        return _build_potential_defined(float(a), psi, psi_sup, float(psi_height),
                                        int(resolution), 0j)


def normalized_gaussian(t: float) -> WeightFunction:
    """Weight whose density exp(-phi) is the normalized Gaussian measure
    (1/(pi t)) exp(-|z|^2/t); the normalization constant is folded into phi.
    """
    if t <= 0:
        raise WeightError(f"t must be positive, got {t}")
    return _build_gaussian_harmonic(1.0 / t, 0j, 0j, math.log(math.pi * t), 0j)


# ---------------------------------------------------------------------------
# Family builders
# ---------------------------------------------------------------------------

def _params_tuple(base: dict, z0: complex) -> tuple:
    items = dict(base)
    items["z0_re"] = float(z0.real)
    items["z0_im"] = float(z0.imag)
    return tuple(sorted(items.items()))


def _wrap_offset(fn: Callable, z0: complex) -> Callable:
    if z0 == 0:
        return fn
    return lambda z: fn(z0 + z)


def _floor_min(floor: tuple, shift: float, r: float) -> float:
    """Lower bound for phi on |z| = r, given phi >= alpha s^2 + beta s + gamma
    on |base point| = s and a translation of modulus ``shift``."""
    alpha, beta, gamma = floor
    lo, hi = max(0.0, r - shift), r + shift
    candidates = [lo, hi]
    if alpha > 0:
        vertex = -beta / (2.0 * alpha)
        if lo < vertex < hi:
            candidates.append(vertex)
    return min(alpha * s * s + beta * s + gamma for s in candidates)


def truncation_radius(w: "WeightFunction", max_degree: int,
                      linear_rate: float = 0.0) -> float:
    """Radius R with exp(-phi(R)) * R^(2*max_degree+1) * exp(linear_rate*R)
    below 1e-18, found by bisection on the family's decay envelope.

    ``linear_rate`` accommodates an extra exponential factor exp(rate*|z|)
    in the integrand (sample functions with an exponential part).
    """
    shift = abs(w.offset)
    floor = w._floor

    def excess(r: float) -> float:
        return (-_floor_min(floor, shift, r)
                + (2 * max_degree + 1) * math.log(r)
                + linear_rate * r - NEGLIGIBLE_LOG)

    hi = 2.0
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e9:
            raise WeightError("weight decays too slowly for a truncation radius")
    lo = hi / 2.0 if hi > 2.0 else 1e-6
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9 * hi:
            break
    return hi


def _finalize(family, base, z0, weight_base, lap_base, floor, bounds, poly,
              psi=None, declared_bounds=None) -> WeightFunction:
    m, M = bounds
    if declared_bounds is not None:
        dm, dM = float(declared_bounds[0]), float(declared_bounds[1])
        if dm > m + 1e-12 or dM < M - 1e-12:
            raise WeightError(
                f"declared laplacian_bounds [{dm}, {dM}] do not contain the "
                f"family bounds [{m}, {M}]")
        if dm < 0 or dm > dM:
            raise WeightError(f"laplacian_bounds must satisfy 0 <= m <= M, got [{dm}, {dM}]")
        m, M = dm, dM
    if z0 != 0 and poly is not None:
        poly = _shift_poly_xy(poly, z0.real, z0.imag)
    w = WeightFunction(
        family=family,
        params=_params_tuple(base, z0),
        laplacian_bounds=(m, M),
        truncation_hint=1.0,  # replaced below
        _weight_fn=_wrap_offset(weight_base, z0),
        _laplacian_fn=_wrap_offset(lap_base, z0),
        _floor=floor,
        _poly=poly,
        _psi=psi,
    )
    hint = truncation_radius(w, DEFAULT_MAX_DEGREE)
    object.__setattr__(w, "truncation_hint", hint)
    return w


def _build_gaussian(t: float, z0: complex, declared=None) -> WeightFunction:
    if t <= 0:
        raise WeightError(f"gaussian weight needs t > 0, got {t}")
    poly = np.zeros((3, 3))
    poly[2, 0] = poly[0, 2] = 1.0 / t
    return _finalize(
        "gaussian", {"t": t}, z0,
        lambda z: np.abs(z) ** 2 / t,
        lambda z: np.full(np.shape(z), 4.0 / t),
        (1.0 / t, 0.0, 0.0),
        (4.0 / t, 4.0 / t),
        poly,
        declared_bounds=declared,
    )


def _build_gaussian_harmonic(a, b, c, d, z0, declared=None) -> WeightFunction:
    if a <= 0:
        raise WeightError(f"gaussian_harmonic weight needs a > 0, got {a}")
    if abs(b) >= a:
        raise WeightError(
            f"gaussian_harmonic weight needs |b| < a for integrability, "
            f"got |b| = {abs(b)}, a = {a}")
    poly = np.zeros((3, 3))
    poly[2, 0] = a + b.real
    poly[0, 2] = a - b.real
    poly[1, 1] = -2.0 * b.imag
    poly[1, 0] = c.real
    poly[0, 1] = -c.imag
    poly[0, 0] = d
    base = {"a": a, "b_re": b.real, "b_im": b.imag,
            "c_re": c.real, "c_im": c.imag, "d": d}
    return _finalize(
        "gaussian_harmonic", base, z0,
        lambda z: a * np.abs(z) ** 2 + np.real(b * z * z + c * z) + d,
        lambda z: np.full(np.shape(z), 4.0 * a),
        (a - abs(b), -abs(c), min(d, 0.0)),
        (4.0 * a, 4.0 * a),
        poly,
        declared_bounds=declared,
    )


def _build_oscillatory(a, eps, z0, declared=None) -> WeightFunction:
    if a <= 0:
        raise WeightError(f"oscillatory weight needs a > 0, got {a}")
    if eps < 0:
        raise WeightError(f"oscillatory weight needs eps >= 0, got {eps}")
    return _finalize(
        "oscillatory", {"a": a, "eps": eps}, z0,
        lambda z: a * np.abs(z) ** 2 + eps * np.cos(np.real(z)) * np.cos(np.imag(z)),
        lambda z: 4.0 * a - 2.0 * eps * np.cos(np.real(z)) * np.cos(np.imag(z)),
        (a, 0.0, -eps),
        (max(0.0, 4.0 * a - 2.0 * eps), 4.0 * a + 2.0 * eps),
        None,
        declared_bounds=declared,
    )


def _build_potential_defined(a, psi, psi_sup, psi_height, resolution, z0,
                             declared=None) -> WeightFunction:
    if a <= 0:
        raise WeightError(f"potential_defined weight needs a > 0, got {a}")
    if resolution < 32:
        raise WeightError(f"resolution must be >= 32, got {resolution}")
    radial = psi is None  # the built-in bump is radial, so Gamma * psi is too
    if psi is None:
        if psi_height < 0:
            raise WeightError(f"psi_height must be >= 0, got {psi_height}")
        psi_field = ScalarField(lambda z: psi_height * cutoff_g(z), support_radius=2.0)
        sup = psi_height
        base = {"a": a, "psi_height": psi_height, "resolution": float(resolution)}
    else:
        if not isinstance(psi, ScalarField) or psi.support_radius is None:
            raise WeightError("custom psi must be a ScalarField with a support radius")
        if psi.support_radius > 2.0 + 1e-12:
            raise WeightError("custom psi must be supported in D(0, 2)")
        if psi_sup is None or psi_sup < 0:
            raise WeightError("custom psi must declare psi_sup >= 0")
        psi_field = psi
        sup = float(psi_sup)
        base = {"a": a, "psi_sup": sup, "resolution": float(resolution),
                "psi_token": float(next(_psi_tokens))}
    potential = LogPotential(psi_field, support_radius=2.0, resolution=resolution,
                             radial=radial)
    return _finalize(
        "potential_defined", base, z0,
        lambda z: a * np.abs(z) ** 2 + potential.values(np.atleast_1d(z)).reshape(np.shape(z)),
        lambda z: 4.0 * a + psi_field(z),
        (a, 0.0, -sup / 4.0),  # Gamma * psi >= -sup/4 pointwise
        (4.0 * a, 4.0 * a + sup),
        None,
        psi=psi_field,
        declared_bounds=declared,
    )


_BUILDERS = {
    "gaussian": lambda p, z0, decl: _build_gaussian(p["t"], z0, decl),
    "gaussian_harmonic": lambda p, z0, decl: _build_gaussian_harmonic(
        p["a"], complex(p.get("b_re", 0.0), p.get("b_im", 0.0)),
        complex(p.get("c_re", 0.0), p.get("c_im", 0.0)), p.get("d", 0.0), z0, decl),
    "oscillatory": lambda p, z0, decl: _build_oscillatory(p["a"], p["eps"], z0, decl),
    "potential_defined": lambda p, z0, decl: _build_potential_defined(
        p["a"], None, None, p.get("psi_height", 1.0),
        int(p.get("resolution", 320)), z0, decl),
}


def _weight_from_json(desc: dict) -> WeightFunction:
    if not isinstance(desc, dict):
        raise WeightError(f"weight description must be an object, got {type(desc).__name__}")
    unknown = set(desc) - {"family", "params", "laplacian_bounds"}
    if unknown:
        raise WeightError(f"unknown weight keys: {sorted(unknown)}")
    family = desc.get("family")
    if family not in _BUILDERS:
        raise WeightError(f"unknown weight family {family!r}")
    params = dict(desc.get("params", {}))
    if "psi_token" in params:
        raise WeightError("weights with a user-supplied psi are not serializable")
    for k, v in params.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise WeightError(f"parameter {k!r} must be a number, got {v!r}")
    z0 = complex(params.pop("z0_re", 0.0), params.pop("z0_im", 0.0))
    declared = desc.get("laplacian_bounds")
    try:
        return _BUILDERS[family](params, z0, declared)
    except KeyError as exc:
        raise WeightError(f"family {family!r} is missing parameter {exc}") from exc


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def eval_weight(w: WeightFunction, z):
    """phi(z)."""
    return w.weight(z)


def eval_laplacian(w: WeightFunction, z):
    """lap(phi)(z) from the family's closed form (never finite differences)."""
    return w.laplacian(z)


def fd_laplacian(field, z, h: float):
    """Five-point finite-difference Laplacian, O(h^2) accurate.

    Independent oracle for the closed-form Laplacians: evaluates
    (f(z+h) + f(z-h) + f(z+ih) + f(z-ih) - 4 f(z)) / h^2.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    z = np.asarray(z, dtype=complex)
    total = (np.asarray(field(z + h)) + np.asarray(field(z - h))
             + np.asarray(field(z + 1j * h)) + np.asarray(field(z - 1j * h))
             - 4.0 * np.asarray(field(z)))
    out = total / (h * h)
    return float(out) if out.ndim == 0 else out


def validate_laplacian_bounds(w: WeightFunction, grid, tol: float,
                              fd_step: float = 1e-3) -> ValidationReport:
    """Check lap(phi) stays within the declared bounds on a grid.

    Reports the grid min/max of the closed-form Laplacian, the worst
    disagreement against the finite-difference oracle, and passes iff all
    grid values lie in [m - tol, M + tol].  Failures are reported, never
    raised.
    """
    grid = np.asarray(grid, dtype=complex)
    if grid.size == 0:
        raise ValueError("validation grid must be nonempty")
    lap = np.atleast_1d(np.asarray(w.laplacian(grid)))
    fd = np.atleast_1d(np.asarray(fd_laplacian(w.weight, grid, fd_step)))
    m, M = w.laplacian_bounds
    lap_min, lap_max = float(lap.min()), float(lap.max())
    fd_dev = float(np.max(np.abs(lap - fd) / (1.0 + np.abs(lap))))
    checks = (
        Check("laplacian_min", lap_min, m - tol, lap_min >= m - tol,
              note=f"worst point {grid[np.argmin(lap)]!r}"),
        Check("laplacian_max", lap_max, M + tol, lap_max <= M + tol,
              note=f"worst point {grid[np.argmax(lap)]!r}"),
        Check("fd_agreement", fd_dev, tol, fd_dev <= tol),
    )
    return report_from_checks(checks)


def translate_weight(w: WeightFunction, z0: complex) -> WeightFunction:
    """The weight phi(z0 + .); Laplacian bounds are translation-invariant.

    Translating by z0 and then by -z0 restores the original evaluator
    bit-for-bit (the offsets cancel exactly).
    """
    new_z0 = w.offset + complex(z0)
    builder = _BUILDERS.get(w.family)
    if w.family == "potential_defined" and w._psi is not None and \
            any(k == "psi_token" for k, _ in w.params):
        base = w.base_params()
        return _build_potential_defined(base["a"], w._psi, base["psi_sup"], 1.0,
                                        int(base["resolution"]), new_z0,
                                        declared=w.laplacian_bounds)
    if builder is None:
        raise WeightError(f"cannot translate weights of family {w.family!r}")
    return builder(w.base_params(), new_z0, w.laplacian_bounds)


# ---------------------------------------------------------------------------
# Small polynomial helpers (phi as a polynomial in x, y)
# ---------------------------------------------------------------------------

def _shift_poly_xy(poly: np.ndarray, x0: float, y0: float) -> np.ndarray:
    """Coefficients of p(x0 + x, y0 + y) given those of p(x, y)."""
    nx, ny = poly.shape
    out = np.zeros_like(poly)
    for i in range(nx):
        for j in range(ny):
            if poly[i, j] == 0.0:
                continue
            for k in range(i + 1):
                for l in range(j + 1):
                    out[k, l] += (poly[i, j] * math.comb(i, k) * x0 ** (i - k)
                                  * math.comb(j, l) * y0 ** (j - l))
    return out


def eval_poly_xy(poly: np.ndarray, z):
    """Evaluate sum c_ij x^i y^j at complex points z = x + iy."""
    z = np.asarray(z, dtype=complex)
    x, y = np.real(z), np.imag(z)
    out = np.zeros(z.shape, dtype=float)
    nx, ny = poly.shape
    for i in range(nx):
        for j in range(ny):
            if poly[i, j] != 0.0:
                out = out + poly[i, j] * x ** i * y ** j
    return float(out) if out.ndim == 0 else out
