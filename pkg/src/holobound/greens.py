"""Fundamental solution of the planar Laplacian and log-potential convolution.

The convolution engine evaluates Phi = Gamma * psi for a smooth density psi
supported in a disk around the origin.  Two fixed rules are used:

  * near field (|z| <= near_reach): integrate Gamma(zeta) psi(z - zeta) over
    a fixed disk centered on the singularity, which the polar rule absorbs;
  * far field (|z| > near_reach): swap variables and integrate
    psi(eta) Gamma(z - eta) over the support disk, where the integrand is
    smooth because the singularity sits outside the support.

Keeping both node sets fixed (independent of z) makes the quadrature error a
smooth function of z, which matters when finite-difference stencils are
applied to Phi: a z-dependent window would turn tiny quadrature noise into
large stencil residuals.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import disk_rule

__all__ = ["gamma", "bump", "cutoff_g", "LogPotential"]

_TWO_PI = 2.0 * math.pi

# pair-entry budget per block when evaluating z-batches against node sets
_BLOCK_ENTRIES = 1 << 23


def gamma(z):
    """Fundamental solution (1/2pi) log|z| of the Laplacian on the plane.

    Rejects z = 0, where the solution is singular.
    """
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if np.any(r == 0.0):
        raise ValueError("fundamental solution is singular at z = 0")
    out = np.log(r) / _TWO_PI
    return float(out) if out.ndim == 0 else out


def bump(t):
    """exp(-1/t) for t > 0, exactly 0 otherwise; the C-infinity ramp."""
    t = np.asarray(t, dtype=float)
    pos = t > 0.0
    out = np.where(pos, np.exp(-1.0 / np.where(pos, t, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def cutoff_g(z):
    """Smooth radial cutoff: exactly 1 on |z| <= 1, exactly 0 on |z| >= 2.

    g(z) = q(2 - |z|) / (q(2 - |z|) + q(|z| - 1)) with q the exponential
    ramp; values lie in [0, 1] and g(|z| = 1.5) = 1/2 by symmetry.
    """
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    a = bump(2.0 - r)
    b = bump(r - 1.0)
    out = np.asarray(a / (np.asarray(a) + b))
    return float(out) if out.ndim == 0 else out


class LogPotential:
    """Evaluator for Phi = Gamma * psi with psi supported in D(0, support_radius).

    ``resolution`` is the radial node count of the near-field rule; the
    angular count is twice that.  The far-field rule over the support disk is
    cheap and very accurate because its integrand is smooth.
    """

    def __init__(self, psi, support_radius: float = 2.0, resolution: int = 256,
                 far_resolution: int = 64, near_reach: float = 5.5,
                 radial: bool = False):
        if support_radius <= 0:
            raise ValueError("support_radius must be positive")
        self.psi = psi
        self.support_radius = float(support_radius)
        self.resolution = int(resolution)
        self.near_reach = float(near_reach)
        self.radial = bool(radial)
        near = disk_rule(0.0, self.near_reach + self.support_radius,
                         self.resolution, 2 * self.resolution)
        self._near_nodes = near.nodes
        self._near_gw = near.weights * np.log(np.abs(near.nodes)) / _TWO_PI
        # radius-major node layout: ascending radii in blocks of n_theta,
        # so a radius prefix is a contiguous slice
        self._near_radii = np.abs(near.nodes[::near.n_theta])
        self._near_n_theta = near.n_theta
        far = disk_rule(0.0, self.support_radius, int(far_resolution), 2 * int(far_resolution))
        self._far_nodes = far.nodes
        self._far_pw = far.weights * np.asarray(psi(far.nodes), dtype=float)
        self.mass = float(np.sum(self._far_pw))

    def _near_values(self, zs: np.ndarray) -> np.ndarray:
        # psi(z - zeta) vanishes for |zeta| > |z| + support, so each block
        # only touches the node prefix inside that radius
        out = np.empty(len(zs))
        order = np.argsort(np.abs(zs), kind="stable")
        block = max(1, _BLOCK_ENTRIES // len(self._near_nodes))
        for start in range(0, len(zs), block):
            idx = order[start:start + block]
            zb = zs[idx]
            reach = float(np.max(np.abs(zb))) + self.support_radius
            m = int(np.searchsorted(self._near_radii, reach, side="right"))
            m *= self._near_n_theta
            diff = zb[:, None] - self._near_nodes[None, :m]
            out[idx] = np.asarray(self.psi(diff)) @ self._near_gw[:m]
        return out

    def _far_values(self, zs: np.ndarray) -> np.ndarray:
        out = np.empty(len(zs))
        block = max(1, _BLOCK_ENTRIES // len(self._far_nodes))
        for start in range(0, len(zs), block):
            zb = zs[start:start + block]
            diff = np.abs(zb[:, None] - self._far_nodes[None, :])
            out[start:start + block] = np.log(diff) @ self._far_pw / _TWO_PI
        return out

    def _values_inner(self, zs: np.ndarray) -> np.ndarray:
        out = np.empty(len(zs))
        near = np.abs(zs) <= self.near_reach
        if near.any():
            out[near] = self._near_values(zs[near])
        if (~near).any():
            out[~near] = self._far_values(zs[~near])
        return out

    def values(self, zs) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        if not self.radial:
            return self._values_inner(zs)
        # radial psi makes Phi a function of |z| alone, so evaluating one
        # point per distinct radius collapses polar-grid batches (n_r * n_t
        # nodes share only n_r radii)
        radii, inverse = np.unique(np.abs(zs), return_inverse=True)
        return self._values_inner(radii.astype(complex))[inverse]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if z.ndim == 0:
            return float(self.values(z.reshape(1))[0])
        return self.values(z)
