import math

import numpy as np
import pytest

from holobound import (
    PositiveDefinitenessError,
    SampleFunction,
    WeightFunction,
    build_kernel_estimate,
    disk_rule,
    extremal_ratio,
    gram_matrix,
    kernel_diag,
    normalized_gaussian,
    sb_kernel,
    truncated_plane_rule,
    truncation_radius,
)
from holobound.quadrature import random_disk_points


@pytest.fixture(scope="module")
def rule_r10():
    return truncated_plane_rule(10.0, 256, 512)


class TestSbKernel:
    def test_zero_argument(self):
        for w, t in [(1.0, 1.0), (2.0 - 1.0j, 0.5)]:
            assert sb_kernel(0.0, w, t) == 1.0

    def test_diagonal_at_one(self):
        assert sb_kernel(1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-15)

    def test_off_diagonal_phase(self):
        # z * conj(w) = -i, so the kernel is exp(-i) with unit modulus
        val = sb_kernel(1.0, 1.0j, 1.0)
        assert val == pytest.approx(complex(math.cos(1), -math.sin(1)), rel=1e-15)
        assert abs(val) == pytest.approx(1.0, rel=1e-15)

    def test_rejects_bad_t(self):
        with pytest.raises(ValueError):
            sb_kernel(0.0, 0.0, 0.0)


class TestGramMatrix:
    def test_gaussian_diagonal_factorials(self, gauss1, rule_r10):
        # radial oracle: G_nn = 2 pi * int r^(2n+1) e^(-r^2) dr = pi * n!
        G = gram_matrix(gauss1, 3, rule_r10)
        expected = [math.pi * math.factorial(n) for n in range(4)]
        assert np.allclose(np.real(np.diag(G)), expected, rtol=1e-8)
        off = G - np.diag(np.diag(G))
        assert np.max(np.abs(off)) < 1e-10 * np.max(np.abs(G))

    def test_harmonic_term_breaks_diagonality(self, rule_r10):
        w = WeightFunction.gaussian_harmonic(1.0, c=1.0)
        G = gram_matrix(w, 4, rule_r10)
        assert abs(G[0, 1]) > 1e-3
        assert np.max(np.abs(G - G.conj().T)) == 0.0  # symmetrized exactly

    def test_degree_zero(self, gauss1):
        rule = truncated_plane_rule(6.0, 64, 128)
        G = gram_matrix(gauss1, 0, rule)
        assert G.shape == (1, 1)
        assert G[0, 0] == pytest.approx(math.pi * (1 - math.exp(-36.0)), rel=1e-12)

    def test_not_positive_definite_names_eigenvalue(self, gauss1):
        # 8 nodes cannot support an 11-dimensional Gram matrix
        tiny = truncated_plane_rule(6.0, 2, 4)
        with pytest.raises(PositiveDefinitenessError) as exc:
            gram_matrix(gauss1, 10, tiny)
        assert "eigenvalue" in str(exc.value)
        assert exc.value.smallest_eigenvalue < 1e-10

    def test_degree_cap(self, gauss1, rule_r10):
        with pytest.raises(ValueError):
            gram_matrix(gauss1, 65, rule_r10)


class TestKernelDiag:
    def test_origin_value(self, gauss1, rule_r10):
        # only the constant term contributes at z = 0: 1 / G_00 = 1 / pi
        for N in (0, 5, 40):
            assert kernel_diag(gauss1, N, rule_r10, 0.0) == pytest.approx(
                1.0 / math.pi, rel=1e-10)

    def test_truncated_series_at_one(self, gauss1, rule_r10):
        # series oracle: K_30(1, 1) = (1/pi) sum_{n<=30} 1/n!
        partial = sum(1.0 / math.factorial(n) for n in range(31)) / math.pi
        val = kernel_diag(gauss1, 30, rule_r10, 1.0)
        assert val == pytest.approx(partial, rel=1e-9)
        assert val == pytest.approx(math.e / math.pi, rel=1e-6)

    def test_normalized_gaussian_exactness(self, rule_r10):
        # closed form e^{|z|^2 / t} for the normalized Gaussian density
        w = normalized_gaussian(1.0)
        for z in (0.0, 0.5, 1.0, 1.0 + 1.0j, 1.5):
            expected = math.exp(abs(z) ** 2)
            assert kernel_diag(w, 40, rule_r10, z) == pytest.approx(expected, rel=1e-6)

    def test_normalized_gaussian_other_parameter(self):
        w = normalized_gaussian(2.0)
        rule = truncated_plane_rule(truncation_radius(w, 40), 256, 512)
        for z in (0.0, 1.0, 1.0 + 1.0j):
            expected = math.exp(abs(z) ** 2 / 2.0)
            assert kernel_diag(w, 40, rule, z) == pytest.approx(expected, rel=1e-6)

    def test_convergence_gap_shrinks(self, gauss1, rule_r10):
        est = build_kernel_estimate(gauss1, 40, rule_r10)
        assert est.convergence_gap(1.0) < 1e-8
        assert est.convergence_gap(1.0) < est.diag_at_degree(1.0, 10)

    def test_monotone_in_degree(self, rule_r10):
        w = WeightFunction.gaussian_harmonic(1.0, b=0.3)
        rule = truncated_plane_rule(truncation_radius(w, 40), 256, 512)
        est = build_kernel_estimate(w, 40, rule)
        zs = random_disk_points(20, 1.5, seed=99)
        prev = None
        for n in range(5, 41):
            vals = est.diag_at_degree(zs, n)
            if prev is not None:
                assert np.all(vals >= prev - 1e-10)
            prev = vals

    def test_conjugation_symmetry(self, rule_r10):
        w = WeightFunction.gaussian_harmonic(1.0, b=0.2, c=0.4)
        est = build_kernel_estimate(w, 20, rule_r10)
        zs = random_disk_points(10, 1.5, seed=3)
        a = est.diag(zs)
        b = est.diag(np.conj(zs))
        assert np.allclose(a, b, rtol=1e-12)

    def test_nonnegative(self, rule_r10, gauss1):
        zs = random_disk_points(50, 2.0, seed=8)
        assert (np.asarray(kernel_diag(gauss1, 25, rule_r10, zs)) >= 0.0).all()


class TestDegradation:
    def test_nearly_dependent_basis_degrades(self):
        # monomials restricted to a small off-center disk are nearly linearly
        # dependent, so the equilibrated Gram is ill conditioned and the
        # estimate must shrink to a well-conditioned leading block
        w = WeightFunction.gaussian(100.0)  # nearly flat on the disk
        rule = disk_rule(2.0, 0.5, 64, 128)
        est = build_kernel_estimate(w, 40, rule)
        assert est.degraded
        assert est.effective_degree < 40
        assert est.condition_estimate <= 1e12
        assert est.diag(2.0) > 0.0

    def test_well_conditioned_not_degraded(self, gauss1, rule_r10):
        est = build_kernel_estimate(gauss1, 40, rule_r10)
        assert not est.degraded
        assert est.effective_degree == 40
        assert est.condition_estimate < 1e3


class TestExtremalRatio:
    def test_constant_function(self, gauss1, rule_r10):
        f = SampleFunction.polynomial([1.0])
        # ||1||^2 = pi under e^{-|z|^2}
        assert extremal_ratio(gauss1, f, 0.0, rule_r10) == pytest.approx(
            1.0 / math.pi, rel=1e-10)

    def test_vanishing_at_point(self, gauss1, rule_r10):
        f = SampleFunction.polynomial([0.0, 1.0])
        assert extremal_ratio(gauss1, f, 0.0, rule_r10) == 0.0

    def test_exponential_sample_approaches_kernel(self, gauss1, rule_r10):
        # e^omega truncated to degree 30 is the extremal function at z = 1
        f = SampleFunction.exp_taylor(1.0, 30)
        ratio = extremal_ratio(gauss1, f, 1.0, rule_r10)
        diag = kernel_diag(gauss1, 30, rule_r10, 1.0)
        assert ratio <= diag * (1 + 1e-10)
        assert ratio == pytest.approx(math.e / math.pi, rel=1e-4)

    def test_zero_norm_rejected(self, gauss1, rule_r10):
        f = SampleFunction.polynomial([0.0])
        with pytest.raises(ValueError):
            extremal_ratio(gauss1, f, 0.0, rule_r10)

    def test_dominance_500_random_pairs(self, gauss1):
        rule = truncated_plane_rule(truncation_radius(gauss1, 10), 128, 256)
        est = build_kernel_estimate(gauss1, 10, rule)
        rng = np.random.default_rng(2024)
        for _ in range(500):
            degree = int(rng.integers(0, 11))
            coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
            z = complex(*rng.uniform(-1.5, 1.5, 2))
            f = SampleFunction.polynomial(coeffs)
            ratio = extremal_ratio(gauss1, f, z, rule)
            diag = est.diag(z)
            assert ratio <= diag * (1 + 1e-8)


class TestSampleFunction:
    def test_degree(self):
        assert SampleFunction.polynomial([1.0, 0.0, 2.0]).degree == 2
        assert SampleFunction.polynomial([1.0, 0.0]).degree == 0
        assert SampleFunction.monomial(5).degree == 5

    def test_exp_taylor_coefficients(self):
        f = SampleFunction.exp_taylor(2.0, 3)
        assert f.coefficients == (1.0, 2.0, 2.0, 4.0 / 3.0)

    def test_exponential_factor(self):
        f = SampleFunction.exponential(1.0)
        assert f(1.0) == pytest.approx(math.e, rel=1e-15)
        g = SampleFunction(coefficients=(0.0, 1.0), exp_rate=1.0)
        assert g(2.0) == pytest.approx(2.0 * math.e ** 2, rel=1e-14)

    def test_vectorized_evaluation(self):
        f = SampleFunction.polynomial([1.0, 1.0])
        zs = np.array([0.0, 1.0, 1.0j])
        assert np.allclose(f(zs), [1.0, 2.0, 1.0 + 1.0j])
