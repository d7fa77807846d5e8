"""Symmetric-function kernel: oracles are subset enumeration and central
finite differences; identities are checked in exact rational arithmetic."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from capflow import symfunc as sf


def sigma_bruteforce(kappa, k):
    """Subset-enumeration oracle for the elementary symmetric polynomial."""
    if k == 0:
        return 1.0
    return sum(math.prod(sub) for sub in itertools.combinations(kappa, k))


def E_bruteforce(kappa, k):
    return sigma_bruteforce(kappa, k) / math.comb(len(kappa), k)


def test_normalized_mean_curvature_examples():
    assert sf.normalized_mean_curvature([1.0, 1.0, 1.0], 2) == pytest.approx(1.0)
    assert sf.normalized_mean_curvature([1.0, 2.0, 3.0], 2) == pytest.approx(11.0 / 3.0)
    assert sf.normalized_mean_curvature([1.0, 2.0, 3.0], 3) == pytest.approx(6.0)
    with pytest.raises(IndexError):
        sf.normalized_mean_curvature([1.0, 2.0], 5)


def test_sigma_recurrence_matches_enumeration():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4, 6, 9):
        kappa = rng.uniform(0.05, 5.0, size=n)
        E = sf.normalized_mean_curvatures(kappa)
        for k in range(n + 1):
            assert E[k] == pytest.approx(E_bruteforce(kappa, k), rel=1e-12)


def test_curvature_F_examples():
    for spec in (sf.CurvatureSpec(1, 0), sf.CurvatureSpec(2, 1), sf.CurvatureSpec(3, 1)):
        assert sf.curvature_F(np.ones(4), spec) == pytest.approx(1.0)
    assert sf.curvature_F(np.array([2.0, 2.0]), sf.CurvatureSpec(1, 0)) == pytest.approx(2.0)
    val = sf.curvature_F(np.array([1.0, 2.0, 3.0]), sf.CurvatureSpec(2, 1))
    assert val == pytest.approx(11.0 / 6.0)


def test_curvature_F_homogeneous_degree_one():
    rng = np.random.default_rng(3)
    kappa = rng.uniform(0.1, 4.0, size=(50, 4))
    for spec in (sf.CurvatureSpec(2, 1), sf.CurvatureSpec(3, 0), sf.CurvatureSpec(4, 2)):
        F = sf.curvature_F(kappa, spec)
        F2 = sf.curvature_F(2.5 * kappa, spec)
        assert np.allclose(F2, 2.5 * F, rtol=1e-12)


def test_curvature_F_cone_violation():
    with pytest.raises(sf.ConeViolation):
        sf.curvature_F(np.array([-1.0, -2.0, 0.5]), sf.CurvatureSpec(1, 0))
    with pytest.raises(sf.ConeViolation):
        sf.curvature_F(np.array([-0.1, 1.0, 2.0]), sf.CurvatureSpec(2, 1))


def test_gradient_mean_is_uniform():
    g = sf.curvature_F_gradient(np.array([0.3, 2.0, 5.0]), sf.CurvatureSpec(1, 0))
    assert np.allclose(g, 1.0 / 3.0)


def test_gradient_matches_finite_differences():
    k0 = np.array([1.0, 2.0, 3.0])
    h = 1e-5
    for spec in (sf.CurvatureSpec(2, 1), sf.CurvatureSpec(3, 1), sf.CurvatureSpec(2, 0)):
        g = sf.curvature_F_gradient(k0, spec)
        for i in range(3):
            e = np.eye(3)[i]
            fd = (sf.curvature_F(k0 + h * e, spec) - sf.curvature_F(k0 - h * e, spec)) / (2 * h)
            assert g[i] == pytest.approx(fd, abs=1e-8)


def test_gradient_symmetry_at_umbilic_point():
    g = sf.curvature_F_gradient(np.ones(3), sf.CurvatureSpec(2, 1))
    assert np.allclose(g, g[0])
    assert np.all(g > 0)


def test_double_factorial_constants():
    assert sf.double_factorial(5) == 15
    assert sf.double_factorial(0) == 1
    assert sf.double_factorial(-1) == 1
    c3 = sf.double_factorial_constants(3)
    assert c3.omega == pytest.approx(4 * math.pi)
    c2 = sf.double_factorial_constants(2)
    assert c2.ball == pytest.approx(math.pi)
    for n in range(1, 12):
        c = sf.double_factorial_constants(n)
        assert c.ball == pytest.approx(c.omega / n, rel=1e-14)


def test_alternating_sum_examples():
    assert sf.alternating_sum_S(4, 0) == Fraction(1, 4)
    assert sf.alternating_sum_S(5, 2) == Fraction(8, 15)
    assert sf.alternating_sum_product_form(5, 2) == Fraction(8, 15)
    # recursion instance
    assert sf.alternating_sum_S(7, 2) == sf.alternating_sum_S(5, 1) - sf.alternating_sum_S(7, 1)
    with pytest.raises(ValueError):
        sf.alternating_sum_S(4, 2)  # 2k+1 > n


def test_af_rhs_reduces_to_w1_at_k0():
    for n, w1 in ((3, 0.4), (4, 1.3), (7, 0.01)):
        assert sf.af_rhs_A(n, 0, w1) == pytest.approx(w1, rel=1e-13)


def test_af_rhs_flat_disk_value():
    # flat-disk W_1 = omega_{n-1}/(n(n+1)); the bound is then exactly W_{2k+1}
    assert sf.af_rhs_A(3, 1, math.pi / 3) == pytest.approx(math.pi / 3, rel=1e-13)


def test_af_rhs_scaling_decomposition():
    # scaling W_1 by lam^n scales summand i by lam^(n-2k+2i)
    n, k = 3, 1
    w1 = 0.37
    lam = 1.7
    omega = sf.sphere_area(n - 1)
    pref = omega / n * math.prod((n - 2 * j) / (n + 1 - 2 * j) for j in range(k + 1))
    b = n * (n + 1) * w1 / omega
    direct = sf.af_rhs_A(n, k, lam**n * w1)
    terms = [(-1) ** i * math.comb(k, i) / (n - 2 * k + 2 * i)
             * (b * lam**n) ** ((n - 2 * k + 2 * i) / n) for i in range(k + 1)]
    assert direct == pytest.approx(pref * sum(terms), rel=1e-13)
    # mixture of lam and lam^3 terms, never a single power
    assert direct != pytest.approx(lam * sf.af_rhs_A(n, k, w1), rel=1e-3)
    assert direct != pytest.approx(lam**3 * sf.af_rhs_A(n, k, w1), rel=1e-3)


def sample_gamma_plus(rng, m, n):
    """Log-uniform positive-cone samples over [1e-2, 10] per component."""
    return np.exp(rng.uniform(math.log(1e-2), math.log(10.0), size=(m, n)))


def test_newton_maclaurin_sampled():
    rng = np.random.default_rng(2024)
    for n in (2, 3, 5):
        kappa = sample_gamma_plus(rng, 20_000, n)
        E = sf.normalized_mean_curvatures(kappa)
        for k in range(1, n):
            lhs = E[:, k + 1] * E[:, k - 1]
            rhs = E[:, k] ** 2
            assert np.all(lhs <= rhs * (1 + 1e-12))
            assert np.all(E[:, k + 1] <= E[:, k] ** ((k + 1) / k) * (1 + 1e-12))
        # equality only at umbilic points
        spread = kappa.max(axis=1) / kappa.min(axis=1) > 1.0 + 1e-6
        gap = (E[:, 1] ** 2 - E[:, 2] * E[:, 0])[spread]
        assert np.all(gap > 0)
    equal = np.full((1, 4), 2.7)
    E = sf.normalized_mean_curvatures(equal)[0]
    assert abs(E[2] * E[0] - E[1] ** 2) <= 1e-12 * max(1.0, E[1] ** 2)


def test_F_bounded_by_mean_and_gradient_sum():
    rng = np.random.default_rng(11)
    for n, spec in ((3, sf.CurvatureSpec(2, 1)), (4, sf.CurvatureSpec(3, 1)),
                    (4, sf.CurvatureSpec(2, 0))):
        kappa = sample_gamma_plus(rng, 10_000, n)
        F = sf.curvature_F(kappa, spec)
        E1 = np.mean(kappa, axis=1)
        assert np.all(F <= E1 * (1 + 1e-12))
        grad = sf.curvature_F_gradient(kappa, spec)
        assert np.all(np.sum(grad, axis=1) >= 1.0 - 1e-12)
        assert np.all(grad > 0)


def test_concavity_pairing_sampled():
    rng = np.random.default_rng(13)
    for n, spec in ((3, sf.CurvatureSpec(2, 1)), (5, sf.CurvatureSpec(3, 2))):
        kappa = sample_gamma_plus(rng, 10_000, n)
        grad = sf.curvature_F_gradient(kappa, spec)
        for i in range(n):
            for j in range(i + 1, n):
                pair = (grad[:, i] - grad[:, j]) * (kappa[:, i] - kappa[:, j])
                assert np.all(pair <= 1e-12)


def test_inverse_dual_properties():
    rng = np.random.default_rng(17)
    kappa = sample_gamma_plus(rng, 2_000, 4)
    for spec in (sf.CurvatureSpec(2, 1), sf.CurvatureSpec(4, 2)):
        Fs = sf.inverse_dual_F(kappa, spec)
        assert sf.inverse_dual_F(np.ones((1, 4)), spec)[0] == pytest.approx(1.0)
        Fs2 = sf.inverse_dual_F(3.0 * kappa, spec)
        assert np.allclose(Fs2, 3.0 * Fs, rtol=1e-12)
        # duality with the complementary ratio: F_*(E_k/E_l) = (E_{n-l}/E_{n-k})
        dual = sf.CurvatureSpec(4 - spec.ell, 4 - spec.k)
        assert np.allclose(Fs, sf.curvature_F(kappa, dual), rtol=1e-10)


def test_kappa_vector_type():
    kv = sf.KappaVector.of([3.0, 1.0, 2.0])
    assert kv.values == (1.0, 2.0, 3.0)
    assert kv.in_gamma_plus
    assert not sf.KappaVector.of([0.0, 1.0]).in_gamma_plus
    with pytest.raises(ValueError):
        sf.KappaVector(values=(2.0, 1.0), n=2)
    with pytest.raises(ValueError):
        sf.KappaVector.of([1.0])
