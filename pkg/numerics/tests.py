import math

import numpy as np
import pytest
from scipy import integrate, optimize, special

from numerics import (
    bisection_root,
    erf,
    hermitian_solve,
    make_generator,
    marcum_q1,
    polyval_real,
    quartic_real_roots,
    real_symmetric_evd,
    sinc,
)
from utils.exceptions import (
    AsymmetryError,
    BracketError,
    DegenerateCoefficientError,
    DomainError,
    NotPositiveDefiniteError,
)


def _marcum_by_quadrature(a: float, b: float) -> float:
    # i0e keeps the integrand finite for large a*t
    integrand = lambda t: t * math.exp(-0.5 * (t - a) ** 2) * special.i0e(a * t)
    value, _ = integrate.quad(integrand, b, np.inf, epsabs=0, epsrel=1e-12, limit=500)
    return value


def _sign_change_roots(coeffs, lo=-20.0, hi=20.0, points=40001):
    grid = np.linspace(lo, hi, points)
    values = np.polyval(coeffs, grid)
    roots = []
    for x0, x1, f0, f1 in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if f0 == 0:
            roots.append(x0)
        elif f0 * f1 < 0:
            roots.append(optimize.brentq(lambda x: np.polyval(coeffs, x), x0, x1, xtol=1e-14))
    return roots


class TestSpecialFunctions:
    def test_erf_values(self):
        assert erf(0.0) == 0.0
        assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-12)
        xs = np.linspace(-3, 3, 31)
        np.testing.assert_allclose(erf(-xs), -erf(xs), atol=1e-15)

    def test_erf_matches_integral(self):
        value, _ = integrate.quad(lambda t: 2 / math.sqrt(math.pi) * math.exp(-t * t), 0, 1)
        assert erf(1.0) == pytest.approx(value, abs=1e-12)

    def test_sinc(self):
        assert sinc(0.0) == 1.0
        assert sinc(1.0) == pytest.approx(0.0, abs=1e-15)
        assert sinc(0.5) == pytest.approx(2 / math.pi, abs=1e-12)

    def test_marcum_reductions(self):
        for b in (0.1, 1.0, 3.0):
            assert marcum_q1(0.0, b) == pytest.approx(math.exp(-b * b / 2), rel=1e-12)
        for a in (0.0, 0.5, 7.0):
            assert marcum_q1(a, 0.0) == 1.0

    def test_marcum_reference_value(self):
        # Q1(1, 2) = 0.26901206004
        assert marcum_q1(1.0, 2.0) == pytest.approx(0.26901206004, abs=1e-10)
        assert marcum_q1(1.0, 2.0) == pytest.approx(_marcum_by_quadrature(1.0, 2.0), rel=1e-9)

    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.0, 2.0), (3.0, 2.5), (5.0, 8.0), (10.0, 9.0)])
    def test_marcum_against_quadrature(self, a, b):
        assert marcum_q1(a, b) == pytest.approx(_marcum_by_quadrature(a, b), rel=1e-8)

    def test_marcum_monotonicity(self):
        grid = np.linspace(0, 6, 25)
        for a in grid:
            values = [marcum_q1(a, b) for b in grid]
            assert all(x >= y - 1e-15 for x, y in zip(values, values[1:]))
        for b in grid:
            values = [marcum_q1(a, b) for a in grid]
            assert all(x <= y + 1e-15 for x, y in zip(values, values[1:]))

    @pytest.mark.parametrize("a,b", [(-1.0, 1.0), (1.0, -0.1), (float("nan"), 1.0)])
    def test_marcum_domain(self, a, b):
        with pytest.raises(DomainError):
            marcum_q1(a, b)


class TestQuartic:
    def test_factorizable(self):
        roots = quartic_real_roots(1, -2, 0, 0, 0)
        assert {round(r, 9) for r in roots} == {0.0, 2.0}

    def test_x4_minus_x3_minus_1(self):
        roots = quartic_real_roots(1, -1, 0, 0, -1)
        oracle = _sign_change_roots([1, -1, 0, 0, -1])
        assert len(roots) == 2
        np.testing.assert_allclose(roots, sorted(oracle), atol=1e-9)
        np.testing.assert_allclose(roots, [-0.8192, 1.3803], atol=1e-4)

    def test_double_root(self):
        roots = quartic_real_roots(1, -2, 2, -2, 1)
        assert len(roots) == 2
        np.testing.assert_allclose(roots, [1.0, 1.0], atol=1e-6)

    def test_residual_contract(self):
        coeffs = (2.0, -3.0, -11.0, 12.0, 4.0)
        scale = max(1.0, max(abs(c) for c in coeffs))
        for x in quartic_real_roots(*coeffs):
            assert abs(np.polyval(coeffs, x)) <= 1e-8 * scale

    def test_polyval_real(self):
        assert polyval_real([1, -1, 0, 0, -1], 2.0) == 7.0
        assert polyval_real((3.0,), 5.0) == 3.0
        assert isinstance(polyval_real(np.array([1, 0]), 2), float)

    def test_leading_zero(self):
        with pytest.raises(DegenerateCoefficientError):
            quartic_real_roots(0, 1, 2, 3, 4)

    def test_random_constructed_roots(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            if rng.random() < 0.5:
                real = np.sort(rng.uniform(-3, 3, size=4))
                coeffs = np.poly(real)
            else:
                real = np.sort(rng.uniform(-3, 3, size=2))
                centre, spread = rng.uniform(-3, 3), rng.uniform(0.5, 2.0)
                coeffs = np.real(np.poly(np.concatenate([real, [centre + 1j * spread, centre - 1j * spread]])))
            found = np.asarray(quartic_real_roots(*coeffs))
            for root in real:
                assert np.min(np.abs(found - root)) < 1e-6


class TestBisection:
    def test_examples(self):
        assert bisection_root(lambda x: x - 3, 0, 10) == pytest.approx(3, abs=1e-10)
        assert bisection_root(lambda x: x * x - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-10)
        assert bisection_root(lambda x: math.exp(x) - 1, -1, 1) == pytest.approx(0, abs=1e-10)

    def test_deterministic(self):
        f = lambda x: x**3 - 0.3
        assert bisection_root(f, 0, 1) == bisection_root(f, 0, 1)

    def test_bad_bracket(self):
        with pytest.raises(BracketError):
            bisection_root(lambda x: x * x + 1, -1, 1)


class TestDenseLinearAlgebra:
    def test_solve_trivial(self):
        b = np.array([1 + 2j, -1j, 3.0])
        np.testing.assert_allclose(hermitian_solve(np.eye(3), b), b)
        np.testing.assert_allclose(hermitian_solve(2 * np.eye(3), b), b / 2)

    def test_solve_random(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            A = G @ G.conj().T + np.eye(4)
            b = rng.normal(size=4) + 1j * rng.normal(size=4)
            x = hermitian_solve(A, b)
            assert np.linalg.norm(A @ x - b) <= 1e-8 * np.linalg.norm(b)

    def test_solve_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            hermitian_solve(np.diag([1.0, -1.0]), np.ones(2))

    def test_solve_rejects_non_hermitian(self):
        with pytest.raises(AsymmetryError):
            hermitian_solve(np.array([[1, 1j], [1j, 1]]), np.ones(2))

    def test_evd_examples(self):
        evd = real_symmetric_evd(np.eye(3))
        np.testing.assert_allclose(evd.eigenvalues, [1, 1, 1])
        evd = real_symmetric_evd(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(evd.eigenvalues, [3, 2, 1])
        np.testing.assert_allclose(np.abs(evd.eigenvectors), np.eye(3)[:, [0, 2, 1]])

    def test_evd_rank_two(self):
        rng = np.random.default_rng(3)
        Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        u, v = Q[:, 0], Q[:, 1]
        evd = real_symmetric_evd(np.outer(u, u) + np.outer(v, v))
        np.testing.assert_allclose(evd.eigenvalues, [1, 1, 0, 0, 0, 0], atol=1e-12)

    def test_evd_invariants(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 257))
            X = rng.normal(size=(n, n))
            M = (X + X.T) / 2
            evd = real_symmetric_evd(M)
            V = evd.eigenvectors
            assert np.linalg.norm(evd.reconstruct() - M) <= 1e-9 * np.linalg.norm(M)
            assert np.linalg.norm(V.T @ V - np.eye(n)) <= 1e-9
            assert np.all(np.diff(evd.eigenvalues) <= 0)

    def test_evd_rejects_asymmetry(self):
        with pytest.raises(AsymmetryError):
            real_symmetric_evd(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestGenerators:
    def test_streams_are_reproducible(self):
        a = make_generator(5, stream=3).normal(size=4)
        b = make_generator(5, stream=3).normal(size=4)
        np.testing.assert_array_equal(a, b)

    def test_streams_match_spawn(self):
        child = np.random.SeedSequence(9).spawn(4)[2]
        expected = np.random.Generator(np.random.Philox(child)).random(3)
        np.testing.assert_array_equal(make_generator(9, stream=2).random(3), expected)

    def test_negative_seed(self):
        with pytest.raises(DomainError):
            make_generator(-1)
