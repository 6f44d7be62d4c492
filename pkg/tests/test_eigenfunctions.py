import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qrwell.eigenfunctions import (
    F,
    G,
    G_integral,
    GProfile,
    WaveApprox,
    bump_q,
    eigenfunction_error_bounds,
    exponent_integral,
    f_n,
    g_profile,
    gamma_mu,
    interval_integral,
    laplace_bound,
    laplace_F,
    laplace_F_direct,
    norm_sq_bounds,
    phi_tilde,
    phi_tilde_norm_sq,
)
from qrwell.phase_shift import theta_value
from qrwell.spectrum import PhysicalParams, solve_mu_tilde

MUS = [0.1, 0.5, 1.0, 2.0, 5.0]
# frozen from the closed form cos(theta) - sqrt((1 + c)/(2c)), divided by mu
I_MU = {0.1: 0.0073881699989, 0.5: 0.0322906828160, 1.0: 0.0472980119314,
        2.0: 0.0487096053218, 5.0: 0.0314225873731}


def g_by_quad(mu, x):
    # independent route: adaptive quadrature of the density over (1, inf)
    f = lambda r: gamma_mu(mu, r) * math.exp(-x * r)
    pieces = [(1, 2), (2, 50), (50, np.inf)]
    return sum(quad(f, a, b, epsabs=1e-14, limit=400)[0] for a, b in pieces)


class TestDensity:
    def test_zero_below_one(self):
        assert gamma_mu(1.0, 0.5) == 0.0
        assert np.all(gamma_mu(1.0, np.array([-1.0, 1.0])) == 0.0)

    def test_frozen_value(self):
        assert gamma_mu(1.0, 2.0) == pytest.approx(0.0296927499210, abs=1e-12)

    @pytest.mark.parametrize("r", [1.01, 2.0, 10.0, 1e3])
    def test_cutoff_route(self, r):
        assert gamma_mu(1.0, r, cutoff=1e4) == pytest.approx(gamma_mu(1.0, r), rel=1e-10)

    def test_positive(self):
        assert np.all(gamma_mu(0.7, np.linspace(1.001, 100, 50)) > 0)

    def test_exponent_complex_matches_real(self):
        J_r, _ = exponent_integral(1.0, np.array([2.0]))
        J_c, _ = exponent_integral(1.0, np.array([2.0 + 0j]))
        assert J_c[0].real == pytest.approx(J_r[0], rel=1e-13)
        assert abs(J_c[0].imag) < 1e-15

    def test_exponent_domain(self):
        with pytest.raises(ValueError):
            exponent_integral(1.0, np.array([-1.0]))
        with pytest.raises(ValueError):
            exponent_integral(1.0, np.array([-1.0 + 1j]))


class TestProfile:
    @pytest.mark.parametrize("mu", MUS)
    def test_I_mu_dual_route(self, mu):
        q, closed = G_integral(mu)
        assert abs(q - closed) < 1e-12
        assert q == pytest.approx(I_MU[mu], abs=1e-12)

    @pytest.mark.parametrize("mu", MUS)
    def test_G0_equals_sin_theta(self, mu):
        assert g_profile(mu).G0_plus == pytest.approx(math.sin(theta_value(mu)), abs=1e-12)

    @pytest.mark.parametrize("x", [0.05, 0.5, 2.0])
    def test_G_against_quad(self, x):
        assert G(1.0, x) == pytest.approx(g_by_quad(1.0, x), abs=1e-12)

    def test_level_independent(self):
        x = np.array([1e-3, 0.1, 1.0, 10.0])
        assert np.allclose(GProfile(1.0, 5)(x), GProfile(1.0, 7)(x), atol=1e-13, rtol=0)
        assert np.all(g_profile(1.0).error(x) < 1e-12)

    @pytest.mark.parametrize("mu", [0.3, 1.0, 4.0])
    def test_complete_monotonicity(self, mu):
        x = np.geomspace(1e-3, 20, 60)
        prof = g_profile(mu)
        for k in range(5):
            d = prof.derivative(x, k) if k else prof(x)
            assert np.all((-1) ** k * d > 0)

    def test_derivative_finite_difference(self):
        h = 1e-5
        fd = (G(1.0, 1.0 + h) - G(1.0, 1.0 - h)) / (2 * h)
        assert g_profile(1.0).derivative(1.0) == pytest.approx(fd, rel=1e-7)

    def test_domain(self):
        with pytest.raises(ValueError):
            G(1.0, 0.0)
        with pytest.raises(ValueError):
            GProfile(0.0)


class TestHalfLineWave:
    def test_zero_outside(self):
        assert F(1.0, -0.5) == 0.0 and F(1.0, 0.0) == 0.0

    @pytest.mark.parametrize("mu", [0.05, 1.0, 3.0])
    def test_square_root_at_wall(self, mu):
        # fit C at x = 1e-2, then |F| <= 1.05 C sqrt(x) closer to the wall
        C = abs(F(mu, 1e-2)) / 0.1
        for x in (1e-3, 1e-4, 1e-6):
            assert abs(F(mu, x)) <= 1.05 * C * math.sqrt(x)

    def test_small_mu_wall_example(self):
        assert abs(F(0.05, 1e-4)) < 1e-3

    def test_far_field(self):
        mu = 1.0
        x = np.array([30.0, 40.0])
        assert np.allclose(F(mu, x), np.sin(mu * x + theta_value(mu)), atol=1e-12)


class TestLaplace:
    @pytest.mark.parametrize("xi", [0.5, 1.0, 3.0, 1 + 0.5j, 2 - 1j])
    def test_dual_route(self, xi):
        assert abs(laplace_F(1.0, xi) - laplace_F_direct(1.0, xi)) < 1e-10

    @pytest.mark.parametrize("mu", [0.3, 1.0, 4.0])
    @pytest.mark.parametrize("xi", [0.1, 1.0, 10.0, 0.5 + 2j, 3 + 3j])
    def test_bound(self, mu, xi):
        assert abs(laplace_F(mu, xi)) <= laplace_bound(mu, xi)

    def test_pole_guard(self):
        with pytest.raises(ValueError):
            laplace_F(1.0, 1e-14 + 1j)


class TestBump:
    @given(st.floats(-5, 5), st.floats(0.01, 3))
    def test_partition_of_unity(self, x, b):
        assert bump_q(x, b) + bump_q(-x, b) == pytest.approx(1.0, abs=1e-14)

    @given(st.floats(-5, 5), st.floats(0.01, 3))
    def test_range(self, x, b):
        assert 0.0 <= bump_q(x, b) <= 1.0

    def test_c1(self):
        b, h = 0.7, 1e-7
        for x0 in (-b, 0.0, b):
            left = (bump_q(x0, b) - bump_q(x0 - h, b)) / h
            right = (bump_q(x0 + h, b) - bump_q(x0, b)) / h
            assert left == pytest.approx(right, abs=1e-5)

    def test_bad_width(self):
        with pytest.raises(ValueError):
            bump_q(0.0, 0.0)


class TestGlued:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_parity(self, n):
        x = np.linspace(0.01, 2.9, 40)
        s = 1 if n % 2 else -1
        assert np.allclose(phi_tilde(3.0, n, -x), s * phi_tilde(3.0, n, x), atol=1e-14)
        assert np.allclose(f_n(3.0, n, -x), s * f_n(3.0, n, x))

    def test_vanishes_outside(self):
        assert phi_tilde(3.0, 1, 3.5) == 0.0 and f_n(3.0, 1, -3.0) == 0.0

    def test_f_n_normalized(self):
        # cos^2 over the well integrates to a_bar + sin(2 mu a)/(2 mu)
        a, n = 4.0, 3
        mu = solve_mu_tilde(a, n)
        val = interval_integral(lambda x: f_n(a, n, x) ** 2, -a, a)
        assert val == pytest.approx(1 + math.sin(2 * mu * a) / (2 * mu * a), rel=1e-12)

    @pytest.mark.parametrize("a_bar", [1.0, 3.0, 10.0])
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_norm_sandwich(self, a_bar, n):
        lo, hi = norm_sq_bounds(a_bar, n)
        assert lo <= phi_tilde_norm_sq(a_bar, n) <= hi

    def test_interval_integral_sqrt(self):
        assert interval_integral(np.sqrt, 0.0, 1.0) == pytest.approx(2 / 3, abs=1e-14)

    def test_wave_approx(self):
        w = WaveApprox("phi_tilde", 2, 3.0)
        assert w.parity == "odd"
        assert w(0.5) == phi_tilde(3.0, 2, 0.5)
        assert WaveApprox("F_halfline", 1.0).parity is None
        assert WaveApprox("f_n", 1, 3.0)(0.0) == pytest.approx(1 / math.sqrt(3))
        assert w.l2_norm_sq_bounds() == norm_sq_bounds(3.0, 2)
        with pytest.raises(ValueError):
            WaveApprox("nope", 1, 3.0)(0.0)
        with pytest.raises(ValueError):
            WaveApprox("f_n", 1, 3.0).l2_norm_sq_bounds()


def test_error_bounds_natural_units():
    l2, sup, refined = eigenfunction_error_bounds(PhysicalParams(1, 1, 1, 10.0), 1)
    assert l2 == pytest.approx(5.5)
    assert sup == pytest.approx(8 / math.sqrt(10))
    assert 0 < refined < l2
