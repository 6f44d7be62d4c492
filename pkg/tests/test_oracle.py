import math

import numpy as np
import pytest
from scipy.integrate import quad

from qrwell.eigenfunctions import interval_integral
from qrwell.errors import ConvergenceError
from qrwell.oracle import (
    RRConfig,
    assemble,
    basis_fourier,
    basis_function,
    compare_to_approx,
    eigenfunction_eval,
    phase_fit,
    richardson,
    solve,
    solve_cached,
    weyl_check,
)
from qrwell.spectrum import cs2_bounds, mode_estimate, parity_upper_bounds

# frozen Rayleigh-Ritz eigenvalues, a_bar = 1, 64 sines per parity
RR_AT_ONE = [1.63636222, 2.96942916, 4.45938592, 5.99447355]


def brute_entry(j, k, a_bar, X=3000.0):
    # (1/2 pi) int conj(e_j^) e_k^ sqrt(xi^2 + 1) over the real line
    f = lambda s: (np.conj(basis_fourier(j, a_bar, s)) * basis_fourier(k, a_bar, s)).real * math.sqrt(s * s + 1)
    edges = np.linspace(0, X, 301)
    total = sum(quad(f, lo, hi, epsabs=1e-13, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:]))
    # beyond X the integrand averages to 2 kj kk / (a xi^3) within a parity block
    kj, kk = j * math.pi / (2 * a_bar), k * math.pi / (2 * a_bar)
    tail = kj * kk / (a_bar * X * X)
    return (total + tail) / math.pi


class TestBasis:
    @pytest.mark.parametrize("k", [1, 2, 3, 8])
    @pytest.mark.parametrize("xi", [0.3, math.pi / 2, -2.0, 7.0])
    def test_fourier_against_quadrature(self, k, xi):
        a = 1.0
        re = quad(lambda x: math.cos(xi * x) * basis_function(k, a, x), -a, a, limit=200)[0]
        im = quad(lambda x: math.sin(xi * x) * basis_function(k, a, x), -a, a, limit=200)[0]
        assert abs(basis_fourier(k, a, xi) - complex(re, im)) < 1e-12

    @pytest.mark.parametrize("j, k", [(1, 1), (2, 2), (1, 3), (2, 5)])
    def test_parseval_orthonormality(self, j, k):
        a = 1.5
        x = interval_integral(lambda x: basis_function(j, a, x) * basis_function(k, a, x), -a, a)
        f = lambda s: (np.conj(basis_fourier(j, a, s)) * basis_fourier(k, a, s)).real
        edges = np.linspace(0, 2000, 201)
        xi = sum(quad(f, lo, hi, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:])) / math.pi
        assert x == pytest.approx(float(j == k), abs=1e-13)
        assert xi == pytest.approx(x, abs=1e-5)

    def test_fourier_conjugate_symmetry(self):
        xi = np.array([0.5, 2.0])
        assert np.allclose(basis_fourier(3, 1.0, -xi), np.conj(basis_fourier(3, 1.0, xi)))

    def test_k_domain(self):
        with pytest.raises(ValueError):
            basis_fourier(0, 1.0, 1.0)


class TestAssembly:
    @staticmethod
    @pytest.fixture(scope="class")
    def blocks():
        return assemble(1.0, RRConfig(n_basis=8))

    @pytest.mark.parametrize("j, k, block, i, l", [(1, 1, 0, 0, 0), (1, 3, 0, 0, 1), (2, 4, 1, 0, 1), (4, 4, 1, 1, 1)])
    def test_brute_force_entries(self, blocks, j, k, block, i, l):
        assert blocks[block][i, l] == pytest.approx(brute_entry(j, k, 1.0), abs=1e-7)

    def test_symmetric_and_diagonal_sandwich(self, blocks):
        for M, ks in zip(blocks, (np.arange(1, 16, 2), np.arange(2, 17, 2))):
            kap = ks * math.pi / 2
            assert np.allclose(M, M.T, atol=1e-14)
            # 1 <= <e, sqrt(-D^2 + 1) e> <= sqrt(<e, (-D^2 + 1) e>)
            assert np.all(np.diag(M) > 1)
            assert np.all(np.diag(M) < np.sqrt(kap ** 2 + 1))

    def test_cutoff_too_small(self):
        with pytest.raises(ConvergenceError):
            assemble(1.0, RRConfig(n_basis=8, xi_cutoff=10.0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RRConfig(n_basis=2)
        with pytest.raises(ValueError):
            assemble(0.0)


class TestSpectrum:
    def test_frozen_values(self):
        spec = solve_cached(1.0, 64)
        assert np.allclose(spec.eigenvalues[:4], RR_AT_ONE, atol=1e-7)
        assert spec.parities[:4] == ["even", "odd", "even", "odd"]
        assert spec.tail_error_bound < 1e-8

    @pytest.mark.parametrize("a_bar", [1.0, 10.0])
    def test_variational_against_bounds(self, a_bar):
        spec = solve_cached(a_bar, 64)
        lam = spec.eigenvalues - 1
        for k in range(1, 6):
            ev, od = parity_upper_bounds(a_bar, k)
            assert lam[2 * k - 2] <= ev + 1e-12
            assert lam[2 * k - 1] <= od + 1e-12
        for n in range(1, 10):
            assert spec.eigenvalues[n - 1] >= cs2_bounds(a_bar, n)[0]

    def test_decreasing_in_basis(self):
        a = solve_cached(10.0, 64).eigenvalues[:16]
        b = solve_cached(10.0, 128).eigenvalues[:16]
        assert np.all(b <= a + 1e-12)

    def test_eigenvectors_orthonormal(self):
        V = solve_cached(1.0, 64).eigenvectors
        assert np.allclose(V.T @ V, np.eye(V.shape[0]), atol=1e-12)

    def test_as_dict(self):
        d = solve_cached(1.0, 64).as_dict()
        assert d["n_basis"] == 64 and len(d["eigenvalues"]) == 128


class TestRichardson:
    @staticmethod
    @pytest.fixture(scope="class")
    def rich():
        return richardson(10.0, 6)

    def test_estimate_within_bound(self, rich):
        for n in range(1, 7):
            est = mode_estimate(10.0, n)
            assert abs(rich.values[-1][n - 1] - est.E_tilde) <= est.err_simple

    def test_margin_positive_and_rate(self, rich):
        assert np.all(rich.margin > 0)
        assert np.all(rich.extrapolated <= rich.values[-1])
        assert np.all(np.isfinite(rich.rate))


class TestEigenfunctions:
    def test_normalized(self):
        spec = solve_cached(10.0, 64)
        val = interval_integral(lambda x: eigenfunction_eval(spec, 2, x) ** 2, -10, 10)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_trusted_window(self):
        spec = solve_cached(10.0, 64)
        with pytest.raises(ValueError):
            eigenfunction_eval(spec, 17, 0.0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_close_to_approximants(self, n):
        spec = solve_cached(10.0, 256)
        cmp = compare_to_approx(spec, n)
        assert cmp.l2_dist_fn < 0.05
        assert cmp.l2_dist_phi_tilde < 0.01
        assert cmp.sup_norm < 8 / math.sqrt(10)


def test_weyl_rows():
    rows = weyl_check(solve_cached(10.0, 64), range(1, 5))
    assert [r["n"] for r in rows] == [1, 2, 3, 4]
    assert all(r["n_residual"] == pytest.approx(r["n"] * r["residual"]) for r in rows)


def test_phase_fit_raw():
    spec = solve_cached(1.0, 64)
    ns = np.arange(5, 9)
    assert phase_fit(spec, ns) == pytest.approx(np.mean(spec.eigenvalues[ns - 1] - ns * math.pi / 2))


def test_massless_regime_offset():
    # for n >> a_bar the mass is negligible and the offset tends to -pi/8;
    # the raw basis error here is O(1/N), so use the extrapolated values
    rich = richardson(1.0, 60)
    ns = np.arange(40, 61)
    ext = rich.extrapolated[ns - 1]
    assert np.mean(ext - ns * math.pi / 2) == pytest.approx(-math.pi / 8, abs=0.01)
    est = np.array([mode_estimate(1.0, int(n)).E_tilde for n in ns])
    assert np.all(np.abs(ext - est) <= rich.margin[ns - 1])


@pytest.mark.parametrize("a_bar", [6.0, 10.0])
def test_residual_bound_dominates(a_bar):
    from qrwell.eigenfunctions import phi_tilde_norm_sq
    from qrwell.spectrum import residual_norm_bound

    spec = solve_cached(a_bar, 128)
    for n in range(1, 7):
        est = mode_estimate(a_bar, n)
        implied = abs(spec.eigenvalues[n - 1] - est.E_tilde) * math.sqrt(phi_tilde_norm_sq(a_bar, n)) * 0.9
        assert residual_norm_bound(a_bar, est.mu_tilde) >= implied
