import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from conftest import simpson_weights
from stochburgers import analytic as an
from stochburgers import noise as nz
from stochburgers.spectral import NEUMANN, ConfigurationError, Domain, build_basis

# threshold crossings of G / G(0), from the Gaussian-integral oracle below
X_G = {0.5: 0.98918, 0.2: 2.04524, 0.1: 2.72291}


def g_gaussian(x):
    """``G(x) = (sqrt(pi)/4) int_0^2 s^{-1/2} exp(-x^2 / 4s) ds`` (swap the k and
    time integrals in the definition of G)."""
    val, _ = integrate.quad(lambda s: np.exp(-x * x / (4 * s)) / np.sqrt(s), 0, 2, epsabs=1e-13)
    return np.sqrt(np.pi) / 4 * val


def test_mean_energy_series_examples():
    b = build_basis(Domain(np.pi, NEUMANN, 1.0), 4000)
    assert an.mean_energy_series(b, 1.0, 0.0) == (0.0, pytest.approx(0.0, abs=1e-3))
    val, tail = an.mean_energy_series(b, 1.0, 1e4)
    assert val + tail >= np.pi / 12 >= val
    assert val == pytest.approx(np.pi / 12, abs=2 * tail)
    exact = an.mean_energy_exact(Domain(np.pi, NEUMANN, 1.0), 1.0, 1e4)
    assert exact == pytest.approx(0.2617993877991494, rel=1e-12)


def test_match_condition_saturation_level():
    dom = Domain(1.0, NEUMANN, 0.5)
    alpha = 1.7
    sigma = an.matched_sigma(alpha, dom)
    assert sigma ** 2 == pytest.approx(2 * alpha ** 2 / dom.length)
    assert an.mean_energy_exact(dom, sigma, 50.0) == pytest.approx(alpha ** 2 / (6 * 0.5), rel=1e-12)


def test_mean_energy_exact_agrees_with_long_series():
    dom = Domain(1.0, NEUMANN, 1.0)
    b = build_basis(dom, 3000)
    for t in (1e-3, 0.05, 1.0):
        val, tail = an.mean_energy_series(b, 1.3, t)
        assert an.mean_energy_exact(dom, 1.3, t) == pytest.approx(val, abs=tail + 1e-14)


def test_linear_mean_energy_equals_series_for_body_noise(neumann_unit):
    spec = nz.NoiseSpec.body(1.1)
    for t in (1e-4, 0.1, 3.0):
        assert an.linear_mean_energy(neumann_unit, spec, t) == pytest.approx(
            an.mean_energy_series(neumann_unit, 1.1, t)[0], rel=1e-12)


@given(st.floats(0, 5), st.floats(0, 5))
def test_mean_energy_nondecreasing(t1, t2):
    dom = Domain(1.0, NEUMANN, 1.0)
    lo, hi = sorted((t1, t2))
    assert an.mean_energy_exact(dom, 1.0, lo) <= an.mean_energy_exact(dom, 1.0, hi) + 1e-15


def test_corr_body_examples(neumann_unit):
    r = np.array([0.0, 0.1, 0.3])
    c = an.corr_body(neumann_unit, 1.0, 0.2, r)
    assert c[0] == pytest.approx(an.mean_energy_series(neumann_unit, 1.0, 0.2)[0], rel=1e-13)
    assert np.allclose(c, an.corr_body(neumann_unit, 1.0, 0.2, -r), rtol=1e-14)
    far = an.corr_body_exact(Domain(np.pi, NEUMANN, 1.0), 1.0, 1e4, [np.pi])[0]
    assert far == pytest.approx(-np.pi / 24, rel=1e-10)


def _boundary_correlation_by_quadrature(basis, alpha, t, r):
    """``(1/L) int_0^L E[(Z - Zbar)(x) (Z - Zbar)(x + r)] dx`` from the exact mode
    covariance, integrating the even extension on a fine grid."""
    L = basis.domain.length
    S = an.linear_covariance(basis, nz.NoiseSpec.boundary(alpha), t)[1:, 1:]
    k = basis.wavenumbers[1:]
    x = np.linspace(0, L, 8001)
    w = simpson_weights(x.size, 0, L)
    E = np.sqrt(2 / L) * np.cos(np.pi * np.outer(x, k) / L)
    out = []
    for rr in np.atleast_1d(r):
        Er = np.sqrt(2 / L) * np.cos(np.pi * np.outer(x + rr, k) / L)
        out.append(w @ np.einsum("xk,kl,xl->x", E, S, Er) / L)
    return np.array(out)


@pytest.mark.parametrize("L,t", [(1.0, 0.01), (1.0, 1.0), (2.0, 0.05)])
def test_boundary_correlation_matches_quadrature(L, t):
    b = build_basis(Domain(L, NEUMANN, 1.0), 24)
    r = np.array([-0.3, -0.05, 0.0, 0.1, 0.25, 0.6]) * L
    quad = _boundary_correlation_by_quadrature(b, 1.3, t, r)
    assert np.allclose(an.corr_boundary(b, 1.3, t, r), quad, rtol=1e-8, atol=1e-12)


def test_boundary_correlation_examples():
    dom = Domain(1.0, NEUMANN, 1.0)
    b = build_basis(dom, 128)
    r = np.linspace(0, 0.5, 41)
    cz = an.corr_boundary(b, 1.0, 1.0, r)
    sigma = an.matched_sigma(1.0, dom)
    assert cz[0] == pytest.approx(an.mean_energy_series(b, sigma, 1.0)[0], rel=1e-13)
    sym = 0.5 * (cz + an.corr_boundary(b, 1.0, 1.0, -r))
    assert np.allclose(sym, an.corr_body(b, sigma, 1.0, r), atol=1e-13)
    assert np.max(np.abs(cz - an.corr_body(b, sigma, 1.0, r))) > 1e-3


@given(st.floats(1e-4, 3.0), st.floats(-1.0, 1.0))
def test_averaged_boundary_correlation_equals_body(t, r):
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 32)
    sigma = an.matched_sigma(1.0, b.domain)
    avg = 0.5 * (an.corr_boundary(b, 1.0, t, [r]) + an.corr_boundary(b, 1.0, t, [-r]))
    assert avg[0] == pytest.approx(an.corr_body(b, sigma, t, [r])[0], abs=1e-13)


def test_scaling_G_examples():
    assert an.scaling_G(0.0) == pytest.approx(np.sqrt(np.pi / 2), abs=1e-10)
    assert abs(an.scaling_G(50.0)) < 1e-2
    with pytest.raises(ValueError):
        an.scaling_G(-1.0)


@pytest.mark.parametrize("x", [0.3, 1.0, 2.0, 3.5, 6.0])
def test_scaling_G_matches_gaussian_integral(x):
    assert an.scaling_G(x) == pytest.approx(g_gaussian(x), abs=1e-8)


def test_G_is_positive_so_near_zero_is_a_threshold_crossing():
    xs = np.linspace(0, 12, 25)
    assert all(g_gaussian(x) > 0 for x in xs)


@pytest.mark.parametrize("threshold", sorted(X_G))
def test_g_near_zero_frozen(threshold):
    assert an.g_near_zero(threshold) == pytest.approx(X_G[threshold], abs=2e-5)
    g0 = g_gaussian(0.0)
    ref = optimize.brentq(lambda x: g_gaussian(x) / g0 - threshold, 0.1, 10, xtol=1e-12)
    assert an.g_near_zero(threshold) == pytest.approx(ref, abs=1e-6)


def test_scaling_F_examples():
    assert an.scaling_F(0.0) == pytest.approx(1 / 6)
    assert an.F_ZERO == pytest.approx(0.42264973081037427)
    assert an.scaling_F(an.F_ZERO) == pytest.approx(0.0, abs=1e-15)
    assert an.scaling_F(1.0) == pytest.approx(-1 / 12)
    x = np.linspace(0, 2, 17)
    assert np.allclose(an.scaling_F(x), an.scaling_F_series(x), atol=1e-5)
    assert np.allclose(an.scaling_F(x + 2), an.scaling_F(x))


def test_corr_boundary_infinity_examples():
    alpha, nu, L = 1.4, 0.7, 2.0
    assert an.corr_boundary_infinity(alpha, nu, L, 0.0) == pytest.approx(alpha ** 2 / (6 * nu))
    assert an.corr_boundary_infinity(alpha, nu, L, an.F_ZERO * L) == pytest.approx(0, abs=1e-14)
    dom = Domain(L, NEUMANN, nu)
    sigma = an.matched_sigma(alpha, dom)
    for t in (0.05, 0.3, 1.0):
        gap = abs(an.mean_energy_exact(dom, sigma, t) - alpha ** 2 / (6 * nu))
        assert gap <= an.corr_infinity_bound(alpha, nu, L, t)
    assert an.corr_infinity_bound(alpha, nu, L, 0.0) == pytest.approx(alpha ** 2 / (6 * nu))


def test_stationary_profile_matches_long_time_series():
    dom = Domain(1.0, NEUMANN, 1.0)
    r = np.linspace(0, 1, 11)
    rho_stat = an.corr_boundary_infinity(1.0, 1.0, 1.0, r) * 6
    assert np.allclose(an.normalized_correlation_exact(dom, 50.0, r), rho_stat, atol=1e-12)


def test_first_near_zero_examples():
    r = np.linspace(0, 1, 2001)
    rho = an.scaling_F(r) / an.scaling_F(0.0)
    assert an.first_near_zero(r, rho, 1e-3) == pytest.approx(0.42265, abs=1e-4)
    assert an.first_near_zero(r, np.ones_like(r), 0.1) is None
    with pytest.raises(ValueError):
        an.first_near_zero(r, rho, 0.0)
    with pytest.raises(ValueError):
        an.first_near_zero(r[::-1], rho, 0.1)


def test_first_near_zero_interpolates_threshold_crossing():
    r = np.array([0.0, 1.0, 2.0])
    assert an.first_near_zero(r, np.array([1.0, 0.6, 0.2]), 0.5) == pytest.approx(1.25)


def test_small_time_length_scale_tracks_G():
    dom = Domain(1.0, NEUMANN, 1.0)
    t = 1e-4
    r = np.linspace(0, 8 * np.sqrt(t), 4001)
    rho = an.normalized_correlation_exact(dom, t, r)
    ratio = an.first_near_zero(r, rho, 0.2) / np.sqrt(t)
    assert ratio == pytest.approx(X_G[0.2], rel=0.10)


@given(st.floats(1e-5, 10.0))
def test_normalized_correlation_bounds(t):
    dom = Domain(1.0, NEUMANN, 1.0)
    r = np.linspace(0, 1, 21)
    rho = an.normalized_correlation_exact(dom, t, r)
    assert rho[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.abs(rho) <= 1 + 1e-12)


def test_variance_profile_roughness_contrast(neumann_unit):
    # boundary forcing concentrates variance near x = 0, body forcing spreads it out
    x = np.linspace(0, 1, 11)
    vz = an.variance_profile(neumann_unit, nz.NoiseSpec.boundary(1.0), 1.0, x)
    vw = an.variance_profile(neumann_unit, nz.NoiseSpec.body(np.sqrt(2)), 1.0, x)
    assert vz[0] > 3 * vz[5]
    assert vw.max() / vw[1:-1].min() < 3


def test_neumann_only():
    from stochburgers.spectral import DIRICHLET
    b = build_basis(Domain(1.0, DIRICHLET, 1.0), 8)
    with pytest.raises(ConfigurationError):
        an.corr_body(b, 1.0, 1.0, [0.0])
