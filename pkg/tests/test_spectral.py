import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import simpson_weights
from stochburgers.spectral import (DIRICHLET, NEUMANN, ConfigurationError, Domain,
                                   SpectralField, build_basis, evaluate_field, neumann_map,
                                   neumann_map_profile, semigroup_apply)


# frozen eigen-data
def test_neumann_first_eigenpair():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 1)
    assert b.eigenvalues[1] == pytest.approx(-9.869604401089358, rel=1e-14)
    assert b.boundary_values[1] == pytest.approx(np.sqrt(2), rel=1e-14)
    assert b.eigenvalues[0] == 0.0
    assert b.boundary_values[0] == pytest.approx(1.0)


def test_dirichlet_first_eigenvalue():
    b = build_basis(Domain(1.0, DIRICHLET, 1.0, 0.0), 3)
    assert b.wavenumbers[0] == 1
    assert b.eigenvalues[0] == pytest.approx(-2.4674011002723395, rel=1e-14)


def test_hyperviscous_eigenvalues_carry_viscosity():
    b = build_basis(Domain(2.0, DIRICHLET, 0.3, 0.5), 4)
    k = np.arange(1, 5)
    assert np.allclose(b.eigenvalues, -0.3 * (np.pi * k / 4.0) ** 3, rtol=1e-14)


def test_dirichlet_basis_vanishes_at_ends_and_is_orthonormal():
    b = build_basis(Domain(1.5, DIRICHLET, 1.0), 16)
    ends = b.eigenfunctions(np.array([-1.5, 1.5]))
    assert np.abs(ends).max() < 1e-14
    x = np.linspace(-1.5, 1.5, 4001)
    E = b.eigenfunctions(x)
    gram = E.T @ (E * simpson_weights(x.size, -1.5, 1.5)[:, None])
    assert np.allclose(gram, np.eye(16), atol=1e-10)


def test_neumann_basis_is_orthonormal():
    b = build_basis(Domain(2.0, NEUMANN, 1.0), 16)
    x = np.linspace(0, 2.0, 4001)
    E = b.eigenfunctions(x)
    gram = E.T @ (E * simpson_weights(x.size, 0, 2.0)[:, None])
    assert np.allclose(gram, np.eye(17), atol=1e-10)


@pytest.mark.parametrize("kwargs", [dict(length=0.0), dict(length=1.0, viscosity=-1.0),
                                    dict(length=1.0, hyper_eps=-0.1),
                                    dict(length=1.0, bc="periodic")])
def test_invalid_domain(kwargs):
    with pytest.raises(ConfigurationError):
        Domain(**kwargs)


def test_nonpositive_mode_count():
    with pytest.raises(ConfigurationError):
        build_basis(Domain(1.0), 0)


def test_basis_invariants_hold():
    for dom in (Domain(1.0, NEUMANN, 2.0), Domain(3.0, DIRICHLET, 0.1, 0.25)):
        b = build_basis(dom, 50)
        assert np.all(np.diff(b.eigenvalues) < 0)
        nonzero = b.wavenumbers > 0
        assert np.all(b.eigenvalues[nonzero] < 0)


def test_semigroup_examples():
    b = build_basis(Domain(1.0, NEUMANN, 1 / np.pi ** 2), 3)
    # lambda_1 = -1 for nu = 1 / pi^2
    f = SpectralField.single_mode(b, 1)
    assert semigroup_apply(f, np.log(2)).coeffs[1] == pytest.approx(0.5, rel=1e-14)
    g = SpectralField(b, np.array([1.0, 2.0, 3.0, 4.0]))
    assert np.array_equal(semigroup_apply(g, 0.0).coeffs, g.coeffs)
    late = semigroup_apply(g, 200.0).coeffs
    assert late[0] == 1.0 and np.abs(late[1:]).max() < 1e-80
    with pytest.raises(ValueError):
        semigroup_apply(g, -1.0)


@given(st.floats(0, 2), st.floats(0, 2),
       st.lists(st.floats(-5, 5), min_size=9, max_size=9))
def test_semigroup_composes(s, t, coeffs):
    b = build_basis(Domain(1.0, NEUMANN, 0.3), 8)
    f = SpectralField(b, np.array(coeffs))
    two = semigroup_apply(semigroup_apply(f, s), t).coeffs
    one = semigroup_apply(f, s + t).coeffs
    assert np.allclose(two, one, rtol=1e-13, atol=1e-300)


def test_evaluate_field_examples():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 4)
    x = np.linspace(0, 1, 7)
    assert np.all(evaluate_field(SpectralField.zeros(b), x) == 0)
    const = SpectralField.single_mode(b, 0, 1.0)
    assert np.allclose(evaluate_field(const, x), 1.0)
    assert evaluate_field(SpectralField.single_mode(b, 1), [0.0])[0] == pytest.approx(np.sqrt(2))
    with pytest.raises(ValueError):
        evaluate_field(const, [1.5])


def test_field_rejects_bad_coefficients():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 4)
    with pytest.raises(ConfigurationError):
        SpectralField(b, np.zeros(3))
    with pytest.raises(ValueError):
        SpectralField(b, np.array([0, 1, np.nan, 0, 0.0]))


@given(st.integers(1, 256), st.integers(0, 2 ** 32 - 1), st.sampled_from([NEUMANN, DIRICHLET]))
def test_parseval(n, seed, bc):
    b = build_basis(Domain(1.0, bc, 1.0), n)
    rng = np.random.default_rng(seed)
    f = SpectralField(b, rng.standard_normal(b.n_modes) / np.sqrt(1 + b.wavenumbers))
    lo, hi = b.domain.interval
    x = np.linspace(lo, hi, max(8 * n, 64) + 1)
    u = evaluate_field(f, x)
    grid_norm = np.sqrt(simpson_weights(x.size, lo, hi) @ (u * u))
    assert grid_norm == pytest.approx(f.norm(), rel=1e-6)


def _quad_pairing(gamma, dom, k):
    """<D(gamma), (1 - A) e_k> by Simpson quadrature of the closed form."""
    x = np.linspace(0, dom.length, 10_001)
    b = build_basis(dom, max(k, 1))
    e = b.eigenfunctions(x)[:, k]
    one_minus_A_e = (1 - b.eigenvalues[k]) * e
    return simpson_weights(x.size, 0, dom.length) @ (neumann_map_profile(gamma, dom, x) * one_minus_A_e)


def test_neumann_map_duality_unit_viscosity():
    dom = Domain(1.0, NEUMANN, 1.0)
    assert _quad_pairing(1.0, dom, 0) == pytest.approx(-1.0, abs=1e-9)
    b = build_basis(dom, 8)
    for k in range(1, 9):
        assert abs(_quad_pairing(1.0, dom, k) + b.boundary_values[k]) < 1e-6


def test_neumann_map_matches_unit_viscosity_closed_form():
    # (e^x + e^{2L} e^{-x}) / (1 - e^{2L}) gamma
    L, gamma = 1.3, 0.7
    x = np.linspace(0, L, 11)
    ref = (np.exp(x) + np.exp(2 * L) * np.exp(-x)) / (1 - np.exp(2 * L)) * gamma
    assert np.allclose(neumann_map_profile(gamma, Domain(L, NEUMANN, 1.0), x), ref, rtol=1e-13)


def test_neumann_map_general_viscosity():
    dom = Domain(2.0, NEUMANN, 0.25)
    gamma = 1.5
    # boundary derivatives and (1 - A) D = 0 by finite differences
    h = 1e-5
    d0 = (neumann_map_profile(gamma, dom, h) - neumann_map_profile(gamma, dom, 0.0)) / h
    dL = (neumann_map_profile(gamma, dom, 2.0) - neumann_map_profile(gamma, dom, 2.0 - h)) / h
    assert d0 == pytest.approx(gamma, rel=1e-4)
    assert abs(dL) < 1e-4
    x = np.linspace(0.2, 1.8, 9)
    h = 1e-3
    D = neumann_map_profile(gamma, dom, x)
    Dxx = (neumann_map_profile(gamma, dom, x + h) - 2 * D + neumann_map_profile(gamma, dom, x - h)) / h ** 2
    assert np.allclose(D - dom.viscosity * Dxx, 0, atol=1e-5)
    b = build_basis(dom, 6)
    for k in range(7):
        assert _quad_pairing(gamma, dom, k) == pytest.approx(
            -dom.viscosity * gamma * b.boundary_values[k], abs=1e-8)


def test_neumann_map_projection():
    dom = Domain(1.0, NEUMANN, 1.0)
    assert np.all(neumann_map(0.0, dom).coeffs == 0)
    f = neumann_map(1.0, dom, 256)
    x = np.linspace(0.05, 1.0, 20)
    # cosine series of a function with a derivative jump at the boundary converges like 1/N
    assert np.allclose(evaluate_field(f, x), neumann_map_profile(1.0, dom, x), atol=5e-3)
    with pytest.raises(ConfigurationError):
        neumann_map(1.0, Domain(1.0, DIRICHLET, 1.0))


def test_large_domain_neumann_map_is_finite():
    dom = Domain(500.0, NEUMANN, 0.01)
    assert np.all(np.isfinite(neumann_map_profile(1.0, dom, np.linspace(0, 500, 11))))
