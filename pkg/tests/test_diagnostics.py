import numpy as np
import pytest

from conftest import simpson_weights
from stochburgers import diagnostics as dg
from stochburgers import noise as nz
from stochburgers.analytic import first_near_zero
from stochburgers.linear import EnsembleRun, simulate_linear_ensemble
from stochburgers.spectral import DIRICHLET, NEUMANN, ConfigurationError, Domain, build_basis

X_G_02 = 2.04524


def _run(basis, coeffs, times=None, **kw):
    coeffs = np.asarray(coeffs, dtype=float)
    times = np.arange(coeffs.shape[1], dtype=float) if times is None else np.asarray(times)
    return EnsembleRun(basis, times, coeffs, 0, **kw)


def _extended_field(basis, a, x):
    """Field values at arbitrary ``x`` through the natural periodic extension
    of the mode formulas (even for cosines, odd for sines)."""
    L = basis.domain.length
    w = basis.frequencies
    if basis.domain.bc == NEUMANN:
        E = np.cos(np.outer(x, w)) * np.sqrt(2 / L)
        E[:, basis.wavenumbers == 0] = 1 / np.sqrt(L)
    else:
        E = np.sin(np.outer(x + L, w)) / np.sqrt(L)
    return E @ a


def _correlation_by_quadrature(basis, a, r):
    lo, hi = basis.domain.interval
    x = np.linspace(lo, hi, 20_001)
    w = simpson_weights(x.size, lo, hi)
    u = _extended_field(basis, a, x)
    ubar = w @ u / (hi - lo)
    return np.array([w @ ((u - ubar) * (_extended_field(basis, a, x + rr) - ubar)) / (hi - lo)
                     for rr in r])


@pytest.mark.parametrize("bc,L", [(NEUMANN, 1.0), (NEUMANN, 2.0), (DIRICHLET, 1.0), (DIRICHLET, 0.7)])
def test_correlation_samples_match_quadrature(bc, L):
    b = build_basis(Domain(L, bc, 1.0), 12)
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 1, b.n_modes)) / (1 + b.wavenumbers)
    r = np.array([-0.4, -0.1, 0.0, 0.05, 0.3, 0.9]) * L
    table = dg.ensemble_correlation(_run(b, a), r)
    quad = np.mean([_correlation_by_quadrature(b, a[i, 0], r) for i in range(2)], axis=0)
    assert np.allclose(table.values[0], quad, atol=1e-9)


def test_constant_field_has_zero_energy_and_correlation():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 8)
    a = np.zeros((3, 2, 9))
    a[:, :, 0] = 2.5
    run = _run(b, a)
    assert np.allclose(dg.ensemble_mean_energy(run).estimate, 0)
    assert np.allclose(dg.ensemble_correlation(run, [0.0, 0.2]).values, 0)
    assert dg.ensemble_norm_squared(run).estimate[0] == pytest.approx(2.5 ** 2)


@pytest.mark.parametrize("bc", [NEUMANN, DIRICHLET])
def test_zero_offset_equals_mean_energy_and_parity(bc):
    b = build_basis(Domain(1.0, bc, 1.0), 16)
    rng = np.random.default_rng(5)
    run = _run(b, rng.standard_normal((20, 3, b.n_modes)) / (1 + b.wavenumbers))
    r = np.linspace(-0.5, 0.5, 11)
    table = dg.ensemble_correlation(run, r)
    energy = dg.ensemble_mean_energy(run).estimate
    assert np.allclose(table.values[:, 5], energy, rtol=1e-12)
    assert np.allclose(table.averaged, table.averaged[:, ::-1], atol=1e-12)
    assert np.allclose(table.odd, -table.odd[:, ::-1], atol=1e-12)
    assert np.allclose(table.normalized[:, 5], 1.0)


def test_shift_operator_zero_offset_is_identity():
    for bc in (NEUMANN, DIRICHLET):
        b = build_basis(Domain(1.0, bc, 1.0), 10)
        cos_w, sin_w, S, _ = dg.shift_operators(b, [0.0])
        assert np.allclose(cos_w, 1) and np.allclose(sin_w, 0)
        assert np.all(np.diag(S) == 0)


def test_standard_error_scales_like_inverse_root_m():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 16)
    spec = nz.NoiseSpec.body(1.0)
    small = dg.ensemble_mean_energy(simulate_linear_ensemble(b, spec, [0.1], 2000, 1))
    large = dg.ensemble_mean_energy(simulate_linear_ensemble(b, spec, [0.1], 8000, 2))
    assert small.stderr[-1] / large.stderr[-1] == pytest.approx(2.0, rel=0.1)


def test_antithetic_pairs_are_one_unit():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 4)
    run = _run(b, np.random.default_rng(0).standard_normal((6, 2, 5)), antithetic=True)
    res = dg.ensemble_mean_energy(run)
    assert res.samples.shape[0] == 3
    with pytest.raises(ConfigurationError):
        dg.EnsembleResult(np.zeros(1), "x", np.zeros(1), np.zeros(1), 1)


def test_blown_up_trajectories_are_dropped():
    b = build_basis(Domain(1.0, NEUMANN, 1.0), 4)
    a = np.random.default_rng(0).standard_normal((4, 2, 5))
    a[1, 1] = np.nan
    res = dg.ensemble_mean_energy(_run(b, a))
    assert np.all(np.isfinite(res.estimate)) and res.samples.shape[0] == 3
    a[2:, 1] = np.nan
    a[0, 1] = np.nan
    with pytest.raises(ArithmeticError):
        dg.ensemble_mean_energy(_run(b, a))


def test_power_law_fit_examples():
    t = np.geomspace(1e-3, 1, 20)
    fit = dg.fit_power_law((t, 7 * np.sqrt(t)))
    assert fit.exponent == pytest.approx(0.5, abs=1e-12)
    assert fit.prefactor == pytest.approx(7.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    curve = dg.fit_power_law(lambda s: 3 * s ** 1.5, window=(1e-2, 1.0))
    assert curve.exponent == pytest.approx(1.5, abs=1e-12) and curve.n_points == 41
    with pytest.raises(ValueError):
        dg.fit_power_law(lambda s: s, window=(1.0, 0.5))
    with pytest.raises(ArithmeticError):
        dg.fit_power_law((t, t - 0.5))


def test_exponential_rate_fit():
    t = np.linspace(0, 1, 11)
    samples = np.exp(-3 * t) * np.random.default_rng(1).uniform(0.9, 1.1, (400, 1))
    res = dg.EnsembleResult(t, "norm_squared", samples.mean(0),
                            samples.std(0, ddof=1) / 20, 400, samples=samples)
    rate, se = dg.fit_exponential_rate(res)
    assert rate == pytest.approx(-3.0, abs=1e-10)
    assert se < 1e-10


def _norm_result(t, values, se=None):
    values = np.asarray(values, dtype=float)
    se = np.zeros_like(values) if se is None else np.asarray(se, dtype=float)
    return dg.EnsembleResult(np.asarray(t, dtype=float), "norm_squared", values, se, 10)


def test_additive_bound_trivial_cases():
    dom = Domain(1.0, DIRICHLET, 0.5)
    t = np.linspace(0, 2, 5)
    assert dg.check_additive_bound(_norm_result(t, np.zeros(5)), 0.0, 1.0, dom).passed
    c = dom.poincare_constant
    level = c * 1.0 / (2 * 0.5)
    over = dg.check_additive_bound(_norm_result(t, np.full(5, 2 * level)), 1.0, 1.0, dom,
                                   initial_norm_sq=0.0)
    assert not over.passed
    with pytest.raises(ConfigurationError):
        dg.check_additive_bound(dg.EnsembleResult(t, "mean_energy", np.zeros(5), np.zeros(5), 10),
                                1.0, 1.0, dom)


def test_multiplicative_bound_and_rate():
    dom = Domain(1.0, DIRICHLET, 1.0)
    rate = 0.5 - 2 / dom.poincare_constant
    t = np.linspace(0, 1, 11)
    check = dg.check_multiplicative_bound(_norm_result(t, np.exp((rate - 0.1) * t)),
                                          np.sqrt(0.5), 1.0, dom)
    assert check.passed and check.rate_ok
    assert check.fitted_rate == pytest.approx(rate - 0.1)
    worse = dg.check_multiplicative_bound(_norm_result(t, np.exp((rate + 0.1) * t)),
                                          np.sqrt(0.5), 1.0, dom)
    assert not worse.passed and not worse.rate_ok


def test_windowed_max_check():
    t = np.linspace(0, 8, 33)
    assert dg.windowed_max_check(_norm_result(t, np.ones_like(t))).passed
    assert not dg.windowed_max_check(_norm_result(t, t)).passed
    noisy = dg.windowed_max_check(_norm_result(t, 1 + 0.01 * np.sin(t), np.full_like(t, 0.01)))
    assert noisy.passed
    with pytest.raises(ValueError):
        dg.windowed_max_check(_norm_result([0.0, 8.0], [1.0, 1.0]))


def test_transient_null_is_inconclusive():
    t = np.geomspace(1e-4, 1e-2, 9)
    zero = dg.EnsembleResult(t, "energy_difference", np.zeros(9), np.full(9, 1e-3), 100)
    assert dg.transient_compare(zero).inconclusive
    noise = np.random.default_rng(0).standard_normal(9) * 1e-3
    res = dg.EnsembleResult(t, "energy_difference", noise, np.full(9, 1e-3), 100)
    out = dg.transient_compare(res)
    assert out.inconclusive and not out.supports_claim


def test_transient_detects_superlinear_difference():
    t = np.geomspace(1e-4, 1e-2, 9)
    res = dg.EnsembleResult(t, "energy_difference", -2 * t ** 1.5, 1e-3 * t ** 1.5, 100)
    out = dg.transient_compare(res)
    assert not out.inconclusive and out.supports_claim
    assert out.fit.exponent == pytest.approx(1.5)
    mean = dg.EnsembleResult(t, "mean_energy", t + t ** 2, 1e-3 * t ** 2, 100)
    assert dg.transient_compare(mean, lambda s: s).fit.exponent == pytest.approx(2.0)
    with pytest.raises(ValueError):
        dg.transient_compare(mean)


def test_upper_envelope_covers_values():
    t = np.geomspace(1e-3, 1, 10)
    vals = t ** 2 * (1 + 0.3 * np.sin(7 * np.log(t)))
    fit = dg.fit_power_law((t, vals))
    env = dg.upper_envelope(fit, t, vals)
    assert env.exponent == fit.exponent
    assert np.all(env.prefactor * t ** env.exponent >= np.abs(vals) * (1 - 1e-12))


def test_small_time_length_scale_and_missing_zero():
    dom = Domain(1.0, NEUMANN, 1.0)
    t = 1e-4
    ell = dg.length_scale_exact(dom, t, 0.2, r_max=0.1)
    assert ell / np.sqrt(t) == pytest.approx(X_G_02, rel=0.1)
    r = np.linspace(0, 1, 5)
    assert first_near_zero(r, np.ones(5), 0.5) is None
