"""Monte Carlo estimators, scaling fits and energy-bound checks.

Per-trajectory statistics are formed first and reduced in trajectory
order, so every estimate is reproducible bit for bit. With antithetic
ensembles the two members of each pair are averaged before the reduction
and the pair is the independent unit for standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import CorrelationTable, first_near_zero, normalized_correlation_exact
from .linear import EnsembleRun
from .spectral import NEUMANN, ConfigurationError, Domain, SpectralBasis

__all__ = [
    "EnsembleResult",
    "ScalingFit",
    "BoundCheck",
    "GrowthCheck",
    "TransientFit",
    "energy_samples",
    "ensemble_mean_energy",
    "ensemble_norm_squared",
    "energy_difference",
    "ensemble_correlation",
    "correlation_difference",
    "shift_operators",
    "fit_power_law",
    "fit_exponential_rate",
    "check_additive_bound",
    "check_multiplicative_bound",
    "windowed_max_check",
    "transient_compare",
    "upper_envelope",
    "envelope_check",
    "length_scale_exact",
]


@dataclass
class EnsembleResult:
    """Time series of an ensemble statistic with its standard error.

    ``samples`` keeps the independent per-trajectory (or per-pair) values
    the estimate was averaged from.
    """

    times: np.ndarray
    kind: str
    estimate: np.ndarray
    stderr: np.ndarray
    n_trajectories: int
    master_seed: int | None = None
    config_digest: str = ""
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_trajectories < 2:
            raise ConfigurationError("ensemble statistics need at least two trajectories")
        if np.any(self.stderr < 0):
            raise ValueError("standard errors must be nonnegative")


@dataclass
class ScalingFit:
    window: tuple[float, float]
    exponent: float
    prefactor: float
    r_squared: float
    exponent_stderr: float = 0.0
    n_points: int = 0


@dataclass
class BoundCheck:
    times: np.ndarray
    bound: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    slack: float
    violations: np.ndarray
    fitted_rate: float | None = None
    rate_stderr: float | None = None
    bound_rate: float | None = None

    @property
    def passed(self) -> bool:
        return not bool(np.any(self.violations))

    @property
    def rate_ok(self) -> bool | None:
        """Fitted rate within ``slack`` standard errors of the bound rate."""
        if self.fitted_rate is None:
            return None
        tol = self.slack * self.rate_stderr + 1e-8 * abs(self.bound_rate)
        return self.fitted_rate <= self.bound_rate + tol


@dataclass
class GrowthCheck:
    early_max: float
    late_max: float
    slack: float

    @property
    def growth(self) -> float:
        return self.late_max - self.early_max

    @property
    def passed(self) -> bool:
        return self.growth <= self.slack


@dataclass
class TransientFit:
    fit: ScalingFit
    times: np.ndarray
    difference: np.ndarray
    stderr: np.ndarray
    inconclusive: bool

    @property
    def supports_claim(self) -> bool:
        """Exponent above 1/2 by more than two standard errors."""
        return (not self.inconclusive) and self.fit.exponent - 2 * self.fit.exponent_stderr > 0.5


def _independent_units(values: np.ndarray, antithetic: bool) -> np.ndarray:
    if antithetic:
        return values.reshape((values.shape[0] // 2, 2) + values.shape[1:]).mean(axis=1)
    return values


def _summarize(values: np.ndarray, antithetic: bool):
    units = _independent_units(values, antithetic)
    finite = np.all(np.isfinite(units.reshape(units.shape[0], -1)), axis=1)
    units = units[finite]
    if units.shape[0] < 2:
        raise ArithmeticError("fewer than two finite trajectories")
    est = units.mean(axis=0)
    se = units.std(axis=0, ddof=1) / np.sqrt(units.shape[0])
    return est, se, units


def _mean_free(basis: SpectralBasis, coeffs: np.ndarray):
    """Coefficients with the Neumann constant removed, and the spatial mean."""
    a = np.asarray(coeffs, dtype=float)
    size = basis.domain.size
    if basis.domain.bc == NEUMANN:
        a = a.copy()
        a[..., basis.wavenumbers == 0] = 0.0
        return a, np.zeros(a.shape[:-1])
    return a, (a @ basis.mode_integrals()) / size


def energy_samples(basis: SpectralBasis, coeffs: np.ndarray, subtract_mean: bool = True,
                   normalize: bool = True) -> np.ndarray:
    """``||u - ubar||^2 / |D|`` (or ``||u||^2``, optionally unnormalized) per snapshot."""
    coeffs = np.asarray(coeffs, dtype=float)
    size = basis.domain.size
    if subtract_mean:
        a, ubar = _mean_free(basis, coeffs)
        sq = np.sum(a * a, axis=-1)
        if basis.domain.bc != NEUMANN:
            sq = sq - size * ubar ** 2
    else:
        sq = np.sum(coeffs * coeffs, axis=-1)
    return sq / size if normalize else sq


def _result(run: EnsembleRun, kind: str, values: np.ndarray, digest: str) -> EnsembleResult:
    est, se, units = _summarize(values, run.antithetic)
    return EnsembleResult(np.asarray(run.times), kind, est, se, run.n_trajectories,
                          run.master_seed, digest, units)


def ensemble_mean_energy(run: EnsembleRun, subtract_mean: bool = True,
                         config_digest: str = "") -> EnsembleResult:
    """Mean energy ``E ||u - ubar||^2 / |D|`` at each output time."""
    vals = energy_samples(run.basis, run.coeffs, subtract_mean)
    return _result(run, "mean_energy", vals, config_digest)


def ensemble_norm_squared(run: EnsembleRun, config_digest: str = "") -> EnsembleResult:
    """``E ||u||^2`` (unnormalized, mean kept), the quantity the energy bounds control."""
    vals = energy_samples(run.basis, run.coeffs, subtract_mean=False, normalize=False)
    return _result(run, "norm_squared", vals, config_digest)


def energy_difference(run: EnsembleRun, config_digest: str = "") -> EnsembleResult:
    """``E_u - E_Phi`` estimated pathwise against the linear companion.

    The companion shares every noise increment with ``u``, so the paired
    difference has far smaller variance than either mean energy.
    """
    if run.companion is None:
        raise ConfigurationError("run has no linear companion")
    vals = (energy_samples(run.basis, run.coeffs) - energy_samples(run.basis, run.companion))
    return _result(run, "energy_difference", vals, config_digest)


def shift_operators(basis: SpectralBasis, r):
    """Pieces of ``int_D e_k(x) e_l(x + r) dx = delta_kl cos(w_l r) + S_kl sin(w_l r)``.

    Returns ``(cos_w, sin_w, S, m_shift)`` where ``cos_w[l, j] = cos(w_l r_j)``,
    ``sin_w`` likewise and ``m_shift[l, j] = int_D e_l(x + r_j) dx`` for the
    periodic extension (even for Neumann, odd for Dirichlet).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    w = basis.frequencies
    k = basis.wavenumbers.astype(float)
    K, Lm = np.meshgrid(k, k, indexing="ij")
    odd = (K + Lm) % 2 == 1
    S = np.zeros_like(K)
    if basis.domain.bc == NEUMANN:
        S[odd] = -2 * Lm[odd] * 2 / (np.pi * (Lm[odd] ** 2 - K[odd] ** 2))
        S[(K == 0) | (Lm == 0)] = 0.0
        m_shift = np.zeros((k.size, r.size))
    else:
        S[odd] = 2 * K[odd] * 2 / (np.pi * (K[odd] ** 2 - Lm[odd] ** 2))
        L = basis.domain.length
        m_shift = (np.cos(np.outer(w, r)) * ((1 - (-1.0) ** k) / w)[:, None]) / np.sqrt(L)
    return np.cos(np.outer(w, r)), np.sin(np.outer(w, r)), S, m_shift


def _correlation_samples(basis: SpectralBasis, coeffs: np.ndarray, r: np.ndarray):
    """Per-snapshot even and odd parts of ``C(r)`` (before averaging)."""
    cos_w, sin_w, S, m_shift = shift_operators(basis, r)
    a, ubar = _mean_free(basis, coeffs)
    size = basis.domain.size
    even = (a * a) @ cos_w
    if basis.domain.bc != NEUMANN:
        even -= ubar[..., None] * (a @ m_shift)
    odd = ((a @ S) * a) @ sin_w
    return even / size, odd / size


def _table(run: EnsembleRun, r: np.ndarray, even: np.ndarray, odd: np.ndarray) -> CorrelationTable:
    full = even + odd
    C, C_se, _ = _summarize(full, run.antithetic)
    Ch, Ch_se, _ = _summarize(even, run.antithetic)
    _, odd_se, _ = _summarize(odd, run.antithetic)
    e0, _ = _correlation_samples(run.basis, run.coeffs, np.zeros(1))
    zero, _, _ = _summarize(e0[..., 0], run.antithetic)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(zero[:, None] > 0, Ch / zero[:, None], np.nan)
    return CorrelationTable(np.asarray(run.times), r, C, Ch, rho, C_se, Ch_se, odd_se,
                            run.n_trajectories)


def ensemble_correlation(run: EnsembleRun, r_grid) -> CorrelationTable:
    """Estimate ``C(t, r)``, ``C_hat(t, r)`` and ``rho(t, r)`` on ``r_grid``.

    Offsets are handled through the periodic extension of the mode
    expansion, so any real ``r`` is accepted.
    """
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))
    even, odd = _correlation_samples(run.basis, run.coeffs, r)
    return _table(run, r, even, odd)


def correlation_difference(run: EnsembleRun, r_grid) -> CorrelationTable:
    """``C_u - C_Phi`` against the linear companion, estimated pathwise."""
    if run.companion is None:
        raise ConfigurationError("run has no linear companion")
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))
    eu, ou = _correlation_samples(run.basis, run.coeffs, r)
    ep, op = _correlation_samples(run.basis, run.companion, r)
    table = _table(run, r, eu - ep, ou - op)
    table.normalized = np.full_like(table.averaged, np.nan)
    return table


def _series(series, window, n_points: int):
    if isinstance(series, EnsembleResult):
        t, y = series.times, series.estimate
    elif callable(series):
        if window is None:
            raise ValueError("an analytic curve needs a window")
        t = np.geomspace(window[0], window[1], n_points)
        y = np.array([series(ti) for ti in t])
    else:
        t, y = (np.asarray(v, dtype=float) for v in series)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        lo, hi = window
        if not lo < hi:
            raise ValueError("window must satisfy t_min < t_max")
        keep = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
        t, y = t[keep], y[keep]
    return t, y


def _ols(x: np.ndarray, y: np.ndarray):
    xm = x - x.mean()
    sxx = np.sum(xm * xm)
    slope = np.sum(xm * (y - y.mean())) / sxx
    intercept = y.mean() - slope * x.mean()
    resid = y - (intercept + slope * x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    se = np.sqrt(np.sum(resid ** 2) / (x.size - 2) / sxx) if x.size > 2 else 0.0
    return slope, intercept, min(max(r2, 0.0), 1.0), se


def fit_power_law(series, window=None, n_points: int = 41) -> ScalingFit:
    """Least-squares line through ``(log t, log E)``.

    ``series`` is an :class:`EnsembleResult`, a pair ``(t, values)`` or a
    callable ``E(t)`` sampled at ``n_points`` log-spaced times in ``window``.
    """
    t, y = _series(series, window, n_points)
    if t.size < 2:
        raise ValueError("need at least two points in the fit window")
    if np.any(y <= 0) or np.any(t <= 0):
        raise ArithmeticError("power-law fit needs strictly positive times and values")
    slope, intercept, r2, se = _ols(np.log(t), np.log(y))
    win = (float(t.min()), float(t.max())) if window is None else (float(window[0]), float(window[1]))
    return ScalingFit(win, float(slope), float(np.exp(intercept)), float(r2), float(se), t.size)


def fit_exponential_rate(result: EnsembleResult, window=None) -> tuple[float, float]:
    """Slope of ``log E(t)`` and its jackknife standard error over the samples."""
    t = result.times
    keep = np.ones(t.size, dtype=bool) if window is None else (t >= window[0]) & (t <= window[1])
    t = t[keep]
    x = t - t.mean()
    slope = np.sum(x * np.log(result.estimate[keep])) / np.sum(x * x)
    units = result.samples
    if units is None or np.ptp(units[:, keep], axis=0).max() == 0:
        return float(slope), 0.0
    n = units.shape[0]
    loo = (units[:, keep].sum(axis=0) - units[:, keep]) / (n - 1)
    slopes = np.log(loo) @ x / np.sum(x * x)
    se = np.sqrt((n - 1) / n * np.sum((slopes - slopes.mean()) ** 2))
    return float(slope), float(se)


def _violations(empirical, stderr, bound, slack):
    tol = 1e-12 * np.maximum(np.abs(bound), 1.0)
    return empirical - slack * stderr > bound + tol


def check_additive_bound(result: EnsembleResult, sigma: float, trace_q: float, domain: Domain,
                         initial_norm_sq: float | None = None, slack: float = 3.0) -> BoundCheck:
    """Compare ``E ||u||^2`` with
    ``E||u0||^2 e^{-2 nu t/c} + (c sigma^2 Tr Q / 2 nu)(1 - e^{-2 nu t/c})``,
    ``c`` the sharp Poincare constant ``(2L/pi)^2``."""
    if result.kind != "norm_squared":
        raise ConfigurationError("the energy bound applies to E||u||^2")
    c = domain.poincare_constant
    nu = domain.viscosity
    e0 = result.estimate[0] if initial_norm_sq is None else initial_norm_sq
    decay = np.exp(-2 * nu * result.times / c)
    bound = e0 * decay + c * sigma ** 2 * trace_q / (2 * nu) * (1 - decay)
    viol = _violations(result.estimate, result.stderr, bound, slack)
    return BoundCheck(result.times, bound, result.estimate, result.stderr, slack, viol)


def check_multiplicative_bound(result: EnsembleResult, sigma: float, nu: float, domain: Domain,
                               initial_norm_sq: float | None = None, slack: float = 3.0,
                               window=None) -> BoundCheck:
    """Compare ``E ||u||^2`` with ``E||u0||^2 exp((sigma^2 - 2 nu / c) t)`` and
    fit the empirical exponential rate."""
    if result.kind != "norm_squared":
        raise ConfigurationError("the energy bound applies to E||u||^2")
    c = domain.poincare_constant
    rate = sigma ** 2 - 2 * nu / c
    e0 = result.estimate[0] if initial_norm_sq is None else initial_norm_sq
    bound = e0 * np.exp(rate * result.times)
    viol = _violations(result.estimate, result.stderr, bound, slack)
    check = BoundCheck(result.times, bound, result.estimate, result.stderr, slack, viol,
                       bound_rate=rate)
    if e0 > 0 and np.all(result.estimate > 0):
        check.fitted_rate, check.rate_stderr = fit_exponential_rate(result, window)
    return check


def windowed_max_check(result: EnsembleResult, horizon: float | None = None,
                       slack: float = 3.0) -> GrowthCheck:
    """No-growth test: the maximum over ``[T/2, T]`` may exceed the maximum over
    ``[T/4, T/2]`` by at most ``slack`` combined standard errors."""
    T = result.times[-1] if horizon is None else horizon
    t = result.times
    early = (t >= T / 4) & (t <= T / 2)
    late = (t > T / 2) & (t <= T)
    if not early.any() or not late.any():
        raise ValueError("both windows need output times")
    ie = np.flatnonzero(early)[np.argmax(result.estimate[early])]
    il = np.flatnonzero(late)[np.argmax(result.estimate[late])]
    tol = slack * np.hypot(result.stderr[ie], result.stderr[il])
    return GrowthCheck(float(result.estimate[ie]), float(result.estimate[il]), float(tol))


def transient_compare(nonlinear: EnsembleResult, linear_oracle=None, window=None) -> TransientFit:
    """Power-law fit of ``|E_u - E_Phi0|`` at small times.

    ``nonlinear`` is either a mean-energy result, compared against the
    callable ``linear_oracle``, or an ``energy_difference`` result (no
    oracle needed). The fit is flagged inconclusive when most differences
    are within two standard errors of zero.
    """
    t = nonlinear.times
    if nonlinear.kind == "energy_difference":
        diff = nonlinear.estimate.copy()
    else:
        if linear_oracle is None:
            raise ValueError("a mean-energy result needs the linear oracle")
        diff = nonlinear.estimate - np.array([linear_oracle(ti) for ti in t])
    se = nonlinear.stderr
    keep = t > 0
    if window is not None:
        keep &= (t >= window[0] * (1 - 1e-12)) & (t <= window[1] * (1 + 1e-12))
    t, diff, se = t[keep], diff[keep], se[keep]
    resolved = np.abs(diff) > 2 * se
    inconclusive = resolved.mean() < 0.5 or np.any(diff == 0)
    if np.any(diff == 0):
        fit = ScalingFit((float(t.min()), float(t.max())), float("nan"), float("nan"), 0.0)
    else:
        fit = fit_power_law((t, np.abs(diff)), window)
    return TransientFit(fit, t, diff, se, bool(inconclusive))


def upper_envelope(fit: ScalingFit, times, values) -> ScalingFit:
    """Same exponent, prefactor raised so ``prefactor * t^exponent >= |values|``."""
    t = np.asarray(times, dtype=float)
    ratio = np.abs(np.asarray(values, dtype=float)) / t ** fit.exponent
    return replace(fit, prefactor=float(max(ratio.max(), fit.prefactor)))


def envelope_check(table: CorrelationTable, fit: ScalingFit, factor: float = 1.0,
                   slack: float = 3.0) -> np.ndarray:
    """Boolean ``[time, offset]`` mask of where ``|C_u - C_Phi|`` stays below
    ``factor * prefactor * t^exponent`` plus ``slack`` standard errors."""
    env = factor * fit.prefactor * table.times ** fit.exponent
    return np.abs(table.values) <= env[:, None] + slack * table.stderr


def length_scale_exact(domain: Domain, t: float, threshold: float, r_max: float | None = None,
                       n: int = 4001) -> float | None:
    """First near-zero of the untruncated normalized correlation at time ``t``."""
    r_max = domain.length / 2 if r_max is None else r_max
    r = np.linspace(0.0, r_max, n)
    return first_near_zero(r, normalized_correlation_exact(domain, t, r), threshold)
