"""Verification suites: each runs one family of checks from a :class:`RunConfig`.

A suite returns a :class:`SuiteReport` listing every measured quantity
next to its tolerance. Reports serialize to plain dictionaries so the CLI
can emit them as JSON.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import analytic as an
from . import diagnostics as dg
from . import noise as nz
from .burgers import cole_hopf_reference, simulate_burgers_ensemble
from .config import RunConfig
from .linear import simulate_linear_ensemble
from .spectral import ConfigurationError, SpectralField

__all__ = ["Check", "SuiteReport", "SUITES", "run_suite", "run_ensemble"]


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    inconclusive: bool = False
    measurements: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks) and not self.inconclusive

    def add(self, name, measured, tolerance, passed, detail=""):
        self.checks.append(Check(name, float(measured), float(tolerance), bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "status": "inconclusive" if self.inconclusive else ("pass" if self.passed else "fail"),
            "checks": [asdict(c) for c in self.checks],
            "measurements": _plain(self.measurements),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def run_ensemble(cfg: RunConfig, threads: int = 1):
    """Simulate the ensemble a config describes."""
    ens = cfg.ensemble
    if cfg.model == "linear":
        return simulate_linear_ensemble(cfg.build_basis(), cfg.noise_spec(), cfg.output_times(),
                                        ens.trajectories, ens.master_seed, threads=threads)
    return simulate_burgers_ensemble(cfg.solver_config(), cfg.output_times(), ens.trajectories,
                                     ens.master_seed, companion=ens.companion,
                                     antithetic=ens.antithetic, threads=threads)


def _scale(cfg: RunConfig) -> float:
    """Diffusive time scale ``L^2 / nu``."""
    return cfg.domain.length ** 2 / cfg.domain.viscosity


def _require(cfg: RunConfig, model: str, kinds: tuple[str, ...], suite: str):
    if cfg.model != model or cfg.noise.kind not in kinds:
        raise ConfigurationError(f"suite {suite!r} needs a {model} run with noise in {kinds}")


def suite_equality(cfg: RunConfig, threads: int = 1) -> SuiteReport:
    """Matched boundary and body forcing: oracle agreement of the mean energy,
    equal averaged correlations, and a resolved odd part for boundary forcing."""
    _require(cfg, "linear", (nz.BOUNDARY_WHITE,), "equality")
    rep = SuiteReport("equality")
    basis = cfg.build_basis()
    alpha = cfg.noise.intensity
    sigma = an.matched_sigma(alpha, basis.domain)
    times = cfg.output_times()
    M, seed = cfg.ensemble.trajectories, cfg.ensemble.master_seed
    slack = cfg.diagnostics.slack
    start = time.perf_counter()
    rz = simulate_linear_ensemble(basis, nz.NoiseSpec.boundary(alpha), times, M, seed,
                                  threads=threads)
    rw = simulate_linear_ensemble(basis, nz.NoiseSpec.body(sigma), times, M, seed + 1,
                                  threads=threads)
    matched = nz.NoiseSpec.body(sigma)
    for label, run in (("boundary", rz), ("body", rw)):
        res = dg.ensemble_mean_energy(run)
        oracle = np.array([an.linear_mean_energy(basis, matched, t) for t in res.times])
        live = res.times > 0
        z = np.abs(res.estimate - oracle)[live] / res.stderr[live]
        rep.add(f"{label}_mean_energy_vs_series", z.max(), slack, z.max() <= slack,
                "max |estimate - series| in standard errors over output times")
        rep.measurements[f"{label}_mean_energy"] = {"t": res.times, "estimate": res.estimate,
                                                    "stderr": res.stderr, "series": oracle}
    r = cfg.r_grid()
    if r is None:
        r = np.linspace(0.0, cfg.domain.length / 2, 20)
    cz = dg.ensemble_correlation(rz, r)
    cw = dg.ensemble_correlation(rw, r)
    live = cz.times > 0
    gap = np.abs(cz.averaged - cw.values)[live]
    half_widths = 1.96 * (cz.averaged_stderr + cw.stderr)[live]
    ratio = np.max(gap / half_widths)
    n_apart = int(np.sum(gap > half_widths))
    rep.add("averaged_correlations_ci_overlap", ratio, 1.0, ratio <= 1.0,
            f"max gap / sum of 95% half-widths; overlap when <= 1; "
            f"{n_apart} of {gap.size} (t, r) points without overlap")
    with np.errstate(divide="ignore", invalid="ignore"):
        odd_z = np.where(cz.odd_stderr > 0, np.abs(cz.odd) / cz.odd_stderr, 0.0)[live]
    per_time = odd_z.max(axis=1)
    rep.add("odd_part_resolved", per_time.min(), slack, per_time.min() > slack,
            "min over times of max over r of |C - C_hat| in standard errors")
    elapsed = time.perf_counter() - start
    rep.measurements.update(runtime_s=elapsed, odd_z_per_time=per_time, r_grid=r)
    return rep


def suite_scaling(cfg: RunConfig, threads: int = 1) -> SuiteReport:
    """Small-time square-root growth and large-time level of the series mean energy."""
    rep = SuiteReport("scaling")
    domain = cfg.build_domain()
    if domain.bc != "neumann":
        raise ConfigurationError("suite 'scaling' uses the Neumann problem")
    alpha = cfg.noise.intensity
    sigma = an.matched_sigma(alpha, domain)
    T = _scale(cfg)
    window = cfg.diagnostics.fit_window or (1e-6 * T, 1e-4 * T)
    large = cfg.diagnostics.large_t_window or (3 * T, 10 * T)

    def energy(t):
        return an.mean_energy_exact(domain, sigma, t)

    small_fit = dg.fit_power_law(energy, window)
    rep.add("small_t_exponent", small_fit.exponent, 0.02, abs(small_fit.exponent - 0.5) <= 0.02,
            "fitted log-log slope, target 0.5")
    large_fit = dg.fit_power_law(energy, large)
    rep.add("large_t_exponent", large_fit.exponent, 0.02, abs(large_fit.exponent) <= 0.02,
            "fitted log-log slope, target 0")
    level = alpha ** 2 / (6 * domain.viscosity)
    ts = np.geomspace(large[0], large[1], 21)
    rel = max(abs(energy(t) / level - 1) for t in ts)
    rep.add("large_t_level", rel, 0.01, rel <= 0.01, "max relative deviation from alpha^2/(6 nu)")
    rep.measurements.update(small_fit=asdict(small_fit), large_fit=asdict(large_fit),
                            level=level)
    return rep


def suite_lengthscale(cfg: RunConfig, threads: int = 1) -> SuiteReport:
    """Length scales of the normalized correlation at small and large times."""
    rep = SuiteReport("lengthscale")
    domain = cfg.build_domain()
    if domain.bc != "neumann":
        raise ConfigurationError("suite 'lengthscale' uses the Neumann problem")
    T, L, nu = _scale(cfg), domain.length, domain.viscosity
    threshold = cfg.diagnostics.threshold
    times = cfg.output_times()
    small = [t for t in times if t <= 1e-3 * T]
    large = [t for t in times if t >= 3 * T]
    if not small and not large:
        raise ConfigurationError("output times contain neither small (<= 1e-3) nor large (>= 3) times")
    x_g = an.g_near_zero(threshold)
    ratios = []
    for t in small:
        width = np.sqrt(t * nu)
        r = np.linspace(0.0, min(8 * width, L / 2), 4001)
        r_star = an.first_near_zero(r, an.normalized_correlation_exact(domain, t, r), threshold)
        ratios.append(np.nan if r_star is None else r_star / width)
    if ratios:
        ratios = np.array(ratios)
        spread = np.nanmax(ratios) / np.nanmin(ratios) - 1
        rep.add("small_t_ratio_constant", spread, 0.10, spread <= 0.10,
                "relative spread of r*/sqrt(t nu) across times")
        dev = np.max(np.abs(ratios / x_g - 1))
        rep.add("small_t_ratio_vs_G", dev, 0.10, dev <= 0.10,
                f"max relative deviation from the G crossing x_G = {x_g:.6g}")
    x0 = an.F_ZERO
    large_vals = []
    for t in large:
        r = np.linspace(0.0, L, 4001)
        r_star = an.first_near_zero(r, an.normalized_correlation_exact(domain, t, r), 1e-2)
        large_vals.append(np.nan if r_star is None else r_star)
        dev = np.nan if r_star is None else abs(r_star / (x0 * L) - 1)
        rep.add(f"large_t_length_t={t:g}", dev, 0.02, bool(dev <= 0.02),
                f"relative deviation of r* from (1 - 1/sqrt 3) L, r* = {r_star}")
    rep.measurements.update(threshold=threshold, x_G=x_g, small_times=small,
                            small_ratios=ratios if len(small) else [], large_times=large,
                            large_r_star=large_vals)
    return rep


def suite_oracle(cfg: RunConfig, threads: int = 1) -> SuiteReport:
    """Deterministic Burgers against the Cole-Hopf reference, plus the
    error ratio when the time step is halved."""
    _require(cfg, "burgers", nz.INDEPENDENT_KINDS + (nz.MULTIPLICATIVE_SCALAR,), "oracle")
    if cfg.noise.intensity != 0:
        raise ConfigurationError("suite 'oracle' needs zero noise intensity")
    rep = SuiteReport("oracle")
    solver = cfg.solver_config()
    basis, L, nu = solver.basis, cfg.domain.length, cfg.domain.viscosity
    if basis.domain.hyper_eps != 0:
        raise ConfigurationError("the Cole-Hopf reference needs hyper_eps = 0")
    t = solver.t_end
    init = solver.initial or SpectralField.zeros(basis)
    x = np.linspace(-L, L, 4097)
    ref_vals = cole_hopf_reference(init, nu, L, t, x)
    errors = []
    for h in (solver.dt, solver.dt / 2):
        run = simulate_burgers_ensemble(replace(solver, dt=h), [t], 1, 0)
        u = run.coeffs[0, 0] @ basis.eigenfunctions(x).T
        den = np.trapezoid(ref_vals ** 2, x)
        err = np.sqrt(np.trapezoid((u - ref_vals) ** 2, x) / den) if den > 0 else np.sqrt(np.trapezoid(u ** 2, x))
        errors.append(float(err))
    rep.add("relative_l2_error", errors[0], 1e-4, errors[0] < 1e-4,
            f"at t = {t:g} with dt = {solver.dt:g}")
    if errors[1] > 0:
        ratio = errors[0] / errors[1]
        rep.add("halving_ratio", ratio, 0.2, 1.8 <= ratio <= 2.2, "error(dt) / error(dt/2), target 2")
    rep.measurements.update(errors=errors, dt=[solver.dt, solver.dt / 2], t=t)
    return rep


def _zero_noise(cfg: RunConfig) -> RunConfig:
    data = cfg.model_dump()
    data["noise"]["intensity"] = 0.0
    return RunConfig.model_validate(data)


def suite_bounds(cfg: RunConfig, threads: int = 1) -> SuiteReport:
    """Energy bounds for the nonlinear equation.

    Additive trace-class runs are compared with the Gronwall bound and
    tested for an upward trend; point-forced runs get the trend test;
    multiplicative runs get the exponential bound and a rate fit, repeated
    with the noise switched off.
    """
    _require(cfg, "burgers", (nz.BODY_TRACE_CLASS, nz.BODY_WHITE, nz.POINT_WHITE,
                              nz.MULTIPLICATIVE_SCALAR), "bounds")
    rep = SuiteReport("bounds")
    slack = cfg.diagnostics.slack
    domain = cfg.build_domain()
    kind = cfg.noise.kind
    solver = cfg.solver_config()
    e0 = float(np.sum(solver.initial_coeffs ** 2))
    start = time.perf_counter()
    run = run_ensemble(cfg, threads)
    if run.blowups:
        rep.measurements["blowups"] = run.blowups
    norm = dg.ensemble_norm_squared(run)
    energy = dg.ensemble_mean_energy(run)
    if kind == nz.MULTIPLICATIVE_SCALAR:
        if e0 == 0:
            rep.add("zero_state_preserved", np.abs(norm.estimate).max(), 0.0,
                    np.all(norm.estimate == 0))
        else:
            cases = [(cfg.noise.intensity, norm)]
            if cfg.noise.intensity > 0:
                quiet = run_ensemble(_zero_noise(cfg), threads)
                cases.append((0.0, dg.ensemble_norm_squared(quiet)))
            for sigma, res in cases:
                chk = dg.check_multiplicative_bound(res, sigma, domain.viscosity, domain,
                                                    e0, slack, cfg.diagnostics.fit_window)
                tag = f"sigma={sigma:g}"
                rep.add(f"bound_curve_{tag}", int(chk.violations.sum()), 0, chk.passed,
                        "times where E||u||^2 exceeds the bound beyond the slack")
                rep.add(f"decays_{tag}", res.estimate[-1] / e0, 1.0, res.estimate[-1] < e0,
                        "E||u(T)||^2 / E||u0||^2")
                margin = chk.fitted_rate - chk.bound_rate
                rep.add(f"rate_{tag}", margin, slack * chk.rate_stderr, chk.rate_ok,
                        f"fitted rate {chk.fitted_rate:.6g} minus bound rate {chk.bound_rate:.6g}; "
                        f"jackknife stderr {chk.rate_stderr:.3g}")
                rep.measurements[tag] = {"t": res.times, "estimate": res.estimate,
                                         "stderr": res.stderr, "bound": chk.bound,
                                         "fitted_rate": chk.fitted_rate,
                                         "rate_stderr": chk.rate_stderr,
                                         "bound_rate": chk.bound_rate}
    else:
        growth = dg.windowed_max_check(energy, slack=slack)
        rep.add("no_upward_trend", growth.growth, growth.slack, growth.passed,
                "late-window max minus early-window max of the mean energy")
        if kind in nz.INDEPENDENT_KINDS:
            spec = cfg.noise_spec()
            chk = dg.check_additive_bound(norm, spec.intensity, spec.trace(solver.basis), domain,
                                          e0, slack)
            rep.add("gronwall_bound", int(chk.violations.sum()), 0, chk.passed,
                    "times where E||u||^2 exceeds the bound beyond the slack")
            rep.measurements["bound"] = chk.bound
        rep.measurements.update(t=energy.times, mean_energy=energy.estimate,
                                stderr=energy.stderr, norm_squared=norm.estimate)
    if len(run.blowups) == run.n_trajectories:
        rep.add("all_trajectories_blew_up", len(run.blowups), 0, False)
    rep.measurements["runtime_s"] = time.perf_counter() - start
    return rep


def suite_transient(cfg: RunConfig, threads: int = 1) -> SuiteReport:
    """Small-time gap between the nonlinear and linear mean energies."""
    _require(cfg, "burgers", nz.INDEPENDENT_KINDS, "transient")
    if cfg.initial is not None:
        raise ConfigurationError("suite 'transient' starts from zero")
    data = cfg.model_dump()
    data["ensemble"]["companion"] = True
    cfg = RunConfig.model_validate(data)
    rep = SuiteReport("transient")
    T = _scale(cfg)
    window = cfg.diagnostics.fit_window or (1e-4 * T, 1e-2 * T)
    start = time.perf_counter()
    run = run_ensemble(cfg, threads)
    diff = dg.energy_difference(run)
    cmp = dg.transient_compare(diff, window=window)
    rep.inconclusive = cmp.inconclusive
    rep.add("exponent", cmp.fit.exponent, 0.55, cmp.fit.exponent > 0.55,
            f"log-log slope of |E_u - E_Phi|; stderr {cmp.fit.exponent_stderr:.3g}")
    rep.add("r_squared", cmp.fit.r_squared, 0.9, cmp.fit.r_squared > 0.9)
    r = cfg.r_grid()
    if r is not None:
        table = dg.correlation_difference(run, r)
        inside = (table.times >= window[0] * (1 - 1e-12)) & (table.times <= window[1] * (1 + 1e-12))
        sub = an.CorrelationTable(table.times[inside], r, table.values[inside],
                                  table.averaged[inside], table.normalized[inside],
                                  table.stderr[inside])
        envelope = dg.upper_envelope(cmp.fit, cmp.times, cmp.difference)
        ok = dg.envelope_check(sub, envelope, slack=cfg.diagnostics.slack)
        rep.add("correlation_within_envelope", float(ok.mean()), 1.0, bool(ok.all()),
                "fraction of (t, r) with |C_u - C_Phi| under the fitted exponent's upper envelope")
        rep.measurements["envelope_prefactor"] = envelope.prefactor
    rep.measurements.update(t=cmp.times, difference=cmp.difference, stderr=cmp.stderr,
                            fit=asdict(cmp.fit), supports_claim=cmp.supports_claim,
                            runtime_s=time.perf_counter() - start)
    return rep


SUITES = {
    "equality": suite_equality,
    "scaling": suite_scaling,
    "lengthscale": suite_lengthscale,
    "bounds": suite_bounds,
    "transient": suite_transient,
    "oracle": suite_oracle,
}


def run_suite(name: str, cfg: RunConfig, threads: int = 1) -> SuiteReport:
    if name not in SUITES:
        raise ConfigurationError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](cfg, threads)
