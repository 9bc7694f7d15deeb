"""Closed-form statistics of the linear problems.

Boundary forcing ``Z`` and body forcing ``W_A`` on ``[0, L]`` with Neumann
ends are Gaussian, so their mean energy and correlation functions are
explicit mode sums. Functions taking a ``basis`` sum over its modes (the
same truncation a simulation on that basis has); the ``*_exact`` variants
close the infinite ``1/k^2`` tail analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import erfc, exprel, polygamma

from . import noise as nz
from .spectral import NEUMANN, ConfigurationError, Domain, SpectralBasis

__all__ = [
    "CorrelationTable",
    "matched_sigma",
    "ou_integral",
    "linear_covariance",
    "linear_mean_energy",
    "variance_profile",
    "mean_energy_series",
    "mean_energy_exact",
    "corr_body",
    "corr_body_exact",
    "corr_boundary",
    "corr_boundary_odd",
    "normalized_correlation_exact",
    "scaling_G",
    "g_near_zero",
    "scaling_F",
    "scaling_F_series",
    "F_ZERO",
    "corr_boundary_infinity",
    "corr_infinity_bound",
    "first_near_zero",
]

F_ZERO = 1 - 1 / np.sqrt(3)


@dataclass
class CorrelationTable:
    """``C(t, r)``, its symmetrization ``C_hat`` and ``rho = C_hat / C_hat(t, 0)``.

    Matrices are indexed ``[time, offset]``. Standard errors are present
    only for Monte Carlo estimates.
    """

    times: np.ndarray
    offsets: np.ndarray
    values: np.ndarray
    averaged: np.ndarray
    normalized: np.ndarray
    stderr: np.ndarray | None = None
    averaged_stderr: np.ndarray | None = None
    odd_stderr: np.ndarray | None = None
    n_trajectories: int | None = None

    @property
    def odd(self) -> np.ndarray:
        """``C - C_hat``, the part that flips sign with ``r``."""
        return self.values - self.averaged


def matched_sigma(alpha: float, domain: Domain) -> float:
    """Body-noise intensity ``alpha e_1(0)`` whose statistics match boundary noise ``alpha``."""
    return alpha * np.sqrt(2.0 / domain.length)


def ou_integral(rate, t: float):
    """``int_0^t exp(rate s) ds`` (continuous at ``rate = 0``)."""
    rate = np.asarray(rate, dtype=float)
    return t * exprel(rate * t)


def _check_neumann(basis_or_domain):
    domain = getattr(basis_or_domain, "domain", basis_or_domain)
    if domain.bc != NEUMANN:
        raise ConfigurationError("these formulas are for the Neumann problem on [0, L]")
    return domain


def linear_covariance(basis: SpectralBasis, spec: nz.NoiseSpec, t: float) -> np.ndarray:
    """Covariance of the coefficients of the linear solution at time ``t`` (zero start)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    lam = basis.eigenvalues
    if spec.is_correlated:
        g = spec.forcing_values(basis)
        return spec.intensity ** 2 * np.outer(g, g) * ou_integral(lam[:, None] + lam[None, :], t)
    if spec.kind in nz.INDEPENDENT_KINDS:
        return np.diag(spec.intensity ** 2 * spec.q_values(basis) * ou_integral(2 * lam, t))
    raise ConfigurationError(f"{spec.kind} noise has no linear Gaussian solution")


def linear_mean_energy(basis: SpectralBasis, spec: nz.NoiseSpec, t: float,
                       subtract_mean: bool = True) -> float:
    """``E ||u - ubar||^2 / |D|`` of the truncated linear solution."""
    S = linear_covariance(basis, spec, t)
    size = basis.domain.size
    total = np.trace(S)
    if subtract_mean:
        m = basis.mode_integrals()
        total -= m @ S @ m / size
    return float(total / size)


def variance_profile(basis: SpectralBasis, spec: nz.NoiseSpec, t: float, x) -> np.ndarray:
    """Pointwise variance ``Var u(t, x)`` of the linear solution."""
    S = linear_covariance(basis, spec, t)
    E = basis.eigenfunctions(np.asarray(x, dtype=float))
    return np.einsum("ik,kl,il->i", E, S, E)


def _rate(domain: Domain) -> float:
    # lambda_k = -a k^2 for the Neumann Laplacian
    return domain.viscosity * (np.pi / domain.length) ** 2


def mean_energy_series(basis: SpectralBasis, sigma: float, t: float) -> tuple[float, float]:
    """Mean energy ``(sigma^2/L) sum_k int_0^t exp(2 s lambda_k) ds`` over the basis modes.

    Returns ``(partial_sum, tail_bound)``; the bound uses
    ``int_0^t exp(2 s lambda_k) ds <= 1 / (-2 lambda_k)``.
    """
    domain = _check_neumann(basis)
    if t < 0:
        raise ValueError("t must be nonnegative")
    lam = basis.eigenvalues[basis.wavenumbers > 0]
    L = domain.length
    partial = sigma ** 2 / L * np.sum(ou_integral(2 * lam, t))
    if domain.hyper_eps == 0:
        tail = sigma ** 2 / L * polygamma(1, basis.mode_count + 1) / (2 * _rate(domain))
    else:
        p = 2 + 2 * domain.hyper_eps
        c = domain.viscosity * (np.pi / L) ** p
        tail = sigma ** 2 / L * basis.mode_count ** (1 - p) / ((p - 1) * 2 * c)
    return float(partial), float(tail)


def _damped_cos_sum(eps: float, theta) -> np.ndarray:
    """``sum_{k>=1} (1 - exp(-eps k^2)) cos(k theta) / k^2``.

    For ``eps < 1`` Poisson summation turns this into a few images of
    ``int_0^eps sqrt(pi/s) exp(-y^2/4s) ds`` (exponentially accurate);
    otherwise the Gaussian factors decay fast enough to sum directly.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if eps <= 0:
        return np.zeros(theta.shape)
    if eps < 1.0:
        base = np.mod(theta, 2 * np.pi)
        total = np.zeros(theta.shape)
        for n in range(-3, 3):
            y = np.abs(base + 2 * np.pi * n)
            root = np.sqrt(eps)
            with np.errstate(over="ignore"):
                gauss = np.exp(-y * y / (4 * eps))
            total += 2 * np.sqrt(np.pi) * root * gauss - np.pi * y * erfc(y / (2 * root))
        return 0.5 * (total - eps)
    kmax = int(np.ceil(np.sqrt(40.0 / eps))) + 1
    k = np.arange(1, kmax + 1, dtype=float)
    w = np.exp(-eps * k * k) / (k * k)
    return _clausen2(theta) - np.cos(np.multiply.outer(theta, k)) @ w


def _clausen2(theta) -> np.ndarray:
    """``sum_{k>=1} cos(k theta) / k^2 = pi^2/6 - pi x/2 + x^2/4`` with ``x = |theta| mod 2 pi``."""
    x = np.mod(np.abs(np.asarray(theta, dtype=float)), 2 * np.pi)
    return np.pi ** 2 / 6 - np.pi * x / 2 + x * x / 4


def mean_energy_exact(domain: Domain, sigma: float, t: float) -> float:
    """Untruncated mean energy (standard viscosity only)."""
    return float(corr_body_exact(domain, sigma, t, 0.0)[0])


def corr_body(basis: SpectralBasis, sigma: float, t: float, r) -> np.ndarray:
    """Body-forcing correlation ``(sigma^2/L) sum_k int_0^t e^{2 s lambda_k} ds cos(pi k r / L)``."""
    domain = _check_neumann(basis)
    if t < 0:
        raise ValueError("t must be nonnegative")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    pos = basis.wavenumbers > 0
    w = ou_integral(2 * basis.eigenvalues[pos], t)
    return sigma ** 2 / domain.length * (np.cos(np.multiply.outer(r, basis.frequencies[pos])) @ w)


def corr_body_exact(domain: Domain, sigma: float, t: float, r) -> np.ndarray:
    """Infinite-series version of :func:`corr_body`.

    Splits each term into ``1/(2 a k^2)`` (summed in closed form) minus a
    Gaussian-damped remainder.
    """
    _check_neumann(domain)
    if domain.hyper_eps != 0:
        raise ConfigurationError("closed-form tail needs hyper_eps = 0")
    if t < 0:
        raise ValueError("t must be nonnegative")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if t == 0:
        return np.zeros(r.shape)
    a = _rate(domain)
    theta = np.pi * r / domain.length
    series = _damped_cos_sum(2 * a * t, theta)
    return sigma ** 2 / domain.length * series / (2 * a)


def _boundary_odd_matrix(basis: SpectralBasis) -> np.ndarray:
    k = basis.wavenumbers[basis.wavenumbers > 0].astype(float)
    K, Lm = np.meshgrid(k, k, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        S = Lm * ((-1.0) ** (K + Lm) - 1) / (Lm ** 2 - K ** 2)
    S[K == Lm] = 0.0
    return S


def corr_boundary_odd(basis: SpectralBasis, alpha: float, t: float, r) -> np.ndarray:
    """Part of the boundary-forcing correlation that is odd in ``r``.

    ``(alpha^2 e_1(0)^4 / pi) sum_{k != l} int_0^t e^{s(lambda_k + lambda_l)} ds
    l((-1)^{k+l} - 1)/(l^2 - k^2) sin(pi l r / L)``.
    """
    domain = _check_neumann(basis)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    pos = basis.wavenumbers > 0
    lam = basis.eigenvalues[pos]
    J = ou_integral(lam[:, None] + lam[None, :], t)
    weights = (J * _boundary_odd_matrix(basis)).sum(axis=0)
    e1_sq = 2.0 / domain.length
    prefactor = alpha ** 2 * e1_sq ** 2 / np.pi
    return prefactor * (np.sin(np.multiply.outer(r, basis.frequencies[pos])) @ weights)


def corr_boundary(basis: SpectralBasis, alpha: float, t: float, r) -> np.ndarray:
    """Boundary-forcing correlation ``C_Z(t, r)``: the body-forcing value at the
    matched intensity plus an odd correction."""
    sigma = matched_sigma(alpha, basis.domain)
    return corr_body(basis, sigma, t, r) + corr_boundary_odd(basis, alpha, t, r)


def normalized_correlation_exact(domain: Domain, t: float, r) -> np.ndarray:
    """``rho(t, r) = C_hat(t, r) / C_hat(t, 0)``, identical for both forcings."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    vals = corr_body_exact(domain, 1.0, t, np.concatenate([[0.0], r]))
    return vals[1:] / vals[0]


def _G_amplitude(k):
    return -np.expm1(-2 * k * k) / (2 * k * k) if k > 0 else 1.0


def scaling_G(x: float, epsabs: float = 1e-8) -> float:
    """``G(x) = int_0^inf (1 - e^{-2k^2}) / (2k^2) cos(kx) dk`` by adaptive quadrature.

    The amplitude falls below ``1e-12`` at ``k = 1/sqrt(2e-12)``, where the
    oscillatory integral is cut off; at ``x = 0`` the tail is added exactly.
    """
    if x < 0:
        raise ValueError("G is tabulated for x >= 0")
    kmax = 1.0 / np.sqrt(2e-12)
    f = np.vectorize(_G_amplitude, otypes=[float])
    if x == 0:
        parts = [(0, 10), (10, 1e3), (1e3, kmax)]
        total = 0.0
        for lo, hi in parts:
            val, err = integrate.quad(f, lo, hi, epsabs=epsabs / 3, limit=500)
            total += val
        # the amplitude is 1/(2k^2) to double precision beyond kmax
        return float(total + 0.5 / kmax)
    val, err = integrate.quad(f, 0, kmax, weight="cos", wvar=x, epsabs=epsabs, limit=2000)
    if not err < 10 * epsabs:
        raise ArithmeticError(f"G({x}) quadrature did not converge (error estimate {err:.2e})")
    return float(val)


def g_near_zero(threshold: float, x_max: float = 20.0) -> float:
    """First ``x`` with ``G(x) = threshold G(0)``.

    ``G`` is positive everywhere (it is an average of Gaussians), so this
    threshold crossing is the small-time length-scale constant.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    g0 = scaling_G(0.0)
    xs = np.linspace(0.0, x_max, 81)
    vals = np.array([scaling_G(x) for x in xs]) / g0 - threshold
    idx = np.flatnonzero(vals < 0)
    if idx.size == 0:
        raise ArithmeticError("no crossing found; increase x_max")
    i = idx[0]
    return float(optimize.brentq(lambda x: scaling_G(x) / g0 - threshold, xs[i - 1], xs[i],
                                 xtol=1e-10))


def scaling_F(x) -> np.ndarray:
    """``F(x) = pi^-2 sum_k k^-2 cos(k pi x)``, the 2-periodic parabola ``1/6 - x/2 + x^2/4``."""
    y = np.mod(np.abs(np.asarray(x, dtype=float)), 2.0)
    return 1 / 6 - y / 2 + y * y / 4


def scaling_F_series(x, n_terms: int = 100_000) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.arange(1, n_terms + 1, dtype=float)
    return np.cos(np.pi * np.multiply.outer(x, k)) @ (1 / k ** 2) / np.pi ** 2


def corr_boundary_infinity(alpha: float, nu: float, L: float, r) -> np.ndarray:
    """Stationary averaged correlation ``(alpha^2/nu) F(r/L)``."""
    return alpha ** 2 / nu * scaling_F(np.asarray(r, dtype=float) / L)


def corr_infinity_bound(alpha: float, nu: float, L: float, t: float) -> float:
    """Bound on ``|C_hat(t, r) - C_hat(inf, r)|``."""
    return alpha ** 2 / (np.pi ** 2 * nu) * np.exp(-2 * t * nu * np.pi ** 2 / L ** 2) * np.pi ** 2 / 6


def first_near_zero(r, rho, threshold: float) -> float | None:
    """Smallest offset where ``|rho|`` drops below ``threshold``.

    Between the last sample above and the first sample below the
    threshold, the crossing of ``|rho| = threshold`` is linearly
    interpolated; if ``rho`` changes sign within that bracket or the next
    one, the interpolated zero is returned instead. ``None`` when the
    profile never gets that small.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if r.shape != rho.shape or np.any(np.diff(r) <= 0):
        raise ValueError("profile must be sorted by strictly increasing r")
    below = np.flatnonzero(np.abs(rho) < threshold)
    if below.size == 0:
        return None
    i = below[0]
    if i == 0:
        return float(r[0])
    for j in (i, i + 1):
        if j < r.size and rho[j - 1] * rho[j] < 0:
            return float(r[j - 1] + (r[j] - r[j - 1]) * rho[j - 1] / (rho[j - 1] - rho[j]))
    a, b = abs(rho[i - 1]), abs(rho[i])
    return float(r[i - 1] + (r[i] - r[i - 1]) * (a - threshold) / (a - b))
