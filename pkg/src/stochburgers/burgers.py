"""Stochastic Burgers equation on ``[-L, L]`` with Dirichlet ends.

The Galerkin system for the sine coefficients ``a_k`` is

    da_k = (lambda_k a_k + N_k(a)) dt + noise,

with ``N_k = <-(u^2)_x / 2, e_k>``. Time stepping is the integrating-factor
Euler-Maruyama scheme

    a <- exp(lambda h) (a + h N(a) + sigma a dw) + xi,

where the multiplicative term is present only for scalar multiplicative
noise and ``xi`` are the exact OU innovations of the additive noise.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import noise as nz
from .linear import EnsembleRun
from .spectral import DIRICHLET, ConfigurationError, SpectralBasis, SpectralField

logger = logging.getLogger(__name__)

__all__ = [
    "IntegrationError",
    "SolverConfig",
    "BurgersTrajectory",
    "EnsembleRun",
    "galerkin_nonlinearity",
    "nonlinear_term",
    "Stepper",
    "step",
    "simulate_burgers",
    "simulate_burgers_ensemble",
    "cole_hopf_reference",
]

DEFAULT_DEALIAS = 2.0 / 3.0
DEFAULT_CHUNK = 64


class IntegrationError(ArithmeticError):
    """The state became non-finite or exceeded the blow-up threshold."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t = {time:.6g}")
        self.time = time


@dataclass(frozen=True, eq=False)
class SolverConfig:
    basis: SpectralBasis
    dt: float
    t_end: float
    noise: nz.NoiseSpec
    initial: SpectralField | None = None
    dealias_fraction: float = DEFAULT_DEALIAS
    blowup_factor: float = 1e6

    def __post_init__(self):
        if self.basis.domain.bc != DIRICHLET:
            raise ConfigurationError("the Burgers solver needs a Dirichlet basis")
        if not 0 < self.dt <= self.t_end:
            raise ConfigurationError(f"need 0 < dt <= t_end, got dt={self.dt}, t_end={self.t_end}")
        if not 0 < self.dealias_fraction <= 1:
            raise ConfigurationError("dealias_fraction must lie in (0, 1]")
        if self.noise.kind == nz.BOUNDARY_WHITE:
            raise ConfigurationError("nonlinear Burgers with boundary noise is not supported")
        if self.noise.kind == nz.POINT_WHITE and self.basis.domain.hyper_eps <= 0:
            raise ConfigurationError("point forcing requires hyperviscosity (hyper_eps > 0)")
        if self.initial is not None and self.initial.basis is not self.basis:
            raise ConfigurationError("initial field must live in the solver basis")

    @property
    def initial_coeffs(self) -> np.ndarray:
        if self.initial is None:
            return np.zeros(self.basis.n_modes)
        return np.array(self.initial.coeffs)


def galerkin_nonlinearity(basis: SpectralBasis, coeffs: np.ndarray,
                          dealias_fraction: float = DEFAULT_DEALIAS) -> np.ndarray:
    """Coefficients of ``-(u^2)_x / 2`` for a stack of sine-series fields.

    ``u`` is sampled on ``2N + 1`` equispaced points by a type-I sine
    transform; ``u^2`` is a cosine polynomial of degree ``2N`` which the
    type-I cosine transform on that grid recovers exactly, so the
    projection is free of aliasing. Modes above ``dealias_fraction * N``
    are then zeroed.
    """
    a = np.asarray(coeffs, dtype=float)
    n = basis.n_modes
    L = basis.domain.length
    K = 2 * n
    padded = np.zeros(a.shape[:-1] + (K - 1,))
    padded[..., :n] = a
    u = sfft.dst(padded, type=1, axis=-1) / (2 * np.sqrt(L))
    sq = np.zeros(a.shape[:-1] + (K + 1,))
    sq[..., 1:K] = u * u
    cos_coeffs = sfft.dct(sq, type=1, axis=-1)[..., 1:n + 1] / K
    out = 0.5 * np.sqrt(L) * basis.frequencies * cos_coeffs
    out[..., basis.wavenumbers > dealias_fraction * n] = 0.0
    return out


def nonlinear_term(fld: SpectralField, dealias_fraction: float = DEFAULT_DEALIAS) -> SpectralField:
    """Galerkin projection of ``-(u^2)_x / 2``."""
    if fld.basis.domain.bc != DIRICHLET:
        raise ConfigurationError("the Burgers nonlinearity is implemented for Dirichlet bases")
    return SpectralField(fld.basis, galerkin_nonlinearity(fld.basis, fld.coeffs, dealias_fraction))


class Stepper:
    """Precomputed one-step map for a fixed step size.

    ``advance`` works on stacks of coefficient vectors, ``z`` being the
    standard normals for this step (``noise_width`` per trajectory).
    """

    def __init__(self, config: SolverConfig, h: float | None = None):
        self.config = config
        self.h = float(config.dt if h is None else h)
        basis = config.basis
        self.decay = np.exp(basis.eigenvalues * self.h)
        spec = config.noise
        self._factor = None
        self._std = None
        if spec.intensity == 0:
            self.noise_width = 0
        elif spec.kind == nz.MULTIPLICATIVE_SCALAR:
            self.noise_width = 1
        else:
            self.noise_width = basis.n_modes
            if spec.is_correlated:
                self._factor = nz.correlated_factor(basis, spec, self.h)
            else:
                self._std = nz.independent_mode_std(basis, spec, self.h)

    def innovations(self, z: np.ndarray) -> np.ndarray:
        spec = self.config.noise
        if self._factor is not None:
            return spec.intensity * nz.apply_factor(z, self._factor)
        return spec.intensity * (self._std * z)

    def advance(self, a: np.ndarray, z: np.ndarray | None, companion: np.ndarray | None = None):
        cfg = self.config
        drift = a + self.h * galerkin_nonlinearity(cfg.basis, a, cfg.dealias_fraction)
        if self.noise_width == 0:
            new = self.decay * drift
            if companion is not None:
                companion = self.decay * companion
        elif cfg.noise.kind == nz.MULTIPLICATIVE_SCALAR:
            dw = np.sqrt(self.h) * z[..., :1]
            new = self.decay * (drift + cfg.noise.intensity * a * dw)
        else:
            xi = self.innovations(z)
            new = self.decay * drift + xi
            if companion is not None:
                companion = self.decay * companion + xi
        return new, companion


def step(state: SpectralField, config: SolverConfig, stream: nz.RngStream) -> SpectralField:
    """One integrating-factor Euler-Maruyama step of size ``config.dt``."""
    stepper = Stepper(config)
    z = stream.normal(stepper.noise_width) if stepper.noise_width else None
    new, _ = stepper.advance(np.array(state.coeffs), z)
    if not np.all(np.isfinite(new)):
        raise IntegrationError("non-finite state", config.dt)
    return SpectralField(config.basis, new)


def _step_counts(t_grid, dt: float) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ConfigurationError("output times must be nonnegative and strictly increasing")
    marks = t_grid / dt
    counts = np.rint(marks).astype(np.int64)
    if np.any(np.abs(marks - counts) > 1e-6):
        raise ConfigurationError("output times must be integer multiples of dt")
    return counts


def _noise_scale(config: SolverConfig, stepper: Stepper) -> float:
    scale = float(np.linalg.norm(config.initial_coeffs))
    spec = config.noise
    if stepper.noise_width and spec.is_additive:
        if stepper._factor is not None:
            per_step = np.sqrt(np.sum(stepper._factor ** 2))
        else:
            per_step = np.linalg.norm(stepper._std)
        # stationary scale of the slowest mode, bounded by the noise over t_end
        slowest = -config.basis.eigenvalues.max()
        steps = min(config.t_end / config.dt, 1.0 / (slowest * config.dt) + 1.0)
        scale += spec.intensity * per_step * np.sqrt(steps)
    return max(scale, 1e-12)


@dataclass
class BurgersTrajectory:
    basis: SpectralBasis
    times: np.ndarray
    coeffs: np.ndarray  # (n_times, n_modes)

    @property
    def snapshots(self) -> list[SpectralField]:
        return [SpectralField(self.basis, c) for c in self.coeffs]


def _run_chunk(config: SolverConfig, counts: np.ndarray, master_seed: int, indices: np.ndarray,
               companion: bool, antithetic: bool):
    stepper = Stepper(config)
    normals = nz.BlockedNormals(master_seed, indices, stepper.noise_width, antithetic=antithetic)
    m = indices.size
    n = config.basis.n_modes
    a = np.tile(config.initial_coeffs, (m, 1))
    phi = np.zeros((m, n)) if companion else None
    alive = np.ones(m, dtype=bool)
    fail_time = np.full(m, np.nan)
    threshold = config.blowup_factor * _noise_scale(config, stepper)
    out = np.empty((m, counts.size, n))
    out_phi = np.empty((m, counts.size, n)) if companion else None
    done = 0
    for j, target in enumerate(counts):
        while done < target:
            z = normals.next() if stepper.noise_width else None
            # overflow in a diverging path is caught by the threshold below
            with np.errstate(over="ignore", invalid="ignore"):
                a, phi = stepper.advance(a, z, phi)
                norms = np.linalg.norm(a, axis=-1)
            done += 1
            bad = alive & ~(norms < threshold)
            if np.any(bad):
                fail_time[bad] = done * config.dt
                alive &= ~bad
                a[bad] = 0.0
        snap = a.copy()
        snap[~alive] = np.nan
        out[:, j] = snap
        if companion:
            out_phi[:, j] = phi
    blowups = [(int(indices[i]), float(fail_time[i])) for i in np.flatnonzero(~alive)]
    return out, out_phi, blowups


def simulate_burgers_ensemble(config: SolverConfig, t_grid, n_trajectories: int,
                              master_seed: int, *, companion: bool = False,
                              antithetic: bool = False, threads: int = 1,
                              chunk: int = DEFAULT_CHUNK) -> EnsembleRun:
    """Integrate ``n_trajectories`` independent paths and keep snapshots on ``t_grid``.

    Trajectories are processed in fixed chunks of ``chunk`` paths; ``threads``
    only changes how many chunks run concurrently, never the results.
    """
    counts = _step_counts(t_grid, config.dt)
    if counts[-1] * config.dt > config.t_end * (1 + 1e-12):
        raise ConfigurationError("output times exceed t_end")
    if companion and not config.noise.is_additive:
        raise ConfigurationError("a linear companion needs additive noise")
    if antithetic and n_trajectories % 2:
        raise ConfigurationError("antithetic sampling needs an even number of trajectories")
    if n_trajectories < 1:
        raise ConfigurationError("need at least one trajectory")
    groups = [np.arange(s, min(s + chunk, n_trajectories)) for s in range(0, n_trajectories, chunk)]

    def work(idx):
        return _run_chunk(config, counts, master_seed, idx, companion, antithetic)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, groups))
    else:
        parts = [work(g) for g in groups]
    coeffs = np.concatenate([p[0] for p in parts])
    comp = np.concatenate([p[1] for p in parts]) if companion else None
    blowups = [b for p in parts for b in p[2]]
    if blowups:
        logger.warning("%d of %d trajectories blew up", len(blowups), n_trajectories)
    return EnsembleRun(config.basis, counts * config.dt, coeffs, master_seed,
                       antithetic, comp, blowups)


def simulate_burgers(config: SolverConfig, t_grid, stream: nz.RngStream) -> BurgersTrajectory:
    """Single path with snapshots on ``t_grid``; raises on blow-up."""
    counts = _step_counts(t_grid, config.dt)
    stepper = Stepper(config)
    threshold = config.blowup_factor * _noise_scale(config, stepper)
    a = config.initial_coeffs
    out = np.empty((counts.size, config.basis.n_modes))
    done = 0
    for j, target in enumerate(counts):
        while done < target:
            z = stream.normal(stepper.noise_width) if stepper.noise_width else None
            a, _ = stepper.advance(a, z)
            done += 1
            if not np.linalg.norm(a) < threshold:
                raise IntegrationError("blow-up", done * config.dt)
        out[j] = a
    return BurgersTrajectory(config.basis, counts * config.dt, out)


def cole_hopf_reference(initial: SpectralField, nu: float, L: float, t: float, x_points,
                        resolution: int = 2048) -> np.ndarray:
    """Deterministic viscous Burgers solution through ``u = -2 nu phi_x / phi``.

    ``phi`` solves the heat equation with zero-flux ends on ``[-L, L]``
    (the image of the Dirichlet condition on ``u``), started from
    ``exp(-(1/2nu) int_{-L}^x u0)``; it is advanced in a cosine series with
    ``resolution`` modes.
    """
    basis = initial.basis
    if basis.domain.bc != DIRICHLET:
        raise ConfigurationError("the Cole-Hopf reference expects a sine-series initial field")
    a = np.asarray(initial.coeffs)
    freq = basis.frequencies
    M = 2 * L
    y = np.linspace(0.0, M, resolution + 1)
    # antiderivative of each sine mode from the left end
    prim = (1 - np.cos(np.outer(y, freq))) / (np.sqrt(L) * freq)
    exponent = -(prim @ a) / (2 * nu)
    phi0 = np.exp(exponent - exponent.max())
    c = sfft.dct(phi0, type=1) / resolution
    c[0] /= 2
    c[-1] /= 2
    m = np.arange(resolution + 1)
    kappa = np.pi * m / M
    c = c * np.exp(-nu * kappa ** 2 * t)
    yy = np.asarray(x_points, dtype=float) + L
    phase = np.outer(yy, kappa)
    phi = np.cos(phase) @ c
    dphi = -(np.sin(phase) * kappa) @ c
    if np.any(np.abs(phi) < 1e-300):
        raise ArithmeticError("Cole-Hopf potential vanished")
    return -2 * nu * dphi / phi
