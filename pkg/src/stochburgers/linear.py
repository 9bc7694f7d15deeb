"""Exact simulation of the linear solutions ``Z`` (boundary noise) and ``W_A`` (body noise).

Each mode is an Ornstein-Uhlenbeck process, so between output times the
update ``a <- exp(lambda h) a + xi`` with exact innovations ``xi`` is exact
in distribution; no time step is involved.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import noise as nz
from .spectral import ConfigurationError, SpectralBasis, SpectralField

__all__ = [
    "EnsembleRun",
    "LinearTrajectory",
    "simulate_linear",
    "simulate_linear_ensemble",
    "trajectory_to_grid",
]


@dataclass
class EnsembleRun:
    """Snapshots of ``M`` trajectories at common output times.

    ``coeffs`` has shape ``(M, n_times, n_modes)``. ``companion`` holds the
    linear solution driven by the same innovations, when requested.
    Trajectories that blew up are NaN from their failure onward and listed
    in ``blowups`` as ``(index, time)``.
    """

    basis: SpectralBasis
    times: np.ndarray
    coeffs: np.ndarray
    master_seed: int
    antithetic: bool = False
    companion: np.ndarray | None = None
    blowups: list[tuple[int, float]] = field(default_factory=list)

    @property
    def n_trajectories(self) -> int:
        return self.coeffs.shape[0]


@dataclass
class LinearTrajectory:
    basis: SpectralBasis
    times: np.ndarray
    coeffs: np.ndarray  # (n_times, n_modes); row 0 is the zero initial state
    noise: nz.NoiseSpec
    master_seed: int
    trajectory_index: int

    @property
    def snapshots(self) -> list[SpectralField]:
        return [SpectralField(self.basis, c) for c in self.coeffs]


def _with_origin(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ConfigurationError("output times must be nonnegative and strictly increasing")
    return t if t[0] == 0 else np.concatenate([[0.0], t])


class _Propagator:
    """Exact transition for each step ``h`` of the time grid."""

    def __init__(self, basis: SpectralBasis, spec: nz.NoiseSpec, times: np.ndarray):
        if not spec.is_additive:
            raise ConfigurationError("linear simulation needs additive noise")
        self.basis = basis
        self.spec = spec
        self.steps = np.diff(times)
        self.decay = [np.exp(basis.eigenvalues * h) for h in self.steps]
        if spec.is_correlated:
            self.factors = [nz.correlated_factor(basis, spec, h) for h in self.steps]
        else:
            self.stds = [nz.independent_mode_std(basis, spec, h) for h in self.steps]

    def advance(self, i: int, a: np.ndarray, z: np.ndarray) -> np.ndarray:
        if self.spec.is_correlated:
            xi = self.spec.intensity * nz.apply_factor(z, self.factors[i])
        else:
            xi = self.spec.intensity * (self.stds[i] * z)
        return self.decay[i] * a + xi


def simulate_linear(basis: SpectralBasis, spec: nz.NoiseSpec, t_grid,
                    stream: nz.RngStream) -> LinearTrajectory:
    """One path of the linear problem started from zero, sampled on ``t_grid``
    (``t = 0`` is prepended when missing)."""
    times = _with_origin(t_grid)
    prop = _Propagator(basis, spec, times)
    out = np.zeros((times.size, basis.n_modes))
    for i in range(times.size - 1):
        out[i + 1] = prop.advance(i, out[i], stream.normal(basis.n_modes))
    return LinearTrajectory(basis, times, out, spec, stream.master_seed, stream.trajectory_index)


def simulate_linear_ensemble(basis: SpectralBasis, spec: nz.NoiseSpec, t_grid,
                             n_trajectories: int, master_seed: int, *, threads: int = 1,
                             chunk: int = 256) -> EnsembleRun:
    """``n_trajectories`` paths; row ``i`` equals :func:`simulate_linear` with
    ``RngStream(master_seed, i)``."""
    if n_trajectories < 1:
        raise ConfigurationError("need at least one trajectory")
    times = _with_origin(t_grid)
    prop = _Propagator(basis, spec, times)
    n = basis.n_modes

    def work(idx):
        normals = nz.BlockedNormals(master_seed, idx, n, block=max(times.size - 1, 1))
        out = np.zeros((idx.size, times.size, n))
        for i in range(times.size - 1):
            out[:, i + 1] = prop.advance(i, out[:, i], normals.next())
        return out

    groups = [np.arange(s, min(s + chunk, n_trajectories)) for s in range(0, n_trajectories, chunk)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, groups))
    else:
        parts = [work(g) for g in groups]
    return EnsembleRun(basis, times, np.concatenate(parts), master_seed)


def trajectory_to_grid(traj, x_points) -> np.ndarray:
    """Field values ``u(t_i, x_j)`` as an ``(n_times, n_points)`` matrix."""
    x = np.asarray(x_points, dtype=float)
    lo, hi = traj.basis.domain.interval
    tol = 1e-12 * (hi - lo)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise ValueError(f"evaluation points must lie in [{lo}, {hi}]")
    return traj.coeffs @ traj.basis.eigenfunctions(x).T
