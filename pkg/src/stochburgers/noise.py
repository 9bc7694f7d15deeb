"""Noise regimes and reproducible random streams.

Every forcing is reduced to per-step increments of the spectral
coefficients. Additive increments are the exact Ornstein-Uhlenbeck
innovations ``int_0^h exp(lambda_k (h - s)) dW_k(s)`` of each mode, so a
linear problem is integrated exactly in distribution for any step size.

Boundary and point forcing drive every mode with the *same* scalar Brownian
motion, which makes the innovations correlated across modes. Their joint
covariance is factorized once per ``(basis, h)`` and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import exprel

from .spectral import ConfigurationError, SpectralBasis

__all__ = [
    "BOUNDARY_WHITE",
    "POINT_WHITE",
    "BODY_WHITE",
    "BODY_TRACE_CLASS",
    "MULTIPLICATIVE_SCALAR",
    "NoiseSpec",
    "RngStream",
    "BlockedNormals",
    "gaussian_increments",
    "correlated_covariance",
    "correlated_factor",
    "apply_factor",
    "correlated_mode_increments",
    "independent_mode_std",
    "independent_mode_increments",
]

BOUNDARY_WHITE = "boundary_white"
POINT_WHITE = "point_white"
BODY_WHITE = "body_white"
BODY_TRACE_CLASS = "body_trace_class"
MULTIPLICATIVE_SCALAR = "multiplicative_scalar"

_KINDS = (BOUNDARY_WHITE, POINT_WHITE, BODY_WHITE, BODY_TRACE_CLASS, MULTIPLICATIVE_SCALAR)
CORRELATED_KINDS = (BOUNDARY_WHITE, POINT_WHITE)
INDEPENDENT_KINDS = (BODY_WHITE, BODY_TRACE_CLASS)


@dataclass(frozen=True)
class NoiseSpec:
    """One forcing regime and its intensity.

    ``intensity`` is ``alpha`` for boundary/point noise and ``sigma`` for
    body and multiplicative noise. Trace-class covariance eigenvalues are
    given either explicitly (``q``) or as a power law ``q_k = k^-q_exponent``.
    """

    kind: str
    intensity: float
    q: tuple[float, ...] | None = None
    q_exponent: float | None = None
    location: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown noise kind {self.kind!r}")
        if not self.intensity >= 0:
            raise ConfigurationError(f"noise intensity must be nonnegative, got {self.intensity}")
        if self.kind == BODY_TRACE_CLASS:
            if (self.q is None) == (self.q_exponent is None):
                raise ConfigurationError("trace-class noise needs exactly one of q or q_exponent")
            if self.q is not None and any(v < 0 or not np.isfinite(v) for v in self.q):
                raise ConfigurationError("trace-class eigenvalues must be finite and nonnegative")
            if self.q_exponent is not None and self.q_exponent <= 1:
                raise ConfigurationError("q_k = k^-p is trace class only for p > 1")
        elif self.q is not None or self.q_exponent is not None:
            raise ConfigurationError(f"{self.kind} noise takes no covariance eigenvalues")
        if self.location is not None and self.kind != POINT_WHITE:
            raise ConfigurationError("only point noise has a location")

    @classmethod
    def boundary(cls, alpha: float) -> "NoiseSpec":
        return cls(BOUNDARY_WHITE, alpha)

    @classmethod
    def point(cls, alpha: float, location: float = 0.0) -> "NoiseSpec":
        return cls(POINT_WHITE, alpha, location=location)

    @classmethod
    def body(cls, sigma: float) -> "NoiseSpec":
        return cls(BODY_WHITE, sigma)

    @classmethod
    def trace_class(cls, sigma: float, q=None, exponent: float | None = None) -> "NoiseSpec":
        q = None if q is None else tuple(float(v) for v in q)
        return cls(BODY_TRACE_CLASS, sigma, q=q, q_exponent=exponent)

    @classmethod
    def multiplicative(cls, sigma: float) -> "NoiseSpec":
        return cls(MULTIPLICATIVE_SCALAR, sigma)

    @property
    def is_correlated(self) -> bool:
        return self.kind in CORRELATED_KINDS

    @property
    def is_additive(self) -> bool:
        return self.kind != MULTIPLICATIVE_SCALAR

    def q_values(self, basis: SpectralBasis) -> np.ndarray:
        """Covariance eigenvalue for each retained mode (ones for white noise)."""
        k = basis.wavenumbers
        if self.kind == BODY_WHITE:
            return np.ones(k.size)
        if self.kind != BODY_TRACE_CLASS:
            raise ConfigurationError(f"{self.kind} noise has no covariance eigenvalues")
        if self.q is not None:
            if len(self.q) < k.size:
                raise ConfigurationError(f"need {k.size} covariance eigenvalues, got {len(self.q)}")
            return np.asarray(self.q[: k.size], dtype=float)
        kk = np.where(k == 0, 1, k).astype(float)
        return kk ** -self.q_exponent

    def trace(self, basis: SpectralBasis) -> float:
        """``Tr(Q)`` over the retained modes."""
        return float(np.sum(self.q_values(basis)))

    def forcing_values(self, basis: SpectralBasis) -> np.ndarray:
        """``e_k(x0)`` at the forcing location of boundary or point noise."""
        if not self.is_correlated:
            raise ConfigurationError(f"{self.kind} noise has no forcing point")
        if self.location is None or self.location == basis.point:
            return np.asarray(basis.boundary_values)
        lo, hi = basis.domain.interval
        if not lo <= self.location <= hi:
            raise ConfigurationError(f"forcing point {self.location} outside {basis.domain.interval}")
        return basis.eigenfunctions(np.array([self.location]))[0]


@dataclass
class RngStream:
    """Normal variates for one trajectory.

    ``(master_seed, trajectory_index)`` fixes the whole sequence; the
    Philox counter generator keeps distinct indices independent. ``counter``
    records how many variates have been consumed.
    """

    master_seed: int
    trajectory_index: int
    counter: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.trajectory_index < 0:
            raise ValueError("trajectory_index must be nonnegative")
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.trajectory_index,))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def normal(self, shape) -> np.ndarray:
        out = self._gen.standard_normal(shape)
        self.counter += out.size
        return out


class BlockedNormals:
    """Per-step standard normals for a group of trajectories.

    Each trajectory draws ``block`` steps at a time from its own stream, so
    the values a trajectory sees do not depend on which other trajectories
    share the group. With ``antithetic=True`` trajectories ``2j`` and
    ``2j + 1`` share stream ``j`` with opposite signs.
    """

    def __init__(self, master_seed: int, indices, width: int, block: int = 32,
                 antithetic: bool = False):
        self.indices = np.asarray(indices, dtype=int)
        self.width = int(width)
        self.block = int(block)
        self.antithetic = antithetic
        if antithetic:
            pair_ids, self._rows = np.unique(self.indices // 2, return_inverse=True)
            self._signs = np.where(self.indices % 2 == 0, 1.0, -1.0)[:, None]
            self.streams = [RngStream(master_seed, int(p)) for p in pair_ids]
        else:
            self.streams = [RngStream(master_seed, int(i)) for i in self.indices]
        self._buffer = None
        self._pos = self.block

    def next(self) -> np.ndarray:
        """Array of shape ``(len(indices), width)``."""
        if self.width == 0:
            return np.zeros((self.indices.size, 0))
        if self._pos == self.block:
            self._buffer = np.stack([s.normal((self.block, self.width)) for s in self.streams])
            self._pos = 0
        z = self._buffer[:, self._pos, :]
        self._pos += 1
        if self.antithetic:
            return self._signs * z[self._rows]
        return z


def gaussian_increments(stream: RngStream, count: int, variance: float) -> np.ndarray:
    """``count`` i.i.d. centred normals with the given variance."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    return np.sqrt(variance) * stream.normal(int(count))


def _ou_integral(rate: np.ndarray, h: float) -> np.ndarray:
    # int_0^h exp(rate * s) ds, continuous through rate = 0
    return h * exprel(rate * h)


def correlated_covariance(basis: SpectralBasis, values: np.ndarray, h: float,
                          damping: float = 0.0) -> np.ndarray:
    """Unit-intensity covariance of the shared-Brownian-motion innovations."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if damping < 0:
        raise ValueError("damping must be nonnegative")
    shifted = basis.eigenvalues - damping
    rates = shifted[:, None] + shifted[None, :]
    return np.outer(values, values) * _ou_integral(rates, h)


@lru_cache(maxsize=64)
def _factor_cached(basis: SpectralBasis, values: tuple, h: float, damping: float) -> np.ndarray:
    cov = correlated_covariance(basis, np.array(values), h, damping)
    w, V = np.linalg.eigh(cov)
    trace = float(np.trace(cov))
    if w.min() < -1e-12 * max(trace, np.finfo(float).tiny):
        raise ArithmeticError(
            f"innovation covariance is not positive semidefinite (min eigenvalue {w.min():.3e})"
        )
    F = V * np.sqrt(np.clip(w, 0.0, None))
    F.setflags(write=False)
    return F


def correlated_factor(basis: SpectralBasis, spec: NoiseSpec, h: float,
                      damping: float = 0.0) -> np.ndarray:
    """``F`` with ``F F^T`` equal to the unit-intensity innovation covariance."""
    values = tuple(float(v) for v in spec.forcing_values(basis))
    return _factor_cached(basis, values, float(h), float(damping))


def apply_factor(z: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``z @ F.T`` evaluated row by row, so a row's result does not depend on
    how many other rows are in the batch (BLAS blocking would)."""
    return np.einsum("...j,kj->...k", z, F)


def correlated_mode_increments(basis: SpectralBasis, spec: NoiseSpec, h: float,
                               damping: float = 0.0, stream: RngStream | None = None,
                               z: np.ndarray | None = None) -> np.ndarray:
    """Innovations ``g e_k(x0) int_0^h exp((lambda_k - damping)(h - s)) dbeta(s)``
    for all modes, driven by one scalar Brownian path.

    Pass either a stream or pre-drawn standard normals ``z`` (last axis of
    length ``n_modes``).
    """
    if not spec.is_correlated:
        raise ConfigurationError(f"{spec.kind} noise does not drive modes jointly")
    F = correlated_factor(basis, spec, h, damping)
    if z is None:
        z = stream.normal(basis.n_modes)
    return spec.intensity * apply_factor(z, F)


def independent_mode_std(basis: SpectralBasis, spec: NoiseSpec, h: float) -> np.ndarray:
    """Standard deviation of each mode's innovation for body noise."""
    if spec.kind not in INDEPENDENT_KINDS:
        raise ConfigurationError(f"{spec.kind} noise does not drive modes independently")
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    var = spec.q_values(basis) * _ou_integral(2 * basis.eigenvalues, h)
    return np.sqrt(var)


def independent_mode_increments(basis: SpectralBasis, spec: NoiseSpec, h: float,
                                stream: RngStream | None = None,
                                z: np.ndarray | None = None) -> np.ndarray:
    """Independent exact OU innovations, variance ``sigma^2 q_k (1 - e^{2 lambda_k h}) / (-2 lambda_k)``."""
    std = independent_mode_std(basis, spec, h)
    if z is None:
        z = stream.normal(basis.n_modes)
    return spec.intensity * (std * z)
