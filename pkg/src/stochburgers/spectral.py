"""Eigenbases, semigroups and field synthesis on an interval.

Two operator families are supported:

``neumann``
    ``A = nu d^2/dx^2`` on ``[0, L]`` with zero-flux ends. Modes ``k = 0..N``,
    ``e_0 = 1/sqrt(L)``, ``e_k(x) = sqrt(2/L) cos(pi k x / L)``.

``dirichlet``
    ``A_eps = -nu (-d^2/dx^2)^(1+eps)`` on ``[-L, L]`` with zero ends. Modes
    ``k = 1..N``, ``e_k(x) = sin(pi k (x + L) / (2L)) / sqrt(L)``. With
    ``eps = 0`` this is the ordinary viscous operator.

All coefficient arrays keep the mode index on the last axis, so a stack of
fields (an ensemble) is just an array with extra leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NEUMANN",
    "DIRICHLET",
    "ConfigurationError",
    "Domain",
    "SpectralBasis",
    "SpectralField",
    "build_basis",
    "semigroup_apply",
    "evaluate_field",
    "neumann_map",
    "neumann_map_profile",
]

NEUMANN = "neumann"
DIRICHLET = "dirichlet"


class ConfigurationError(ValueError):
    """Raised for inconsistent model or discretization parameters."""


@dataclass(frozen=True)
class Domain:
    """Interval, boundary condition and dissipation of the model.

    ``length`` is the half-width ``L`` for Dirichlet problems (domain
    ``[-L, L]``) and the full width for Neumann problems (domain ``[0, L]``).
    """

    length: float
    bc: str = NEUMANN
    viscosity: float = 1.0
    hyper_eps: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigurationError(f"length must be positive, got {self.length}")
        if not self.viscosity > 0:
            raise ConfigurationError(f"viscosity must be positive, got {self.viscosity}")
        if not self.hyper_eps >= 0:
            raise ConfigurationError(f"hyper_eps must be nonnegative, got {self.hyper_eps}")
        if self.bc not in (NEUMANN, DIRICHLET):
            raise ConfigurationError(f"unknown boundary condition {self.bc!r}")

    @property
    def interval(self) -> tuple[float, float]:
        if self.bc == NEUMANN:
            return 0.0, float(self.length)
        return -float(self.length), float(self.length)

    @property
    def size(self) -> float:
        """Measure of the interval."""
        lo, hi = self.interval
        return hi - lo

    @property
    def poincare_constant(self) -> float:
        """Sharp ``c`` in ``||u||^2 <= c ||u_x||^2`` for Dirichlet data."""
        return (self.size / np.pi) ** 2


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenpairs of the interval operator truncated at ``mode_count``.

    ``boundary_values`` holds ``e_k(point)``; the point defaults to the
    left end for Neumann bases and to the midpoint ``x = 0`` for Dirichlet
    bases, which are the forcing locations used throughout.
    """

    domain: Domain
    mode_count: int
    point: float
    wavenumbers: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    boundary_values: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.wavenumbers.size

    @property
    def has_mean_mode(self) -> bool:
        return self.domain.bc == NEUMANN

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequency of each mode in ``x``."""
        if self.domain.bc == NEUMANN:
            return np.pi * self.wavenumbers / self.domain.length
        return np.pi * self.wavenumbers / (2 * self.domain.length)

    def eigenfunctions(self, x) -> np.ndarray:
        """Matrix ``E[i, k] = e_k(x_i)``; ``x`` may lie outside the interval
        (the series then gives the even/odd periodic extension)."""
        x = np.asarray(x, dtype=float)
        L = self.domain.length
        if self.domain.bc == NEUMANN:
            E = np.sqrt(2.0 / L) * np.cos(np.multiply.outer(x, self.frequencies))
            E[..., self.wavenumbers == 0] = 1.0 / np.sqrt(L)
            return E
        return np.sin(np.multiply.outer(x + L, self.frequencies)) / np.sqrt(L)

    def mode_integrals(self) -> np.ndarray:
        """``int e_k dx`` over the interval, one entry per mode."""
        L = self.domain.length
        k = self.wavenumbers
        if self.domain.bc == NEUMANN:
            return np.where(k == 0, np.sqrt(L), 0.0)
        return 2 * np.sqrt(L) * (1 - (-1.0) ** k) / (np.pi * k)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficient vector of a field in ``basis``."""

    basis: SpectralBasis
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.n_modes,):
            raise ConfigurationError(
                f"expected {self.basis.n_modes} coefficients, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("field coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, basis: SpectralBasis) -> "SpectralField":
        return cls(basis, np.zeros(basis.n_modes))

    @classmethod
    def single_mode(cls, basis: SpectralBasis, k: int, amplitude: float = 1.0) -> "SpectralField":
        coeffs = np.zeros(basis.n_modes)
        idx = np.flatnonzero(basis.wavenumbers == k)
        if idx.size != 1:
            raise ConfigurationError(f"mode {k} is not in the basis")
        coeffs[idx[0]] = amplitude
        return cls(basis, coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def build_basis(domain: Domain, mode_count: int, point: float | None = None) -> SpectralBasis:
    """Eigenpairs for ``domain`` with ``mode_count`` nonconstant modes.

    Neumann bases carry ``mode_count + 1`` modes (the constant included),
    Dirichlet bases ``mode_count``.
    """
    if int(mode_count) != mode_count or mode_count < 1:
        raise ConfigurationError(f"mode_count must be a positive integer, got {mode_count}")
    mode_count = int(mode_count)
    lo, hi = domain.interval
    if point is None:
        point = lo if domain.bc == NEUMANN else 0.0
    if not lo <= point <= hi:
        raise ConfigurationError(f"forcing point {point} outside {domain.interval}")

    if domain.bc == NEUMANN:
        k = np.arange(0, mode_count + 1)
        freq = np.pi * k / domain.length
    else:
        k = np.arange(1, mode_count + 1)
        freq = np.pi * k / (2 * domain.length)
    lam = -domain.viscosity * freq ** (2 + 2 * domain.hyper_eps)
    for arr in (k, lam):
        arr.setflags(write=False)

    basis = SpectralBasis(domain, mode_count, float(point), k, lam, np.empty(0))
    values = basis.eigenfunctions(np.array([point]))[0]
    values.setflags(write=False)
    object.__setattr__(basis, "boundary_values", values)

    nonconstant = lam[k > 0]
    if np.any(nonconstant >= 0) or np.any(np.diff(lam) >= 0):
        raise ConfigurationError("eigenvalues must be negative and strictly decreasing")
    return basis


def semigroup_apply(fld: SpectralField, t: float) -> SpectralField:
    """Heat-type semigroup ``e^{tA}``: mode ``k`` is multiplied by ``exp(lambda_k t)``."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return SpectralField(fld.basis, fld.coeffs * np.exp(fld.basis.eigenvalues * t))


def evaluate_field(fld: SpectralField, points) -> np.ndarray:
    """Synthesize ``sum_k a_k e_k(x)`` at ``points`` inside the interval."""
    points = np.asarray(points, dtype=float)
    lo, hi = fld.basis.domain.interval
    tol = 1e-12 * (hi - lo)
    if np.any(points < lo - tol) or np.any(points > hi + tol):
        raise ValueError(f"evaluation points must lie in [{lo}, {hi}]")
    return fld.basis.eigenfunctions(points) @ fld.coeffs


def neumann_map_profile(gamma: float, domain: Domain, x) -> np.ndarray:
    """Closed-form lift ``D(gamma)(x)`` solving ``(1 - A) D = 0`` with
    ``D'(0) = gamma`` and ``D'(L) = 0``.

    Written with negative exponents only so large ``L / sqrt(nu)`` cannot
    overflow.
    """
    if domain.bc != NEUMANN:
        raise ConfigurationError("the Neumann map is defined for Neumann domains only")
    s = np.sqrt(domain.viscosity)
    L = domain.length
    x = np.asarray(x, dtype=float)
    num = np.exp((x - 2 * L) / s) + np.exp(-x / s)
    return gamma * s * num / np.expm1(-2 * L / s)


def neumann_map(gamma: float, domain: Domain, mode_count: int = 64) -> SpectralField:
    """Projection of the Neumann lift onto the cosine basis.

    Uses ``<D, e_k> (1 - lambda_k) = -nu gamma e_k(0)``, which follows from
    integrating by parts against the eigenfunctions.
    """
    if domain.bc != NEUMANN:
        raise ConfigurationError("the Neumann map is defined for Neumann domains only")
    basis = build_basis(domain, mode_count)
    coeffs = -domain.viscosity * gamma * basis.boundary_values / (1 - basis.eigenvalues)
    return SpectralField(basis, coeffs)
