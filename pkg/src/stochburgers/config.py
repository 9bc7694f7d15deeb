"""Run configuration: a strict YAML schema and its translation to solver objects."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import (BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat,
                      PositiveInt, ValidationError, model_validator)

from . import noise as nz
from .spectral import (DIRICHLET, NEUMANN, ConfigurationError, Domain, SpectralBasis,
                       SpectralField, build_basis)

__all__ = [
    "RunConfig",
    "load_config",
    "dump_config",
    "parse_grid",
    "config_digest",
    "POINT_DEFAULT_EPS",
]

POINT_DEFAULT_EPS = 0.5

GridSpec = Union[str, list[float]]


def parse_grid(spec: GridSpec) -> np.ndarray:
    """Expand ``"lin:a:b:n"``, ``"geom:a:b:n"`` or an explicit list of values."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 4 or parts[0] not in ("lin", "geom"):
            raise ConfigurationError(f"grid spec must be 'lin:a:b:n' or 'geom:a:b:n', got {spec!r}")
        try:
            lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as err:
            raise ConfigurationError(f"bad grid spec {spec!r}") from err
        if n < 1:
            raise ConfigurationError("grid needs at least one point")
        if parts[0] == "geom":
            if lo <= 0 or hi <= 0:
                raise ConfigurationError("geometric grids need positive end points")
            return np.geomspace(lo, hi, n)
        return np.linspace(lo, hi, n)
    values = np.asarray(spec, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ConfigurationError("grid must be a nonempty list of numbers")
    return values


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DomainBlock(_Strict):
    length: PositiveFloat
    bc: Literal["neumann", "dirichlet"]
    viscosity: PositiveFloat
    hyper_eps: Optional[NonNegativeFloat] = None


class NoiseBlock(_Strict):
    kind: Literal["boundary_white", "point_white", "body_white", "body_trace_class",
                  "multiplicative_scalar"]
    intensity: NonNegativeFloat
    q: Optional[Union[str, list[NonNegativeFloat]]] = None
    location: Optional[float] = None

    @model_validator(mode="after")
    def _q_form(self):
        if isinstance(self.q, str):
            text = self.q.replace(" ", "")
            if not text.startswith("k^-"):
                raise ValueError("q must be 'k^-p' or a list of eigenvalues")
            float(text[3:])
        return self


class InitialBlock(_Strict):
    mode: Optional[PositiveInt] = None
    amplitude: float = 1.0
    coeffs: Optional[list[float]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.mode is None) == (self.coeffs is None):
            raise ValueError("initial condition needs exactly one of mode or coeffs")
        return self


class DiscretizationBlock(_Strict):
    modes: PositiveInt
    output_times: GridSpec
    dt: Optional[PositiveFloat] = None
    t_end: Optional[PositiveFloat] = None
    dealias_fraction: float = Field(default=2.0 / 3.0, gt=0, le=1)


class EnsembleBlock(_Strict):
    trajectories: int = Field(ge=2)
    master_seed: int = Field(ge=0, lt=2 ** 64)
    antithetic: bool = False
    companion: bool = False


class DiagnosticsBlock(_Strict):
    r_grid: Optional[GridSpec] = None
    fit_window: Optional[tuple[PositiveFloat, PositiveFloat]] = None
    large_t_window: Optional[tuple[PositiveFloat, PositiveFloat]] = None
    threshold: PositiveFloat = 0.2
    slack: PositiveFloat = 3.0


class RunConfig(_Strict):
    """Complete description of one ensemble run and its diagnostics."""

    model: Literal["linear", "burgers"]
    domain: DomainBlock
    noise: NoiseBlock
    discretization: DiscretizationBlock
    ensemble: EnsembleBlock
    initial: Optional[InitialBlock] = None
    diagnostics: DiagnosticsBlock = DiagnosticsBlock()

    @model_validator(mode="after")
    def _consistent(self):
        d, n, disc = self.domain, self.noise, self.discretization
        if n.kind == "point_white" and d.hyper_eps == 0:
            raise ValueError("point noise requires hyper_eps > 0")
        if n.kind == "body_trace_class" and n.q is None:
            raise ValueError("trace-class noise needs q")
        if n.kind != "body_trace_class" and n.q is not None:
            raise ValueError(f"{n.kind} noise takes no q")
        if self.model == "linear":
            if n.kind in ("multiplicative_scalar", "point_white"):
                raise ValueError("linear runs take boundary or body noise")
            if n.kind == "boundary_white" and d.bc != "neumann":
                raise ValueError("boundary noise is defined on the Neumann interval")
            if self.initial is not None:
                raise ValueError("linear runs start from zero; drop the initial block")
        else:
            if d.bc != "dirichlet":
                raise ValueError("Burgers runs need bc: dirichlet")
            if n.kind == "boundary_white":
                raise ValueError("Burgers runs do not support boundary noise")
            if disc.dt is None or disc.t_end is None:
                raise ValueError("Burgers runs need dt and t_end")
        if self.ensemble.antithetic and self.ensemble.trajectories % 2:
            raise ValueError("antithetic sampling needs an even number of trajectories")
        if self.ensemble.companion and self.model != "burgers":
            raise ValueError("the linear companion applies to Burgers runs")
        parse_grid(disc.output_times)
        if self.diagnostics.r_grid is not None:
            parse_grid(self.diagnostics.r_grid)
        return self

    # translation to library objects

    @property
    def hyper_eps(self) -> float:
        if self.domain.hyper_eps is not None:
            return self.domain.hyper_eps
        return POINT_DEFAULT_EPS if self.noise.kind == "point_white" else 0.0

    def build_domain(self) -> Domain:
        bc = NEUMANN if self.domain.bc == "neumann" else DIRICHLET
        return Domain(self.domain.length, bc, self.domain.viscosity, self.hyper_eps)

    def build_basis(self) -> SpectralBasis:
        return _cached_basis(self.build_domain(), self.discretization.modes)

    def noise_spec(self) -> nz.NoiseSpec:
        n = self.noise
        if n.kind == "body_trace_class":
            if isinstance(n.q, str):
                return nz.NoiseSpec.trace_class(n.intensity, exponent=float(n.q.replace(" ", "")[3:]))
            return nz.NoiseSpec.trace_class(n.intensity, q=n.q)
        if n.kind == "point_white":
            return nz.NoiseSpec.point(n.intensity, 0.0 if n.location is None else n.location)
        return nz.NoiseSpec(n.kind, n.intensity)

    def output_times(self) -> np.ndarray:
        return parse_grid(self.discretization.output_times)

    def r_grid(self) -> np.ndarray | None:
        spec = self.diagnostics.r_grid
        return None if spec is None else parse_grid(spec)

    def initial_field(self, basis: SpectralBasis) -> SpectralField | None:
        init = self.initial
        if init is None:
            return None
        if init.coeffs is not None:
            if len(init.coeffs) != basis.n_modes:
                raise ConfigurationError(f"initial coeffs need {basis.n_modes} entries")
            return SpectralField(basis, np.asarray(init.coeffs))
        return SpectralField.single_mode(basis, init.mode, init.amplitude)

    def solver_config(self):
        from .burgers import SolverConfig

        basis = self.build_basis()
        disc = self.discretization
        return SolverConfig(basis, disc.dt, disc.t_end, self.noise_spec(),
                            self.initial_field(basis), disc.dealias_fraction)


_BASES: dict[tuple, SpectralBasis] = {}


def _cached_basis(domain: Domain, modes: int) -> SpectralBasis:
    # one basis object per (domain, N) so the innovation factor cache is reused
    key = (domain, modes)
    if key not in _BASES:
        _BASES[key] = build_basis(domain, modes)
    return _BASES[key]


def load_config(source: str | Path | dict) -> RunConfig:
    """Parse a YAML file (or an already loaded mapping) into a validated config.

    A run manifest is accepted too; its embedded config is used.
    """
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = yaml.safe_load(Path(source).read_text())
        except OSError as err:
            raise ConfigurationError(f"cannot read config {source}: {err}") from err
        except yaml.YAMLError as err:
            raise ConfigurationError(f"malformed YAML in {source}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping")
    if "config" in data and "files" in data:
        # a run manifest carries its resolved config
        data = data["config"]
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigurationError(str(err)) from err


def dump_config(cfg: RunConfig) -> str:
    """Canonical YAML text; ``load_config`` of it gives back ``cfg``."""
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


def config_digest(cfg: RunConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()
