"""Run configuration shared by the library and the CLI."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .collapse import FlipConvention
from .majorana_ode import METHODS, OdeParams
from .model import PhysicalConstants
from .sampling import Distribution

EXPERIMENT_CURRENTS = (0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    currents: tuple = EXPERIMENT_CURRENTS
    velocity: float = 800.0
    z_a: float = 1.05e-4
    B_r: float = 0.42e-4
    n_samples: int = 20_000
    distribution: Distribution = Distribution.ANISOTROPIC
    flip_convention: FlipConvention = FlipConvention.COLLAPSE_DOWN_IS_FLIP
    tau_start: float = -30.0
    tau_end: float = 60.0
    tail_start: float = 52.0
    n_tail: int = 187
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    seed: int = 1933
    method: str = "dop853"
    initial_slope: str = "zero"
    on_error: str = "abort"
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        try:
            object.__setattr__(self, "currents", tuple(float(c) for c in self.currents))
            object.__setattr__(self, "distribution", Distribution(self.distribution))
            object.__setattr__(self, "flip_convention", FlipConvention(self.flip_convention))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if not self.currents:
            raise ConfigError("currents must not be empty")
        if any(not (c > 0 and math.isfinite(c)) for c in self.currents):
            raise ConfigError("currents must all be > 0")
        if isinstance(self.n_samples, bool) or not isinstance(self.n_samples, int) or self.n_samples < 1:
            raise ConfigError(f"n_samples must be an integer >= 1, got {self.n_samples!r}")
        for name in ("velocity", "z_a", "B_r", "rel_tol", "abs_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if not self.tau_start < self.tail_start < self.tau_end:
            raise ConfigError("need tau_start < tail_start < tau_end")
        if not isinstance(self.n_tail, int) or self.n_tail < 1:
            raise ConfigError("n_tail must be an integer >= 1")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.initial_slope not in ("zero", "adiabatic"):
            raise ConfigError("initial_slope must be 'zero' or 'adiabatic'")
        if self.on_error not in ("abort", "skip"):
            raise ConfigError("on_error must be 'abort' or 'skip'")

    def ode_params(self, k0, k1, w_n, phi_n0):
        return OdeParams(
            k0=k0,
            k1=k1,
            w_n=w_n,
            phi_n0=phi_n0,
            tau_start=self.tau_start,
            tau_end=self.tau_end,
            tail_start=self.tail_start,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            n_tail=self.n_tail,
            method=self.method,
            initial_slope=self.initial_slope,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["currents"] = list(self.currents)
        d["distribution"] = self.distribution.value
        d["flip_convention"] = self.flip_convention.value
        d["constants"] = dataclasses.asdict(self.constants)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "constants" in data:
            consts = data["constants"]
            if not isinstance(consts, dict):
                raise ConfigError("constants must be an object")
            bad = set(consts) - {f.name for f in dataclasses.fields(PhysicalConstants)}
            if bad:
                raise ConfigError(f"unknown constants: {sorted(bad)}")
            try:
                data["constants"] = PhysicalConstants(**consts)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
