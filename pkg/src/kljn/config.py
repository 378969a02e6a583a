"""System configuration: all physical and protocol parameters in one record.

Configs load from a flat ``key = value`` text file. Unknown keys are errors:
a silently ignored typo in a physics parameter is the main operator hazard.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

from .analytic import ThresholdFractions
from .circuit import PhysicsConstants, ResistorSet, LevelTable, theoretical_levels
from .decision import DecisionBands, make_bands
from .estimator import AveragingWindow

MODES = ("voltage_only", "current_only", "combined")


class ConfigError(ValueError):
    """Invalid or malformed configuration."""


@dataclass(frozen=True)
class SystemConfig:
    r: float = 1.0  # Ohm, low resistor value R0
    alpha: float = 10.0  # R1 / R0
    t_eff: float | str = "normalized"  # Kelvin, or "normalized" for 4kT_eff = 1
    b_kljn: float = 1.0  # Hz, noise bandwidth
    gamma: float = 100.0  # bandwidth * averaging period
    oversample: int = 4  # f_s = oversample * b_kljn
    beta: float = 0.5
    delta: float = 0.5
    lam: float = 0.5
    rho: float = 0.5
    n_periods: int = 1000
    master_seed: int = 1
    mode: str = "combined"

    def __post_init__(self):
        if self.oversample < 2:
            raise ConfigError(f"oversample must be >= 2, got {self.oversample}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_periods < 0:
            raise ConfigError(f"n_periods must be >= 0, got {self.n_periods}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must fit in 64 bits")
        # delegate the physics invariants so the error names the constraint
        try:
            self.constants
            self.resistors
            self.fractions
            self.window
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def normalized(self) -> bool:
        return isinstance(self.t_eff, str)

    @property
    def constants(self) -> PhysicsConstants:
        if self.normalized:
            if self.t_eff != "normalized":
                raise ConfigError(f"t_eff must be a temperature or 'normalized', got {self.t_eff!r}")
            return PhysicsConstants.normalized()
        return PhysicsConstants.si(self.t_eff)

    @property
    def resistors(self) -> ResistorSet:
        return ResistorSet(r_low=self.r, alpha=self.alpha)

    @property
    def fractions(self) -> ThresholdFractions:
        return ThresholdFractions(beta=self.beta, delta=self.delta, lam=self.lam, rho=self.rho)

    @property
    def window(self) -> AveragingWindow:
        return AveragingWindow(gamma=self.gamma, bandwidth=self.b_kljn)

    @property
    def sample_rate(self) -> float:
        return self.oversample * self.b_kljn

    @property
    def samples_per_period(self) -> int:
        # even count so the trailing-half measurement window is exact
        n = int(round(self.sample_rate * self.window.tau))
        return n + (n % 2)

    def levels(self) -> LevelTable:
        return theoretical_levels(self.resistors, self.constants, self.b_kljn)

    def bands(self) -> DecisionBands:
        return make_bands(self.levels(), self.fractions)

    def resolved_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["tau"] = self.window.tau
        out["f_b"] = self.window.f_b
        out["sample_rate"] = self.sample_rate
        out["samples_per_period"] = self.samples_per_period
        return out

    def config_hash(self) -> str:
        canon = "\n".join(f"{k}={v!r}" for k, v in sorted(self.resolved_dict().items()))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


_FIELD_TYPES = {
    "r": float,
    "alpha": float,
    "t_eff": "t_eff",
    "b_kljn": float,
    "gamma": float,
    "oversample": int,
    "beta": float,
    "delta": float,
    "lam": float,
    "rho": float,
    "n_periods": int,
    "master_seed": int,
    "mode": str,
}
# accept the symbol name used in the formulas as an alias
_KEY_ALIASES = {"lambda": "lam"}


def parse_config(text: str, source: str = "<config>") -> SystemConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = _KEY_ALIASES.get(key.strip(), key.strip())
        val = val.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        typ = _FIELD_TYPES[key]
        try:
            if typ == "t_eff":
                values[key] = val if val == "normalized" else float(val)
            else:
                values[key] = typ(val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    try:
        return SystemConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def with_overrides(config: SystemConfig, **kwargs) -> SystemConfig:
    """New config with some fields replaced, revalidated."""
    try:
        return replace(config, **{k: v for k, v in kwargs.items() if v is not None})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
