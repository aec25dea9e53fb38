"""Simulation configuration: YAML loading and validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .estimation import EstimationError, ls_estimate
from .metrics import MAX_ENUMERATION_BITS
from .signal import UNIT_MODULUS_TOL, convolution_matrix, symbol_indices


class ConfigError(ValueError):
    pass


class Scenario(str, Enum):
    BLOCK_FADING = "BLOCK_FADING"
    GAUSS_MARKOV = "GAUSS_MARKOV"


class Scheme(str, Enum):
    TWO_PHASE_LS = "TWO_PHASE_LS"
    CONVENTIONAL_LS = "CONVENTIONAL_LS"
    EXHAUSTIVE_NEAR_ML = "EXHAUSTIVE_NEAR_ML"
    EXHAUSTIVE_FULL_ML = "EXHAUSTIVE_FULL_ML"
    CONVENTIONAL_PERFECT_CSI = "CONVENTIONAL_PERFECT_CSI"
    CONVENTIONAL_LMS = "CONVENTIONAL_LMS"

    @property
    def exhaustive(self) -> bool:
        return self in (Scheme.EXHAUSTIVE_NEAR_ML, Scheme.EXHAUSTIVE_FULL_ML)


def _parse_symbol(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex training symbols are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _enum_value(value) -> str:
    return value.value if isinstance(value, Enum) else str(value).upper()


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo experiment.

    ``training_symbols`` entries are real numbers or ``[re, im]`` pairs.
    Sweeping an Eb/N0 point stops after ``blocks_per_point`` blocks, or
    earlier once every scheme has at least ``min_word_errors`` word errors
    (when set).
    """

    scenario: Scenario
    M: int
    P: int
    N: int
    T: int
    training_symbols: tuple
    ebn0_grid_db: tuple
    schemes: tuple
    blocks_per_point: int
    base_seed: int = 0
    alpha: Optional[float] = None
    min_word_errors: Optional[int] = None
    training: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)
        try:
            set_("scenario", Scenario(_enum_value(self.scenario)))
            set_("schemes", tuple(Scheme(_enum_value(s)) for s in self.schemes))
            set_("training_symbols", tuple(_parse_symbol(s) for s in self.training_symbols))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("M", "P", "N", "T", "blocks_per_point", "base_seed"):
            set_(name, int(getattr(self, name)))
        set_("ebn0_grid_db", tuple(float(x) for x in self.ebn0_grid_db))
        if self.alpha is not None:
            set_("alpha", float(self.alpha))
        if self.min_word_errors is not None:
            set_("min_word_errors", int(self.min_word_errors))
        self._validate()
        set_("training", np.array(self.training_symbols, dtype=complex))

    def _validate(self):
        M, P, N, T = self.M, self.P, self.N, self.T
        if M < 1 or P < 1:
            raise ConfigError(f"need M >= 1 and P >= 1, got M={M}, P={P}")
        if len(self.training_symbols) != T:
            raise ConfigError(f"training_symbols has {len(self.training_symbols)} entries, T={T}")
        if not P <= T < N:
            raise ConfigError(f"need P <= T < N, got P={P}, T={T}, N={N}")
        training = np.array(self.training_symbols, dtype=complex)
        if np.any(np.abs(np.abs(training) ** 2 - 1) > UNIT_MODULUS_TOL):
            raise ConfigError("training symbols must have unit modulus")
        try:
            symbol_indices(training, M)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            ls_estimate(convolution_matrix(training, P)[:T], np.zeros(T))
        except EstimationError as exc:
            raise ConfigError(f"training sequence cannot support LS estimation: {exc}") from exc
        if self.blocks_per_point < 1:
            raise ConfigError("blocks_per_point must be positive")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("duplicate schemes")
        if any(s.exhaustive for s in self.schemes) and M * (N - T) > MAX_ENUMERATION_BITS:
            raise ConfigError(f"exhaustive schemes need M(N-T) <= {MAX_ENUMERATION_BITS}, "
                              f"got {M * (N - T)}")
        if self.scenario is Scenario.GAUSS_MARKOV and self.alpha is None:
            raise ConfigError("GAUSS_MARKOV scenario needs alpha")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.min_word_errors is not None and self.min_word_errors < 1:
            raise ConfigError("min_word_errors must be positive when set")

    @property
    def L(self) -> int:
        return self.N + self.P - 1

    @property
    def bits_per_block(self) -> int:
        return (self.N - self.T) * self.M

    def to_dict(self) -> dict:
        """Plain-YAML view, the inverse of :func:`config_from_dict`."""
        out = {}
        for f in dataclasses.fields(self):
            if not f.init:
                continue
            value = getattr(self, f.name)
            if isinstance(value, Enum):
                value = value.value
            elif f.name == "schemes":
                value = [s.value for s in value]
            elif f.name == "training_symbols":
                value = [v.real if v.imag == 0 else [v.real, v.imag] for v in value]
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    def with_seed(self, seed: int) -> "SimConfig":
        return dataclasses.replace(self, base_seed=seed)


_FIELDS = {f.name for f in dataclasses.fields(SimConfig) if f.init}
_REQUIRED = {f.name for f in dataclasses.fields(SimConfig)
             if f.init and f.default is dataclasses.MISSING}


def config_from_dict(raw: dict) -> SimConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return SimConfig(**raw)


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(raw)
