"""Scenario configuration and the flat ``key = value`` config file format.

Nested sections use dotted keys, e.g. ``region.z_max = 400`` or
``ga.mutation_rate = 0.2``. Everything else is a top-level field name.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field


class PowerLevel(enum.Enum):
    LOW = "low"
    HIGH = "high"

    def flipped(self) -> "PowerLevel":
        return PowerLevel.LOW if self is PowerLevel.HIGH else PowerLevel.HIGH


class ChannelMode(enum.Enum):
    PROBABILISTIC = "probabilistic"
    DETERMINISTIC = "deterministic"


class ConfigError(ValueError):
    """Raised for a configuration that violates its invariants."""


class ParseError(ConfigError):
    """Raised by :func:`parse_config`; ``line`` is 1-based, or None for
    errors that involve several fields at once."""

    def __init__(self, line: int | None, reason: str):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


@dataclass(frozen=True)
class Region:
    x_max: float = 500.0
    y_max: float = 500.0
    z_max: float = 500.0

    def __post_init__(self):
        for name in ("x_max", "y_max", "z_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"region.{name} must be positive")


SELECTION_MODES = ("top_two", "tournament")


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 30
    max_generations: int = 200
    convergence_window: int = 20
    mutation_rate: float = 0.1
    w_e: float = 1.0
    w_h: float = 0.1
    w_b: float = 0.05
    epsilon: float = 1e-6
    selection_mode: str = "top_two"
    tournament_size: int = 3

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("ga.population_size must be at least 2")
        if self.max_generations < 1:
            raise ConfigError("ga.max_generations must be at least 1")
        if self.convergence_window < 1:
            raise ConfigError("ga.convergence_window must be at least 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("ga.mutation_rate must lie in [0, 1]")
        if min(self.w_e, self.w_h, self.w_b) < 0:
            raise ConfigError("ga weights must be non-negative")
        if not self.epsilon > 0:
            raise ConfigError("ga.epsilon must be positive")
        if self.selection_mode not in SELECTION_MODES:
            raise ConfigError(f"ga.selection_mode must be one of {SELECTION_MODES}")
        if self.tournament_size < 1:
            raise ConfigError("ga.tournament_size must be at least 1")


@dataclass(frozen=True)
class ScenarioConfig:
    region: Region = field(default_factory=Region)
    num_nodes: int = 64
    num_sources: int = 5
    transmission_range_high: float = 150.0
    transmission_range_low: float = 80.0
    initial_energy: float = 100.0
    power_watts_high: float = 2.0
    power_watts_low: float = 0.5
    power_watts_rx: float = 0.1
    power_toggle_period: int = 10
    bitrate: float = 10_000.0
    packet_size: int = 512
    frequency: float = 20.0
    spreading_exponent: float = 1.5
    noise_level: float = 50.0
    source_level_high: float = 97.5
    source_level_low: float = 93.0
    snr_midpoint: float = 10.0
    snr_slope: float = 2.0
    channel_mode: ChannelMode = ChannelMode.PROBABILISTIC
    drift_horizontal: float = 5.0
    drift_vertical: float = 1.0
    rounds: int = 100
    seed: int = 1
    ga: GaConfig = field(default_factory=GaConfig)
    vbf_pipe_radius: float = 150.0
    dbr_depth_threshold: float = 0.0

    def __post_init__(self):
        if self.num_nodes < 2:
            raise ConfigError("num_nodes must be at least 2 (a sink and one sensor)")
        if not 1 <= self.num_sources < self.num_nodes:
            raise ConfigError("num_sources must satisfy 1 <= num_sources < num_nodes")
        if self.transmission_range_low > self.transmission_range_high:
            raise ConfigError("transmission_range_low must not exceed transmission_range_high")
        positive = (
            "transmission_range_high", "transmission_range_low", "initial_energy",
            "power_watts_high", "power_watts_low", "power_watts_rx", "bitrate",
            "packet_size", "frequency", "spreading_exponent", "snr_slope",
            "vbf_pipe_radius", "power_toggle_period",
        )
        for name in positive:
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive")
        for name in ("drift_horizontal", "drift_vertical", "dbr_depth_threshold"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.rounds < 0:
            raise ConfigError("rounds must be non-negative")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def tx_duration(self) -> float:
        """Seconds needed to clock one packet onto the channel."""
        return 8.0 * self.packet_size / self.bitrate

    def range_for(self, level: PowerLevel) -> float:
        return self.transmission_range_high if level is PowerLevel.HIGH else self.transmission_range_low

    def power_for(self, level: PowerLevel) -> float:
        return self.power_watts_high if level is PowerLevel.HIGH else self.power_watts_low

    def source_level_for(self, level: PowerLevel) -> float:
        return self.source_level_high if level is PowerLevel.HIGH else self.source_level_low

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


_SECTIONS = {"region": Region, "ga": GaConfig}


def _scalar_fields(cls) -> dict[str, type]:
    defaults = cls()
    return {
        f.name: type(getattr(defaults, f.name))
        for f in dataclasses.fields(cls)
        if f.name not in _SECTIONS
    }


_TOP_FIELDS = _scalar_fields(ScenarioConfig)
_SECTION_FIELDS = {name: _scalar_fields(cls) for name, cls in _SECTIONS.items()}


def _convert(raw: str, kind: type):
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        value = float(raw)
        if math.isnan(value):
            raise ValueError("NaN is not allowed")
        return value
    if kind is str:
        return raw
    if issubclass(kind, enum.Enum):
        return kind(raw.lower())
    raise TypeError(kind)


def parse_config(text: str) -> ScenarioConfig:
    """Parse a config file body. Unset keys keep their defaults."""
    top: dict[str, object] = {}
    sections: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    seen: dict[str, int] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(lineno, f"expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ParseError(lineno, "missing key")
        if not raw:
            raise ParseError(lineno, f"missing value for {key!r}")
        if key in seen:
            raise ParseError(lineno, f"duplicate key {key!r} (first set on line {seen[key]})")
        seen[key] = lineno

        if "." in key:
            section, name = key.split(".", 1)
            kinds = _SECTION_FIELDS.get(section)
            if kinds is None or name not in kinds:
                raise ParseError(lineno, f"unknown key {key!r}")
            target, kind = sections[section], kinds[name]
        else:
            if key not in _TOP_FIELDS:
                raise ParseError(lineno, f"unknown key {key!r}")
            target, kind, name = top, _TOP_FIELDS[key], key
        try:
            target[name] = _convert(raw, kind)
        except (ValueError, TypeError) as exc:
            raise ParseError(lineno, f"bad value for {key!r}: {exc}") from None

    try:
        for section, cls in _SECTIONS.items():
            if sections[section]:
                top[section] = cls(**sections[section])
        return ScenarioConfig(**top)
    except ConfigError as exc:
        # attribute cross-field failures to the offending key when there is one
        line = next((ln for key, ln in seen.items() if key in str(exc)), None)
        raise ParseError(line, str(exc)) from None


def format_config(config: ScenarioConfig) -> str:
    """Render ``config`` in the format read by :func:`parse_config`."""

    def fmt(value) -> str:
        if isinstance(value, enum.Enum):
            return value.value
        return repr(value) if isinstance(value, float) else str(value)

    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if f.name in _SECTIONS:
            for sub in dataclasses.fields(value):
                lines.append(f"{f.name}.{sub.name} = {fmt(getattr(value, sub.name))}")
        else:
            lines.append(f"{f.name} = {fmt(value)}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
