"""Experiment configuration: YAML file plus command-line overrides."""

import dataclasses
import math
from dataclasses import dataclass, field

import yaml

from ..errors import ConfigError
from ..network import Scenario

ALGORITHMS = ("icomp", "dcomp", "percell", "ofdm_icomp")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = field(default_factory=Scenario)
    algorithm: str = "icomp"
    sweep: tuple | None = None  # target-SINR dB values; None = scenario target
    n_trials: int = 1
    output_dir: str = "out"
    trial_seed_base: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
            )
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.sweep is not None and not all(math.isfinite(g) for g in self.sweep):
            raise ConfigError("sweep values must be finite")
        if self.algorithm == "ofdm_icomp" and not self.scenario.wideband:
            raise ConfigError("ofdm_icomp needs a wideband scenario (n_subcarriers > 1)")

    def gamma_values(self):
        if self.sweep is not None:
            return tuple(float(g) for g in self.sweep)
        return (float(self.scenario.target_sinr_db),)


def parse_bits(value):
    """Accept ints, floats, 'inf', or None for the ADC/DAC resolution."""
    if value in (None, "inf", "Inf", "INF", math.inf):
        return None
    try:
        bits = int(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"adc_dac_bits must be an integer or 'inf', got {value!r}") from e
    return bits


_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(Scenario)}
_TOP_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _build_scenario(raw):
    unknown = set(raw) - _SCENARIO_FIELDS
    if unknown:
        raise ConfigError(f"unknown scenario field(s): {sorted(unknown)}")
    if "adc_dac_bits" in raw:
        raw = dict(raw, adc_dac_bits=parse_bits(raw["adc_dac_bits"]))
    try:
        return Scenario(**raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid scenario: {e}") from e


def config_from_mapping(raw):
    raw = dict(raw or {})
    unknown = set(raw) - _TOP_FIELDS
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    scenario = _build_scenario(raw.pop("scenario", {}) or {})
    sweep = raw.pop("sweep", None)
    if sweep is not None:
        sweep = tuple(float(g) for g in sweep)
    try:
        return ExperimentConfig(scenario=scenario, sweep=sweep, **raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid config: {e}") from e


def load_config(path):
    """Parse a YAML experiment file; errors carry line/field diagnostics."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: malformed YAML{where}: {e}") from e
    except OSError as e:
        raise ConfigError(f"{path}: {e}") from e
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_mapping(raw)
