"""Scenario configuration: key=value files plus command-line overrides."""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from . import constants
from .dynamics import CavityMode
from .errors import ConfigError
from .protocol import ImperfectionModel, ProtocolParams

SCENARIOS = ("collapse", "revival", "fringes", "fisher_scan", "precision_curve", "table1", "estimate")

# Per-scenario defaults applied before the config file and overrides.
SCENARIO_DEFAULTS = {
    "collapse": dict(T1=0.0, T2=0.0, flip=False, t1_min=0.0, t1_max=40.0, t1_steps=401),
    "revival": dict(T1=13.4, T2=13.4, t2_min=0.0, t2_max=20.0, t2_steps=201, beta=1.0),
    "fringes": dict(T1=12.0, T2=13.5, beta_min=-0.6, beta_max=0.6, beta_steps=13),
    "fisher_scan": dict(t2_min=0.0, t2_max=25.0, t2_steps=126),
    "precision_curve": dict(t1_min=0.0, t1_max=20.0, t1_steps=41),
    "table1": dict(T1=14.7, beta_min=-0.6, beta_max=0.6, beta_steps=13),
    "estimate": dict(T1=14.7, T2=16.3),
}


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, tuple):
        return text
    return tuple(float(x) for x in str(text).split(",") if x.strip())


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "table1"
    output_dir: str = "out"
    seed: int = 2017
    workers: int = 1
    # protocol
    alpha: float = constants.ALPHA
    T1: float = 13.4
    T2: float = 13.4
    beta: float = 0.0
    omega0: float = constants.OMEGA0
    n_max: int = constants.DEFAULT_N_MAX
    initial_atom: str = "g"
    flip: bool = True
    waist: float = constants.WAIST
    velocity: float = constants.VELOCITY
    # imperfections
    eps: float = constants.DETECTION_ERROR
    position_sigma: float = constants.POSITION_SIGMA
    n_spread_samples: int = 15
    spread_rule: str = "gauss_hermite"
    # grids
    t1_min: float = 0.0
    t1_max: float = 20.0
    t1_steps: int = 41
    t2_min: float = 0.0
    t2_max: float = 25.0
    t2_steps: int = 126
    beta_min: float = -0.6
    beta_max: float = 0.6
    beta_steps: int = 13
    fisher_t1_values: tuple = (0.0, 6.8, 9.2, 12.0, 14.7)
    table_t2_values: tuple = (13.5, 16.3)
    # fringe sampling and estimation
    trials: int = 1000
    fit_degree: int = 6
    simulated: bool = True
    nu: int = 10_000
    replicas: int = 400
    beta_true: float = 0.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        for name in ("t1_steps", "t2_steps", "beta_steps", "trials", "nu", "replicas", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for lo, hi in (("t1_min", "t1_max"), ("t2_min", "t2_max"), ("beta_min", "beta_max")):
            if getattr(self, lo) > getattr(self, hi):
                raise ConfigError(f"{lo} > {hi}")
        if not self.fisher_t1_values or not self.table_t2_values:
            raise ConfigError("value lists must be non-empty")

    @property
    def mode(self) -> CavityMode:
        return CavityMode(self.omega0, self.waist, self.velocity)

    def params(self, **changes) -> ProtocolParams:
        base = dict(alpha=self.alpha, T1=self.T1, T2=self.T2, beta=self.beta, omega0=self.omega0,
                    n_max=self.n_max, initial_atom=self.initial_atom, flip_enabled=self.flip,
                    mode=self.mode)
        base.update(changes)
        return ProtocolParams(**base)

    def imperfections(self, **changes) -> ImperfectionModel:
        base = dict(detection_error=self.eps, position_sigma=self.position_sigma,
                    n_spread_samples=self.n_spread_samples, spread_rule=self.spread_rule,
                    seed=self.seed)
        base.update(changes)
        return ImperfectionModel(**base)

    def items(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            yield f.name, value


_FIELDS = {f.name.lower(): f for f in dataclasses.fields(ScenarioConfig)}


def _convert(name: str, raw):
    f = _FIELDS[name.lower()]
    default = f.default
    try:
        if isinstance(default, bool):
            return _bool(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return _floats(raw)
        return str(raw).strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from None


def read_config_file(path) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string("[config]\n" + text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return dict(parser["config"])


def parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def resolve(scenario: str, file_values: dict | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Defaults < scenario defaults < config file < overrides."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    values = {"scenario": scenario}
    values.update(SCENARIO_DEFAULTS[scenario])
    for source in (file_values or {}, overrides or {}):
        for key, raw in source.items():
            if key.lower() not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            name = _FIELDS[key.lower()].name
            values[name] = _convert(name, raw)
    if values["scenario"] != scenario:
        raise ConfigError("scenario in config file disagrees with the command line")
    return ScenarioConfig(**values)
