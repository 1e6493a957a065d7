"""Experiment configuration: flat INI files with one section per subcommand.

A run is described by the ``[common]`` section plus the section named after
the subcommand.  Unknown sections or keys are rejected.  A parsed
configuration serializes back to canonical text (``to_text``) that parses
to an identical configuration; the canonical text also feeds the config
hash embedded in every output file.

Environment overrides: ``WEAKMEAS_SEED`` and ``WEAKMEAS_OUT`` override the
seed and output directory (command-line flags still take precedence).
"""

from __future__ import annotations

import configparser
import hashlib
import io
import os
from dataclasses import dataclass, fields, replace

SCENARIOS = ("trajectory", "ensemble", "sweep", "goalprog", "discord")


class ConfigError(ValueError):
    """Invalid configuration file, key, or value."""


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs for one subcommand run (flattened across sections)."""

    scenario: str = "trajectory"
    # [common]
    seed: int = 12345
    out: str = "results"
    omega: float = 1.0
    epsilon: float = 0.0
    workers: int = 1
    format_version: int = 1
    # trajectory / ensemble scenario
    kappa: float = 0.005
    periods: float = 15.0
    steps_per_period: int = 150000
    points: int = 1000
    realizations: int = 2000
    compare_me2: bool = False
    # physical detector parameters; when present they derive kappa
    transparency: float | None = None
    delta_transparency: float | None = None
    bias_voltage: float | None = None
    temperature: float | None = None
    klitzing_constant: float | None = None
    # sweep / goalprog grids
    t_points: int = 100
    kappa_points: int = 100
    kappa_min: float = 0.0005
    kappa_max: float = 0.02
    t_max_periods: float = 15.0
    # goalprog targets; None runs the four default weight/target cases
    eta1: float | None = None
    eta2: float | None = None
    delta_c: float | None = None
    delta_b: float | None = None
    # discord verification
    states: int = 200
    bases: int = 50
    resolution: int = 64

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.steps_per_period < 100:
            raise ConfigError("steps_per_period must be at least 100")
        if self.periods <= 0 or self.points < 2:
            raise ConfigError("periods must be positive and points >= 2")


_COMMON_KEYS = ("seed", "out", "omega", "epsilon", "workers", "format_version")
_DETECTOR_KEYS = ("transparency", "delta_transparency", "bias_voltage",
                  "temperature", "klitzing_constant")
_SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "trajectory": ("kappa", "periods", "steps_per_period", "points",
                   *_DETECTOR_KEYS),
    "ensemble": ("kappa", "periods", "steps_per_period", "points",
                 "realizations", "compare_me2", *_DETECTOR_KEYS),
    "sweep": ("steps_per_period", "t_points", "kappa_points", "kappa_min",
              "kappa_max", "t_max_periods"),
    "goalprog": ("steps_per_period", "t_points", "kappa_points", "kappa_min",
                 "kappa_max", "t_max_periods", "eta1", "eta2", "delta_c",
                 "delta_b"),
    "discord": ("states", "bases", "resolution"),
}
_OPTIONAL_KEYS = ("eta1", "eta2", "delta_c", "delta_b", *_DETECTOR_KEYS)


def effective_kappa(cfg: ExperimentConfig) -> float:
    """Measurement strength for a run: derived from the physical detector
    parameters when they are configured, otherwise the kappa key."""
    if cfg.transparency is None:
        return cfg.kappa
    if cfg.delta_transparency is None or cfg.bias_voltage is None:
        raise ConfigError(
            "detector parameters need transparency, delta_transparency, "
            "and bias_voltage together")
    from .detector import DetectorParameterError, QpcParams, detector_from_qpc
    try:
        params = QpcParams(
            transparency=cfg.transparency,
            delta_transparency=cfg.delta_transparency,
            bias_voltage=cfg.bias_voltage,
            temperature=cfg.temperature if cfg.temperature is not None else 0.0,
            klitzing_constant=(cfg.klitzing_constant
                               if cfg.klitzing_constant is not None else 1.0),
        )
    except DetectorParameterError as exc:
        raise ConfigError(f"bad detector parameters: {exc}") from exc
    return detector_from_qpc(params).kappa


def _field_types() -> dict[str, type]:
    types = {}
    for f in fields(ExperimentConfig):
        types[f.name] = {"int": int, "float": float, "str": str, "bool": bool,
                         "float | None": float}[f.type]
    return types


_TYPES = _field_types()


def _convert(key: str, raw: str):
    typ = _TYPES[key]
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def parse_text(text: str, scenario: str) -> ExperimentConfig:
    """Build the configuration for ``scenario`` from INI text."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    allowed_sections = {"common", *SCENARIOS}
    for section in parser.sections():
        if section not in allowed_sections:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _COMMON_KEYS if section == "common" else _SECTION_KEYS[section]
        for key in parser[section]:
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    values: dict = {"scenario": scenario}
    if parser.has_section("common"):
        for key, raw in parser["common"].items():
            values[key] = _convert(key, raw)
    if parser.has_section(scenario):
        for key, raw in parser[scenario].items():
            values[key] = _convert(key, raw)
    return ExperimentConfig(**values)


def parse_file(path: str, scenario: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_text(text, scenario)


def apply_env_overrides(cfg: ExperimentConfig,
                        env: dict | None = None) -> ExperimentConfig:
    """Apply WEAKMEAS_SEED / WEAKMEAS_OUT if present."""
    env = os.environ if env is None else env
    if "WEAKMEAS_SEED" in env:
        try:
            cfg = replace(cfg, seed=int(env["WEAKMEAS_SEED"]))
        except ValueError as exc:
            raise ConfigError(f"bad WEAKMEAS_SEED: {env['WEAKMEAS_SEED']!r}") from exc
    if "WEAKMEAS_OUT" in env:
        cfg = replace(cfg, out=env["WEAKMEAS_OUT"])
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_text(cfg: ExperimentConfig) -> str:
    """Canonical INI serialization (round-trips through parse_text)."""
    buf = io.StringIO()
    buf.write("[common]\n")
    for key in _COMMON_KEYS:
        buf.write(f"{key} = {_format_value(getattr(cfg, key))}\n")
    buf.write(f"\n[{cfg.scenario}]\n")
    for key in _SECTION_KEYS[cfg.scenario]:
        value = getattr(cfg, key)
        if value is None and key in _OPTIONAL_KEYS:
            continue
        buf.write(f"{key} = {_format_value(value)}\n")
    return buf.getvalue()


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of the experiment content.

    The output location and the worker cap are excluded: neither changes
    the produced data.
    """
    canonical = to_text(replace(cfg, out="", workers=1))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
