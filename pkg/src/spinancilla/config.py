"""Run configuration: INI-style files with model/grid/sweep/output sections.

CLI flags override file values; unknown sections or keys are hard errors
with the offending location named.  A serialized config parses back to an
equal RunConfig, and its hash is embedded in every output file.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields

from .dynamics import DENSE_THRESHOLD_DEFAULT, TimeGrid
from .experiments import INITIAL_STATES


class ConfigError(ValueError):
    """Malformed run configuration; message carries section/key diagnostics."""


@dataclass
class RunConfig:
    # model
    L: int = 8
    q: int = 40
    J: float = -1.0
    omega_c: float = 0.5
    periodic: bool = True
    # grid
    t_start: float = 0.0
    t_end: float = 50.0
    dt: float = 0.1
    avg_from: float = 0.0
    avg_to: float = 50.0
    # sweep
    h_values: tuple[float, ...] = (0.0, 0.75, 1.5, 2.25, 3.0)
    lambda2_over_omega_values: tuple[float, ...] = (0.0, 0.28, 0.63, 1.13)
    L_values: tuple[int, ...] = ()
    initial_state: str = "polarized"
    pre_J: float | None = None
    pre_h: float | None = None
    # output
    out_dir: str = "out"
    mi_convention: str = "eq2"
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT
    workers: int = 1

    def __post_init__(self) -> None:
        if self.mi_convention not in ("eq2", "half"):
            raise ConfigError(f"mi_convention must be eq2 or half, got {self.mi_convention!r}")
        if self.initial_state not in INITIAL_STATES:
            raise ConfigError(f"initial_state must be one of {INITIAL_STATES}")

    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_start, self.t_end, self.dt)

    def effective_L_values(self) -> tuple[int, ...]:
        return self.L_values if self.L_values else (self.L,)


_SCHEMA = {
    "model": {
        "L": int,
        "q": int,
        "J": float,
        "omega_c": float,
        "periodic": bool,
    },
    "grid": {
        "t_start": float,
        "t_end": float,
        "dt": float,
        "avg_from": float,
        "avg_to": float,
    },
    "sweep": {
        "h_values": "floats",
        "lambda2_over_omega_values": "floats",
        "L_values": "ints",
        "initial_state": str,
        "pre_J": float,
        "pre_h": float,
    },
    "output": {
        "out_dir": str,
        "mi_convention": str,
        "dense_threshold": int,
        "workers": int,
    },
}

_OPTIONAL_FLOATS = {"pre_J", "pre_h"}


def _parse_value(kind, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            lowered = raw.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind is str:
            return raw
        if kind == "floats":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if kind == "ints":
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from exc
    raise AssertionError(kind)


def _line_of(text: str, key: str) -> int | None:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(key) and stripped[len(key) :].lstrip().startswith(("=", ":")):
            return lineno
    return None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case sensitive (L vs l)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                line = _line_of(text, key)
                location = f" (line {line})" if line else ""
                raise ConfigError(f"unknown key {key!r} in section [{section}]{location}")
            values[key] = _parse_value(_SCHEMA[section][key], raw, f"[{section}] {key}")
    return RunConfig(**values)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(config: RunConfig) -> str:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    by_name = {f.name: getattr(config, f.name) for f in fields(config)}
    for section, keys in _SCHEMA.items():
        parser[section] = {}
        for key in keys:
            value = by_name[key]
            if value is None and key in _OPTIONAL_FLOATS:
                continue
            if isinstance(value, tuple):
                if not value:
                    continue
                parser[section][key] = ", ".join(repr(v) for v in value)
            elif isinstance(value, float):
                parser[section][key] = repr(value)
            else:
                parser[section][key] = str(value)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()
