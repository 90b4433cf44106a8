"""INI scenario files: parse, validate and emit.

Every section is optional and every omitted key keeps its default, so an
empty file gives the base scenario. Unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
import dataclasses

from .errors import InvalidSpecError
from .market import (Constraints, IlliquidSpec, MarketSpec, NumericsConfig, Preferences, Scenario,
                     scenario_fields)


class ConfigError(InvalidSpecError):
    """Bad configuration; ``key`` is the ``[section].name`` path when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


_SECTIONS = {
    "market": MarketSpec,
    "illiquid": IlliquidSpec,
    "prefs": Preferences,
    "constraints": Constraints,
    "numerics": NumericsConfig,
}
_RUN_KEYS = {"t": "horizon_T", "v0": "v0"}
_RUN_NAMES = {"horizon_T": "T", "v0": "v0"}


def _coerce(raw: str, default, key: str):
    text = raw.strip()
    try:
        if isinstance(default, bool):
            raise ConfigError("boolean keys are not supported", key)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    except ValueError:
        kind = "an integer" if isinstance(default, int) else "a number"
        raise ConfigError(f"expected {kind}, got {text!r}", key) from None


def _build(cls, section: str, values: dict):
    defaults = scenario_fields(cls())
    kwargs = {}
    for name, raw in values.items():
        key = f"[{section}].{name}"
        if name not in defaults:
            raise ConfigError(f"unknown key (allowed: {', '.join(defaults)})", key)
        kwargs[name] = _coerce(raw, defaults[name], key)
    try:
        return cls(**kwargs)
    except InvalidSpecError as exc:
        bad = next((n for n in kwargs if f".{n} " in str(exc)), None)
        raise ConfigError(str(exc), f"[{section}].{bad}" if bad else f"[{section}]") from None


def parse_config(text: str) -> Scenario:
    """Parse an INI document into a validated :class:`Scenario`."""
    cp = configparser.ConfigParser(interpolation=None, empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed document: {exc}") from None
    parts = {}
    run = {}
    for section in cp.sections():
        items = dict(cp.items(section, raw=True))
        if section == "run":
            for name, raw in items.items():
                key = f"[run].{name}"
                field = _RUN_KEYS.get(name.lower())
                if field is None:
                    raise ConfigError("unknown key (allowed: T, v0)", key)
                run[field] = _coerce(raw, 0.0, key)
        elif section in _SECTIONS:
            parts[section] = _build(_SECTIONS[section], section, items)
        else:
            raise ConfigError(f"unknown section (allowed: {', '.join([*_SECTIONS, 'run'])})", f"[{section}]")
    try:
        return Scenario(**parts, **run)
    except InvalidSpecError as exc:
        msg = str(exc)
        for field, name in _RUN_NAMES.items():
            if f"run.{name} " in msg:
                raise ConfigError(msg, f"[run].{name}") from None
        raise ConfigError(msg, "[market].mu" if "market.mu" in msg else None) from None


def load_config(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def emit_config(scenario: Scenario) -> str:
    """Render ``scenario`` so that :func:`parse_config` reproduces it exactly."""
    lines = []
    for section in ("market", "illiquid", "prefs", "constraints"):
        lines.append(f"[{section}]")
        lines += [f"{k} = {_fmt(v)}" for k, v in scenario_fields(getattr(scenario, section)).items()]
        lines.append("")
    lines += ["[run]", f"T = {_fmt(scenario.horizon_T)}", f"v0 = {_fmt(scenario.v0)}", "", "[numerics]"]
    lines += [f"{k} = {_fmt(v)}" for k, v in dataclasses.asdict(scenario.numerics).items()]
    return "\n".join(lines) + "\n"
