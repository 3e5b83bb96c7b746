"""Flat ``key = value`` experiment configuration.

One setting per line, dotted keys, ``#`` starts a comment. Lists are
comma-separated; numbers may be written as fractions (``1/8``). Keys below
``init.params.`` and ``ccr.xi.params.`` are free-form profile parameters; every
other key must appear in :data:`SCHEMA`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from ..errors import ConfigError
from ..space import LAPLACIAN_KINDS
from .profiles import PROFILES

FREE_PREFIXES = ("init.params.", "ccr.xi.params.", "hepp.observable.params.")


def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _integer(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


def _string(text: str) -> str:
    s = text.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        s = s[1:-1]
    return s


def _list_of(parse: Callable[[str], Any]) -> Callable[[str], list]:
    def go(text: str) -> list:
        items = [p for p in (q.strip() for q in text.split(",")) if p]
        if not items:
            raise ConfigError("empty list")
        return [parse(p) for p in items]
    return go


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    check: Callable[[Any], bool] | None = None
    rule: str = ""


def _pos(v):
    return v > 0


def _all_pos(v):
    return all(x > 0 for x in v)


SCHEMA: dict[str, Key] = {
    "grid.m": Key(_integer, 4, lambda v: v >= 2, "at least 2"),
    "grid.length": Key(_number, 1.0, _pos, "positive"),
    "grid.laplacian": Key(_string, "finite_difference", lambda v: v in LAPLACIAN_KINDS,
                          f"one of {LAPLACIAN_KINDS}"),
    "run.t_final": Key(_number, 0.5, lambda v: v >= 0, "nonnegative"),
    "run.dt": Key(_number, 1e-3, _pos, "positive"),
    "run.sample_times": Key(_list_of(_number), None, lambda v: all(x >= 0 for x in v), "nonnegative"),
    "fock.n_max": Key(_integer, None, lambda v: v >= 0, "nonnegative"),
    "fock.truncation_budget": Key(_number, 1e-4, _pos, "positive"),
    "fock.tail_threshold": Key(_number, 1e-8, lambda v: 0 < v < 1, "in (0, 1)"),
    "fock.max_states": Key(_integer, 5_000_000, _pos, "positive"),
    "krylov.tol": Key(_number, 1e-10, _pos, "positive"),
    "sweep.epsilon_list": Key(_list_of(_number), [0.5, 0.25, 0.125],
                              lambda v: all(0 < x <= 1 for x in v), "values in (0, 1]"),
    "sweep.n_list": Key(_list_of(_integer), [2, 4, 8, 16], _all_pos, "positive"),
    "init.profile": Key(_string, "gauss", lambda v: v in PROFILES, f"one of {PROFILES}"),
    "init.mass": Key(_number, 1.0, lambda v: v >= 0, "nonnegative"),
    "init.seed": Key(_integer, 0, lambda v: v >= 0, "nonnegative"),
    "chaos.k_list": Key(_list_of(_integer), [1, 2], lambda v: all(1 <= k <= 3 for k in v), "in 1..3"),
    "hepp.states": Key(_list_of(_string), ["vacuum", "one_particle"],
                       lambda v: all(s in ("vacuum", "one_particle") for s in v),
                       "vacuum and/or one_particle"),
    "hepp.u2_n_max": Key(_integer, 24, lambda v: v >= 1, "at least 1"),
    "hepp.n_steps": Key(_integer, None, _pos, "positive"),
    "hepp.freeze": Key(_string, "left", lambda v: v in ("left", "midpoint"), "left or midpoint"),
    "hepp.cutoff_margin": Key(_integer, 16, lambda v: v >= 0, "nonnegative"),
    "hepp.observable.profile": Key(_string, "plane", lambda v: v in PROFILES, f"one of {PROFILES}"),
    "hepp.observable.mass": Key(_number, 0.25, lambda v: v >= 0, "nonnegative"),
    "ccr.epsilon": Key(_number, 0.25, lambda v: 0 < v <= 1, "in (0, 1]"),
    "ccr.states": Key(_list_of(_string), ["vacuum", "one_particle"],
                      lambda v: all(s in ("vacuum", "one_particle") for s in v),
                      "vacuum and/or one_particle"),
    "ccr.n_max": Key(_integer, 24, lambda v: v >= 1, "at least 1"),
    "ccr.n_steps_list": Key(_list_of(_integer), [32, 64], _all_pos, "positive"),
    "ccr.freeze": Key(_string, "midpoint", lambda v: v in ("left", "midpoint"), "left or midpoint"),
    "ccr.xi.profile": Key(_string, "plane", lambda v: v in PROFILES, f"one of {PROFILES}"),
    "ccr.xi.mass": Key(_number, 0.25, lambda v: v >= 0, "nonnegative"),
    "invariants.samples": Key(_integer, 100, _pos, "positive"),
    "invariants.alpha_list": Key(_list_of(_number), [0.1, 1.0, 10.0], _all_pos, "positive"),
    "invariants.slack": Key(_number, 1.1, lambda v: v >= 1, "at least 1"),
    "invariants.hermite_n_list": Key(_list_of(_integer), [1, 2, 3, 4, 5, 6], _all_pos, "positive"),
    "invariants.gamma_n": Key(_integer, 20, _pos, "positive"),
}


class ExperimentConfig:
    """Validated settings; access with ``cfg["grid.m"]`` or :meth:`params`."""

    def __init__(self, values: dict[str, Any] | None = None):
        values = dict(values or {})
        self._values: dict[str, Any] = {}
        for key, entry in SCHEMA.items():
            self._values[key] = entry.default
        for key, raw in values.items():
            self.set(key, raw)

    def set(self, key: str, value: Any) -> None:
        if key.startswith(FREE_PREFIXES):
            name = key.rsplit(".", 1)[1]
            if not name:
                raise ConfigError(f"empty parameter name in {key!r}")
            self._values[key] = _number(value) if isinstance(value, str) else float(value)
            return
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        entry = SCHEMA[key]
        parsed = entry.parse(value) if isinstance(value, str) else value
        if entry.check is not None and not entry.check(parsed):
            raise ConfigError(f"{key} = {value!r}: must be {entry.rule}")
        self._values[key] = parsed

    def __getitem__(self, key: str) -> Any:
        if key not in self._values:
            raise KeyError(key)
        return self._values[key]

    def params(self, prefix: str) -> dict[str, float]:
        """Free-form parameters stored under ``prefix`` (e.g. ``"init.params."``)."""
        return {k[len(prefix):]: v for k, v in self._values.items() if k.startswith(prefix)}

    def to_dict(self) -> dict[str, Any]:
        return dict(sorted(self._values.items()))

    def copy_with(self, **updates: Any) -> "ExperimentConfig":
        """New config with keys given as ``grid__m=6`` style keyword arguments."""
        out = ExperimentConfig()
        out._values = dict(self._values)
        for k, v in updates.items():
            out.set(k.replace("__", "."), v)
        return out


def parse_config_text(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            cfg.set(key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)
