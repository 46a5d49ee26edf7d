"""Flat ``key = value`` experiment configuration.

Lines are ``key = value``; ``#`` starts a comment. Values are numbers,
``true``/``false``, ``inf``, comma-separated lists, or bare strings. Every key
must appear in ``SCHEMA``; unset keys take the experiment's defaults.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

from ..errors import ConfigError
from ..spectral import Grid

EXPERIMENTS = ("approx_rates", "norm_inflation", "pseudo_error", "radial_decay", "compose_translates", "constants")

# key -> (kind, description)
SCHEMA: dict[str, tuple[str, str]] = {
    "experiment": ("str", "experiment name"),
    "alpha": ("float", "dissipation exponent"),
    "beta": ("float", "Sobolev exponent of the initial data"),
    "N": ("int", "angular frequency"),
    "lam": ("float", "concentration"),
    "K": ("auto_float", "phase offset, or auto for the smallest admissible"),
    "eps_tilde": ("float", "perturbation support half-width"),
    "grid_n": ("int", "grid points per side"),
    "grid_L": ("float", "box half-width"),
    "n_quad": ("int", "Gauss-Legendre nodes for time integrals"),
    "seed": ("int", "recorded for provenance; every run is deterministic"),
    "cfl": ("float", "solver CFL factor"),
    "dt_max": ("float", "solver macro step"),
    "horizon": ("float", "cap on the simulated time"),
    "samples": ("int", "observation times per run"),
    "N_values": ("int_list", "sweep over N"),
    "alpha_values": ("float_list", "sweep over alpha"),
    "t_values": ("float_list", "sample times"),
    "R_values": ("float_list", "translation distances"),
    "rescale": ("float_list", "rescaling factor per summand"),
    "operators": ("str_list", "surrogates to measure"),
    "r_min": ("float", "fit window start"),
    "r_max": ("float", "fit window end"),
    "J": ("int", "number of translated summands"),
    "t_end": ("float", "final time"),
}

_COMMON = {"seed": 0, "n_quad": 32}

DEFAULTS: dict[str, dict[str, Any]] = {
    "approx_rates": {
        **_COMMON, "alpha": 0.5, "lam": 1.0, "grid_n": 1024, "grid_L": 6.0, "N_values": [8, 16, 32, 64],
        "operators": ["lambda_minus_alpha", "lambda_plus_alpha", "radial_velocity", "commutator"],
    },
    "pseudo_error": {
        **_COMMON, "alpha": 0.4, "beta": 1.2, "lam": 4.0, "K": "auto", "eps_tilde": 0.4, "grid_n": 1024,
        "grid_L": 1.2, "N_values": [8, 16, 32], "samples": 32, "horizon": math.inf, "cfl": 0.5, "dt_max": 0.05,
    },
    "norm_inflation": {
        **_COMMON, "alpha": 0.4, "beta": 1.2, "lam": 4.0, "K": 1.0, "eps_tilde": 0.4, "grid_n": 1024,
        "grid_L": 0.9, "N_values": [64], "samples": 32, "cfl": 0.5, "dt_max": 0.05,
    },
    "radial_decay": {
        **_COMMON, "alpha_values": [0.5], "t_values": [0.5, 1.0, 2.0], "r_min": 4.0, "r_max": 16.0,
        "grid_L": 16.0, "samples": 25,
    },
    "compose_translates": {
        **_COMMON, "alpha": 0.4, "beta": 1.2, "N": 8, "lam": 8.0, "K": 1.0, "eps_tilde": 0.4, "grid_n": 1024,
        "grid_L": 3.5, "J": 2, "R_values": [0.9, 1.8, 3.6], "rescale": [1.0, 1.0, 1.0], "t_end": 0.1, "cfl": 0.5,
        "dt_max": 0.02,
    },
    "constants": {**_COMMON, "alpha_values": [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9]},
}


def _parse_scalar(text: str, kind: str, key: str):
    text = text.strip()
    try:
        if kind == "int":
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind == "float":
            return float(text)
        if kind == "auto_float":
            return "auto" if text.lower() == "auto" else float(text)
        if kind == "bool":
            if text.lower() in ("true", "false"):
                return text.lower() == "true"
            raise ValueError
        return text
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind}") from None


def parse_value(key: str, text: str):
    if key not in SCHEMA:
        raise ConfigError(f"unknown key {key!r}")
    kind = SCHEMA[key][0]
    if kind.endswith("_list"):
        items = [t for t in text.split(",") if t.strip()]
        if not items:
            raise ConfigError(f"{key}: list is empty")
        return [_parse_scalar(t, kind[:-5], key) for t in items]
    return _parse_scalar(text, kind, key)


def parse_text(text: str) -> dict[str, Any]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = parse_value(key, value)
    return out


def format_value(value) -> str:
    if isinstance(value, list):
        return ", ".join(format_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    values: Mapping[str, Any]
    out: Path = Path("results")

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        allowed = set(DEFAULTS[self.experiment]) | {"experiment"}
        extra = set(self.values) - allowed
        if extra:
            raise ConfigError(f"keys not used by {self.experiment}: {', '.join(sorted(extra))}")
        for key, value in self.values.items():
            if isinstance(value, list) and not value:
                raise ConfigError(f"{key}: sweep list is empty")
        for key in ("alpha", "alpha_values"):
            values = self.values.get(key, [])
            for a in values if isinstance(values, list) else [values]:
                if not 0 < a < 1:
                    raise ConfigError(f"{key}: alpha must lie in (0, 1), got {a}")

    @classmethod
    def build(cls, experiment: str, settings: Optional[Mapping[str, Any]] = None,
              overrides: Optional[Mapping[str, Any]] = None, out: Optional[Path] = None) -> "ExperimentConfig":
        settings = dict(settings or {})
        named = settings.pop("experiment", experiment)
        if named != experiment:
            raise ConfigError(f"config file is for {named!r}, not {experiment!r}")
        if experiment not in DEFAULTS:
            raise ConfigError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        values = dict(DEFAULTS[experiment])
        for source in (settings, overrides or {}):
            for key, value in source.items():
                if key not in values:
                    if key in SCHEMA:
                        raise ConfigError(f"key {key!r} is not used by {experiment}")
                    raise ConfigError(f"unknown key {key!r}")
                # typed values go through the text form too, so 4 and 4.0 hash alike
                values[key] = parse_value(key, value if isinstance(value, str) else format_value(value))
        return cls(experiment, values, Path(out) if out is not None else Path("results"))

    @classmethod
    def from_file(cls, path: Path, experiment: Optional[str] = None, overrides=None, out=None) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        settings = parse_text(text)
        experiment = experiment or settings.get("experiment")
        if experiment is None:
            raise ConfigError("config names no experiment")
        return cls.build(experiment, settings, overrides, out)

    def __getitem__(self, key: str):
        try:
            return self.values[key]
        except KeyError:
            raise ConfigError(f"{self.experiment} has no setting {key!r}") from None

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def canonical(self) -> str:
        lines = [f"experiment = {self.experiment}"]
        lines += [f"{key} = {format_value(self.values[key])}" for key in sorted(self.values)]
        return "\n".join(lines) + "\n"

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def grid(self) -> Grid:
        try:
            return Grid(self["grid_n"], self["grid_L"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def check_output(self):
        out = Path(self.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
