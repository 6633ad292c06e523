"""Run configuration: a line-oriented ``section.key = value`` text format.

Every key has a type and a default (see ``SCHEMA``); unknown keys are
errors. ``#`` starts a comment. Lists are comma separated.

Initial-condition presets (per field ``f`` in ``u, v, w``)::

    constant        f = level
    cosine-bump     f = level + amplitude * prod_a cos(pi x_a / L_a)
                    sup = level + |amplitude|, int f = level |Omega|
    gaussian-bump   f = level + amplitude * exp(-|x - c|^2 / (2 width^2)),
                    c the domain centre; sup = level + amplitude
    random-smooth   f = level + amplitude * sum_k c_k prod_a cos(k_a pi x_a / L_a)
                    with sum |c_k| = 1 over random nonzero wave vectors,
                    so |f - level| <= amplitude; int f = level |Omega|

All presets have zero normal derivative on the boundary except the Gaussian,
whose boundary slope is negligible for the default width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .grid import Grid
from .model import ModelParams, NutrientSource
from .solver import MODES, StepControl

PRESETS = ("constant", "cosine-bump", "gaussian-bump", "random-smooth")
PROFILES = ("uniform", "cosine-bump")
FIELDS = ("u", "v", "w")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors) if not isinstance(errors, str) else [errors]
        super().__init__("; ".join(self.errors))


def _schema():
    s = {
        "grid.dim": ("int", 2),
        "grid.cells": ("ints", (32, 32)),
        "grid.extent": ("floats", (1.0, 1.0)),
        "params.chi": ("float", 1.0),
        "params.xi": ("float", 1.0),
        "params.lambda": ("float", 1.0),
        "params.mu": ("float", 1.0),
        "params.eta1": ("float", 0.0),
        "params.eta2": ("float", 0.0),
        "params.m": ("float", 2.0),
        "params.l": ("float", 2.0),
        "source.kind": (("constant", "separable-decay"), "constant"),
        "source.r0": ("float", 1.0),
        "source.delta": ("float", 0.0),
        "source.profile": (PROFILES, "uniform"),
    }
    for f in FIELDS:
        s[f"initial.{f}"] = (PRESETS, "cosine-bump")
        s[f"initial.{f}_level"] = ("float", 1.0)
        s[f"initial.{f}_amplitude"] = ("float", 0.5)
        s[f"initial.{f}_width"] = ("float", 0.1)
    s.update({
        "initial.seed": ("int", 0),
        "initial.modes": ("int", 4),
        "control.mode": (MODES, "explicit"),
        "control.dt_max": ("float", 1e-2),
        "control.cfl_safety": ("float", 0.4),
        "control.positivity_floor": ("float", 0.0),
        "control.blowup_threshold": ("float", 0.0),  # 0 = 1e6 * max(caps, 1)
        "run.horizon": ("float", 10.0),
        "run.stride": ("int", 10),
        "run.kappa": ("float", 1.0),
        "run.p_list": ("floats", (2.0, 4.0)),
        "run.snapshot_times": ("floats", ()),
        "run.max_steps": ("int", 0),  # 0 = unlimited
    })
    return s


SCHEMA: dict[str, tuple[Any, Any]] = _schema()
NUMERIC_KINDS = ("int", "float")


def _parse_value(key, kind, text):
    text = text.strip()
    if isinstance(kind, tuple):
        if text not in kind:
            raise ValueError(f"{key}: {text!r} is not one of {', '.join(kind)}")
        return text
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    items = [t.strip() for t in text.split(",") if t.strip()]
    if kind == "ints":
        return tuple(int(t) for t in items)
    if kind == "floats":
        return tuple(float(t) for t in items)
    raise AssertionError(kind)


def _coerce(key, kind, value):
    if isinstance(value, str):
        return _parse_value(key, kind, value)
    if kind == "int":
        if float(value) != int(value):
            raise ValueError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if kind == "float":
        return float(value)
    if kind == "ints":
        return tuple(int(x) for x in value)
    if kind == "floats":
        return tuple(float(x) for x in value)
    return _parse_value(key, kind, str(value))


def _format_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    values: dict

    @classmethod
    def from_mapping(cls, mapping: dict | None = None) -> "RunConfig":
        errors = []
        values = {k: default for k, (_, default) in SCHEMA.items()}
        for key, raw in (mapping or {}).items():
            if key not in SCHEMA:
                errors.append(f"unknown key {key!r}")
                continue
            try:
                values[key] = _coerce(key, SCHEMA[key][0], raw)
            except (TypeError, ValueError) as exc:
                errors.append(f"{key}: cannot parse {raw!r} ({exc})")
        if errors:
            raise ConfigError(errors)
        cfg = cls(values)
        cfg.validate()
        return cfg

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        mapping, errors = {}, []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                errors.append(f"line {lineno}: expected 'section.key = value'")
                continue
            key, value = (part.strip() for part in line.split("=", 1))
            if key in mapping:
                errors.append(f"line {lineno}: duplicate key {key!r}")
            mapping[key] = value
        if errors:
            raise ConfigError(errors)
        return cls.from_mapping(mapping)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.parse(text)

    def serialize(self) -> str:
        return "".join(f"{k} = {_format_value(self.values[k])}\n" for k in SCHEMA)

    def __getitem__(self, key):
        return self.values[key]

    def with_value(self, path: str, value) -> "RunConfig":
        if path not in SCHEMA:
            raise ConfigError(f"unknown parameter path {path!r}")
        return RunConfig.from_mapping({**self.values, path: value})

    def updated(self, mapping: dict) -> "RunConfig":
        return RunConfig.from_mapping({**self.values, **mapping})

    # -- validation and domain objects ------------------------------------

    def validate(self) -> None:
        v = self.values
        errors = []
        dim = v["grid.dim"]
        if dim not in (1, 2):
            errors.append(f"grid.dim must be 1 or 2, got {dim}")
        else:
            if len(v["grid.cells"]) != dim:
                errors.append(f"grid.cells needs {dim} entries")
            if len(v["grid.extent"]) != dim:
                errors.append(f"grid.extent needs {dim} entries")
        if not errors:
            try:
                self.grid()
            except ValueError as exc:
                errors.append(f"grid: {exc}")
        try:
            self.params()
        except ValueError as exc:
            errors.append(f"params: {exc}")
        if v["source.r0"] < 0 or v["source.delta"] < 0:
            errors.append("source.r0 and source.delta must be >= 0")
        try:
            StepControl(dt_max=v["control.dt_max"], cfl_safety=v["control.cfl_safety"],
                        positivity_floor=v["control.positivity_floor"], mode=v["control.mode"])
        except ValueError as exc:
            errors.append(f"control: {exc}")
        if v["control.blowup_threshold"] < 0:
            errors.append("control.blowup_threshold must be >= 0")
        if not v["run.horizon"] > 0:
            errors.append(f"run.horizon must be > 0, got {v['run.horizon']}")
        if v["run.stride"] < 1:
            errors.append("run.stride must be >= 1")
        if not v["run.kappa"] > 0:
            errors.append("run.kappa must be > 0")
        if v["run.max_steps"] < 0:
            errors.append("run.max_steps must be >= 0")
        if any(q < 1 for q in v["run.p_list"]):
            errors.append("run.p_list entries must be >= 1")
        if any(t < 0 for t in v["run.snapshot_times"]):
            errors.append("run.snapshot_times must be >= 0")
        if v["initial.modes"] < 1:
            errors.append("initial.modes must be >= 1")
        for f in FIELDS:
            preset = v[f"initial.{f}"]
            level = v[f"initial.{f}_level"]
            amp = v[f"initial.{f}_amplitude"]
            if level < 0:
                errors.append(f"initial.{f}_level must be >= 0")
            if preset in ("cosine-bump", "random-smooth") and abs(amp) > level:
                errors.append(f"initial.{f}: |amplitude| must not exceed level for {preset}")
            if preset == "gaussian-bump":
                if amp < 0:
                    errors.append(f"initial.{f}_amplitude must be >= 0 for gaussian-bump")
                if not v[f"initial.{f}_width"] > 0:
                    errors.append(f"initial.{f}_width must be > 0")
        if errors:
            raise ConfigError(errors)

    def grid(self) -> Grid:
        v = self.values
        return Grid(v["grid.dim"], v["grid.extent"], v["grid.cells"])

    def params(self) -> ModelParams:
        v = self.values
        return ModelParams(chi=v["params.chi"], xi=v["params.xi"], lam=v["params.lambda"],
                           mu=v["params.mu"], eta1=v["params.eta1"], eta2=v["params.eta2"],
                           m=v["params.m"], l=v["params.l"])

    def source(self, grid: Grid | None = None) -> NutrientSource:
        v = self.values
        grid = grid or self.grid()
        profile = None
        if v["source.profile"] == "cosine-bump":
            profile = 0.5 * (1.0 + _cosine_product(grid, [1] * grid.dim))
        return NutrientSource(kind=v["source.kind"], r0=v["source.r0"],
                              delta=v["source.delta"], profile=profile)

    def control(self, threshold: float | None = None) -> StepControl:
        v = self.values
        configured = v["control.blowup_threshold"]
        return StepControl(dt_max=v["control.dt_max"], cfl_safety=v["control.cfl_safety"],
                           positivity_floor=v["control.positivity_floor"],
                           mode=v["control.mode"],
                           blowup_threshold=configured if configured > 0 else threshold)

    def initial_fields(self, grid: Grid | None = None):
        v = self.values
        grid = grid or self.grid()
        out = []
        for idx, f in enumerate(FIELDS):
            rng = np.random.default_rng([v["initial.seed"], idx])
            out.append(initial_field(grid, v[f"initial.{f}"], v[f"initial.{f}_level"],
                                     v[f"initial.{f}_amplitude"], v[f"initial.{f}_width"],
                                     rng, v["initial.modes"]))
        return tuple(out)

    @property
    def horizon(self) -> float:
        return self.values["run.horizon"]


def _cosine_product(grid: Grid, wave: list[int]) -> np.ndarray:
    out = np.ones(grid.shape)
    for axis, (k, x, length) in enumerate(zip(wave, grid.mesh(), grid.extent)):
        out = out * np.cos(k * math.pi * x / length)
    return out


def random_smooth(grid: Grid, rng: np.random.Generator, modes: int = 4, terms: int = 6) -> np.ndarray:
    """Zero-mean cosine mixture normalised so ``sum |c_k| = 1``."""
    total = grid.zeros()
    coeffs = rng.standard_normal(terms)
    for c in coeffs:
        wave = [0] * grid.dim
        while not any(wave):
            wave = [int(k) for k in rng.integers(0, modes + 1, size=grid.dim)]
        total = total + c * _cosine_product(grid, wave)
    return total / float(np.sum(np.abs(coeffs)))


def initial_field(grid: Grid, preset: str, level: float, amplitude: float, width: float,
                  rng: np.random.Generator | None = None, modes: int = 4) -> np.ndarray:
    if preset == "constant":
        return grid.full(level)
    if preset == "cosine-bump":
        return level + amplitude * _cosine_product(grid, [1] * grid.dim)
    if preset == "gaussian-bump":
        r2 = sum((x - 0.5 * length) ** 2 for x, length in zip(grid.mesh(), grid.extent))
        return level + amplitude * np.exp(-r2 / (2.0 * width * width))
    if preset == "random-smooth":
        rng = rng if rng is not None else np.random.default_rng(0)
        return level + amplitude * random_smooth(grid, rng, modes)
    raise ValueError(f"unknown preset {preset!r}")
