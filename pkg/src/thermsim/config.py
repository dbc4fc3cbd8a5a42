"""Experiment configuration: flat key-value text with section headers.

The format is plain INI so any language can parse it without dependencies.
Every scenario reads the shared [problem]/[material]/[source]/[initial]/
[grid]/[stepper]/[record] sections; scenario-specific knobs live in their
own sections and carry defaults in the scenario runners.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import Grid
from .initial import initial_data
from .model import ProblemSpec, material_law, source_law
from .stepping import StepperConfig

KNOWN_SCENARIOS = ("simulate", "mms", "reg-sweep", "uniqueness", "absorbing",
                   "attractor", "verify")

_MATERIAL_KEYS = {
    "identity": (),
    "smoothed-piecewise": ("slope_neg", "slope_pos", "width"),
    "cubic-affine": ("linear", "cubic", "box"),
}
_SOURCE_KEYS = {
    "constant-floor": ("value",),
    "gaussian-bump-over-floor": ("floor", "amplitude", "center", "width"),
}
_INITIAL_KEYS = {
    "constant": {"value": float},
    "bump": {"amplitude": float, "center": float, "width": float},
    "fourier": {"amplitude": float, "modes": int, "seed": int},
    "step": {"amplitude": float, "lo": float, "hi": float},
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    seed: int
    sections: dict

    @staticmethod
    def load(path, scenario: str | None = None,
             seed: int | None = None) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            read = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not read:
            raise ConfigError(f"config file not found: {path}")
        sections = {name: dict(parser[name]) for name in parser.sections()}
        file_scenario = sections.get("experiment", {}).get("scenario")
        chosen = scenario or file_scenario
        if chosen is None:
            raise ConfigError("no scenario given on the command line or in [experiment]")
        if scenario and file_scenario and scenario != file_scenario:
            raise ConfigError(
                f"scenario mismatch: command line says {scenario!r}, "
                f"config says {file_scenario!r}")
        if chosen not in KNOWN_SCENARIOS:
            raise ConfigError(f"unknown scenario {chosen!r}; "
                              f"expected one of {KNOWN_SCENARIOS}")
        if seed is None:
            seed_text = sections.get("experiment", {}).get("seed", "0")
            try:
                seed = int(seed_text)
            except ValueError as exc:
                raise ConfigError(f"bad seed {seed_text!r}") from exc
        return ExperimentConfig(scenario=chosen, seed=seed, sections=sections)

    # -- low-level typed accessors -----------------------------------------

    def _raw(self, section, key, default):
        value = self.sections.get(section, {}).get(key)
        return default if value is None else value

    def text(self, section, key, default=None) -> str:
        value = self._raw(section, key, default)
        return value if value is None else str(value)

    def fnum(self, section, key, default=None) -> float:
        value = self._raw(section, key, default)
        if value is None or isinstance(value, float):
            return value
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"bad number for [{section}] {key}: {value!r}") from exc

    def inum(self, section, key, default=None) -> int:
        value = self._raw(section, key, default)
        if value is None or isinstance(value, int):
            return value
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"bad integer for [{section}] {key}: {value!r}") from exc

    def flist(self, section, key, default=None):
        value = self._raw(section, key, default)
        if value is None or isinstance(value, (list, tuple)):
            return value
        try:
            return [float(tok) for tok in str(value).split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad list for [{section}] {key}: {value!r}") from exc

    # -- builders -----------------------------------------------------------

    def material(self):
        family = self.text("material", "family", "identity")
        if family not in _MATERIAL_KEYS:
            raise ConfigError(f"unknown material family {family!r}")
        kwargs = {}
        for key in _MATERIAL_KEYS[family]:
            value = self.fnum("material", key, None)
            if value is not None:
                kwargs[key] = value
        try:
            return material_law(family, **kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def source(self, material):
        family = self.text("source", "family", "constant-floor")
        if family not in _SOURCE_KEYS:
            raise ConfigError(f"unknown source family {family!r}")
        kwargs = {}
        for key in _SOURCE_KEYS[family]:
            value = self.fnum("source", key, None)
            if value is not None:
                kwargs[key] = value
        try:
            return source_law(family, material, **kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def initial(self, section="initial"):
        family = self.text(section, "family", "bump")
        if family not in _INITIAL_KEYS:
            raise ConfigError(f"unknown initial family {family!r}")
        kwargs = {}
        for key, typ in _INITIAL_KEYS[family].items():
            getter = self.inum if typ is int else self.fnum
            value = getter(section, key, None)
            if value is not None:
                kwargs[key] = value
        try:
            return initial_data(family, **kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def problem(self) -> ProblemSpec:
        material = self.material()
        source = self.source(material)
        extents = self.flist("problem", "domain", [1.0])
        try:
            return ProblemSpec(
                m=self.fnum("problem", "m", 2.0),
                kappa=self.fnum("problem", "kappa", 1.0),
                domain=tuple(extents),
                horizon=self.fnum("problem", "horizon", 1.0),
                material=material,
                source=source,
                reg_r=self.fnum("problem", "reg_r", 0.0),
                initial=self.initial(),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> Grid:
        cells = self.flist("grid", "cells", [64.0])
        extents = self.flist("problem", "domain", [1.0])
        if len(cells) != len(extents):
            raise ConfigError("grid cells and problem domain disagree on dimension")
        try:
            return Grid(tuple(extents), tuple(int(c) for c in cells))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def stepper(self) -> StepperConfig:
        try:
            return StepperConfig(
                dt=self.fnum("stepper", "dt", 0.01),
                newton_tol=self.fnum("stepper", "newton_tol", 1e-10),
                newton_max_iters=self.inum("stepper", "newton_max_iters", 50),
                picard_tol=self.fnum("stepper", "picard_tol", 1e-10),
                picard_max_iters=self.inum("stepper", "picard_max_iters", 20),
                dt_halving_max=self.inum("stepper", "dt_halving_max", 6),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def record_times(self, horizon: float):
        explicit = self.flist("record", "times", None)
        if explicit is not None:
            return sorted(explicit)
        count = self.inum("record", "count", None)
        if count is None:
            return None
        if count < 1:
            raise ConfigError("[record] count must be >= 1")
        if horizon == 0:
            return [0.0]
        return list(np.linspace(0.0, horizon, count))

    def manifest_lines(self) -> list[str]:
        lines = [f"scenario = {self.scenario}", f"seed = {self.seed}"]
        for section in sorted(self.sections):
            lines.append(f"[{section}]")
            for key in sorted(self.sections[section]):
                lines.append(f"{key} = {self.sections[section][key]}")
        return lines
