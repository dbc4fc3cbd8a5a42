"""Initial-data descriptors: buildable, grid-independent recipes for v(0).

Descriptors stay symbolic until build(grid) is called, so the same problem
description can be discretized at any resolution. Mollification is also a
descriptor (a wrapper), applied as a discrete convolution at build time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid


def _bump_profile(tau: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump, peak value 1 at tau = 0."""
    out = np.zeros_like(tau)
    inside = np.abs(tau) < 1.0
    t = tau[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t * t))
    return out


@dataclass(frozen=True)
class ConstantInitial:
    value: float = 1.0

    family = "constant"

    def build(self, grid: Grid) -> Field:
        return Field(grid, np.full(grid.interior_shape, self.value))


@dataclass(frozen=True)
class BumpInitial:
    """Scaled smooth bump centered in the domain (fractions of each extent)."""

    amplitude: float = 1.0
    center: float = 0.5
    width: float = 0.25

    family = "bump"

    def build(self, grid: Grid) -> Field:
        mesh = grid.interior_mesh()
        out = np.full(grid.interior_shape, self.amplitude)
        for coord, extent in zip(mesh, grid.extents):
            tau = (coord - self.center * extent) / (self.width * extent)
            out = out * _bump_profile(tau)
        return Field(grid, out)


@dataclass(frozen=True)
class FourierInitial:
    """Random sine sum with coefficients bounded by amplitude / mode index."""

    amplitude: float = 1.0
    modes: int = 4
    seed: int = 0

    family = "fourier"

    def build(self, grid: Grid) -> Field:
        rng = np.random.default_rng(self.seed)
        mesh = grid.interior_mesh()
        out = np.zeros(grid.interior_shape)
        for k in range(1, self.modes + 1):
            coeff = self.amplitude / k * rng.uniform(-1.0, 1.0)
            mode = np.ones(grid.interior_shape)
            for coord, extent in zip(mesh, grid.extents):
                mode = mode * np.sin(k * np.pi * coord / extent)
            out += coeff * mode
        return Field(grid, out)


@dataclass(frozen=True)
class StepInitial:
    """Discontinuous indicator block, for exercising the mollifier."""

    amplitude: float = 1.0
    lo: float = 0.25
    hi: float = 0.75

    family = "step"

    def build(self, grid: Grid) -> Field:
        mesh = grid.interior_mesh()
        out = np.full(grid.interior_shape, self.amplitude)
        for coord, extent in zip(mesh, grid.extents):
            inside = (coord >= self.lo * extent) & (coord <= self.hi * extent)
            out = out * inside
        return Field(grid, out)


@dataclass(frozen=True)
class MollifiedInitial:
    """Base data convolved with a compact bump kernel of the given width.

    The kernel is a normalized nonnegative weight, so the sup norm cannot
    grow; values are clamped to ||base||_inf + 1 anyway to pin the invariant.
    Zero padding at the ends matches the Dirichlet extension of the data.
    """

    base: "InitialData"
    width: float

    family = "mollified"

    def build(self, grid: Grid) -> Field:
        base = self.base.build(grid)
        vals = base.values
        bound = float(np.max(np.abs(vals))) + 1.0 if vals.size else 1.0
        for axis, h in enumerate(grid.spacing):
            vals = _convolve_axis(vals, h, self.width, axis)
        return Field(grid, np.clip(vals, -bound, bound))


def _convolve_axis(values: np.ndarray, h: float, width: float, axis: int) -> np.ndarray:
    radius = int(np.floor(width / h))
    if radius < 1:
        return values
    offsets = np.arange(-radius, radius + 1)
    kernel = _bump_profile(offsets * h / width)
    kernel = kernel / kernel.sum()
    moved = np.moveaxis(values, axis, 0)
    padded = np.pad(moved, [(radius, radius)] + [(0, 0)] * (moved.ndim - 1))
    out = np.zeros_like(moved)
    for j, k in zip(offsets, kernel):
        out += k * padded[radius + j: radius + j + moved.shape[0]]
    return np.moveaxis(out, 0, axis)


InitialData = (ConstantInitial | BumpInitial | FourierInitial | StepInitial
               | MollifiedInitial)


def initial_data(family: str, **params) -> InitialData:
    table = {
        "constant": ConstantInitial,
        "bump": BumpInitial,
        "fourier": FourierInitial,
        "step": StepInitial,
    }
    if family not in table:
        raise ValueError(f"unknown initial-data family {family!r}")
    return table[family](**params)
