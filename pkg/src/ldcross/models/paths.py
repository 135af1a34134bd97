# paths.py

from __future__ import annotations

from typing import Callable

import numpy as np
from pydantic import ConfigDict
from pydantic import field_validator
from pydantic.dataclasses import dataclass

from ldcross.constants import DEFAULT_ALPHA

ARRAYS = ConfigDict(arbitrary_types_allowed=True)


def _frozen_array(values: object) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """Uniform dyadic grid t_i = i/M on [0, 1]."""

    M: int

    @field_validator('M')
    @classmethod
    def _dyadic(cls, v: int) -> int:
        if v < 2 or v & (v - 1):
            err = f'grid size M={v} must be a power of two >= 2'
            raise ValueError(err)
        return v

    @property
    def size(self) -> int:
        return self.M + 1

    @property
    def dt(self) -> float:
        return 1.0 / self.M

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.M + 1) / self.M

    def coarsen(self) -> TimeGrid:
        return TimeGrid(M=self.M // 2)

    def refine(self) -> TimeGrid:
        return TimeGrid(M=self.M * 2)


@dataclass(frozen=True, eq=False, config=ARRAYS)
class Path:
    values: np.ndarray
    grid: TimeGrid

    @field_validator('values', mode='before')
    @classmethod
    def _as_array(cls, v: object) -> np.ndarray:
        return _frozen_array(v)

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.size,):
            err = f'path has shape {self.values.shape}, grid M={self.grid.M} needs ({self.grid.size},)'
            raise ValueError(err)
        if not np.all(np.isfinite(self.values)):
            err = 'path values must be finite'
            raise ValueError(err)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], grid: TimeGrid) -> Path:
        return cls(values=np.broadcast_to(fn(grid.points), (grid.size,)), grid=grid)

    @classmethod
    def constant(cls, value: float, grid: TimeGrid) -> Path:
        return cls(values=np.full(grid.size, float(value)), grid=grid)

    def at(self, t: float | np.ndarray) -> float | np.ndarray:
        """Piecewise-linear interpolation between grid samples."""
        out = np.interp(t, self.grid.points, self.values)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False, config=ARRAYS)
class PositivePath(Path):
    """Path bounded below by alpha > 0, used for variance and diffusion slots."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.alpha <= 0:
            err = f'alpha={self.alpha} must be > 0'
            raise ValueError(err)
        if np.any(self.values < self.alpha):
            err = f'path minimum {self.values.min()} below alpha={self.alpha}'
            raise ValueError(err)

    @classmethod
    def constant(cls, value: float, grid: TimeGrid, alpha: float = DEFAULT_ALPHA) -> PositivePath:
        return cls(values=np.full(grid.size, float(value)), grid=grid, alpha=alpha)

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        grid: TimeGrid,
        alpha: float = DEFAULT_ALPHA,
    ) -> PositivePath:
        return cls(values=np.broadcast_to(fn(grid.points), (grid.size,)), grid=grid, alpha=alpha)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    @property
    def cell_values(self) -> np.ndarray:
        # value held on [t_i, t_{i+1}): midpoint of the two grid samples
        return 0.5 * (self.values[:-1] + self.values[1:])


VariancePath = PositivePath
DiffusionPath = PositivePath
