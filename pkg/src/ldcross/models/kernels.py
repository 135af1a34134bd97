# kernels.py

from __future__ import annotations

from typing import Union

from pydantic import field_validator
from pydantic.dataclasses import dataclass

from ldcross.models.paths import ARRAYS
from ldcross.models.paths import PositivePath


@dataclass(frozen=True)
class BrownianMotion:
    """k(s, t) = s ∧ t, zero mean."""

    def __str__(self) -> str:
        return 'BrownianMotion'


@dataclass(frozen=True, eq=False, config=ARRAYS)
class OrnsteinUhlenbeck:
    """
    Solution of dZ = (a0 + a1 Z) dt + y dW with Z_0 = x.

    `y` is either a positive constant or a diffusion path, held
    piecewise-constant on grid cells.
    """

    a0: float = 0.0
    a1: float = 0.0
    x: float = 0.0
    y: Union[float, PositivePath] = 1.0

    @field_validator('y')
    @classmethod
    def _positive(cls, v: float | PositivePath) -> float | PositivePath:
        if isinstance(v, float) and v <= 0:
            err = f'diffusion y={v} must be > 0'
            raise ValueError(err)
        return v

    @property
    def constant_y(self) -> float | None:
        if isinstance(self.y, float):
            return self.y
        if self.y.is_constant:
            return float(self.y.values[0])
        return None

    def __str__(self) -> str:
        y = self.constant_y
        y_str = f'{y:g}' if y is not None else 'path'
        return f'OrnsteinUhlenbeck(a0={self.a0:g}, a1={self.a1:g}, x={self.x:g}, y={y_str})'


@dataclass(frozen=True, eq=False, config=ARRAYS)
class Scaled:
    """k^{y1}(s, t) = y1(s) y1(t) k(s, t) for a base kernel k."""

    y1: Union[float, PositivePath]
    base: Union[BrownianMotion, OrnsteinUhlenbeck]

    @field_validator('y1')
    @classmethod
    def _positive(cls, v: float | PositivePath) -> float | PositivePath:
        if isinstance(v, float) and v <= 0:
            err = f'variance scaling y1={v} must be > 0'
            raise ValueError(err)
        return v

    def __str__(self) -> str:
        y1 = f'{self.y1:g}' if isinstance(self.y1, float) else 'path'
        return f'Scaled(y1={y1}, base={self.base})'
