# priors.py

from __future__ import annotations

import math
from typing import TYPE_CHECKING
from typing import Literal

from pydantic import model_validator
from pydantic.dataclasses import dataclass

from ldcross.constants import DEFAULT_ALPHA

Target = Literal['variance', 'mean', 'diffusion']
POSITIVE_TARGETS = ('variance', 'diffusion')


class _Prior:
    """Shared checks; subclasses define `target` and `alpha` fields."""

    if TYPE_CHECKING:
        target: Target
        alpha: float

    @property
    def positive(self) -> bool:
        return self.target in POSITIVE_TARGETS

    def _check_floor(self, value: float, name: str) -> None:
        if self.alpha <= 0:
            err = f'alpha={self.alpha} must be > 0'
            raise ValueError(err)
        if self.positive and value < self.alpha:
            err = f'{name}={value} below positivity floor alpha={self.alpha} for {self.target} target'
            raise ValueError(err)


@dataclass(frozen=True)
class Degenerate(_Prior):
    """Point mass at `value`."""

    value: float
    target: Target = 'mean'
    alpha: float = DEFAULT_ALPHA

    @model_validator(mode='after')
    def _support(self) -> Degenerate:
        self._check_floor(self.value, 'value')
        return self


@dataclass(frozen=True)
class UniformSupport(_Prior):
    """Uniform on [a, b], independent of n."""

    a: float
    b: float
    target: Target = 'mean'
    alpha: float = DEFAULT_ALPHA

    @model_validator(mode='after')
    def _support(self) -> UniformSupport:
        if self.b < self.a:
            err = f'empty support: b={self.b} < a={self.a}'
            raise ValueError(err)
        self._check_floor(self.a, 'a')
        return self


@dataclass(frozen=True)
class GaussianPerturbation(_Prior):
    """center + sqrt(variance / n) * Z, an LDP family with speed n."""

    center: float
    variance: float
    target: Target = 'mean'
    alpha: float = DEFAULT_ALPHA

    @model_validator(mode='after')
    def _support(self) -> GaussianPerturbation:
        if self.variance <= 0:
            err = f'variance={self.variance} must be > 0'
            raise ValueError(err)
        self._check_floor(self.center, 'center')
        return self

    @property
    def scale(self) -> float:
        return math.sqrt(self.variance)
