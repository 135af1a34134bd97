# problem.py

from __future__ import annotations

import logging
from typing import Union

import numpy as np
from pydantic import model_validator
from pydantic.dataclasses import dataclass

from ldcross.constants import ARG_TOL
from ldcross.constants import DEFAULT_LEVEL
from ldcross.constants import RATE_TOL
from ldcross.constants import REFINE_LEVELS
from ldcross.constants import SCAN_POINTS
from ldcross.models.kernels import BrownianMotion
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.paths import ARRAYS
from ldcross.models.paths import Path
from ldcross.models.paths import TimeGrid
from ldcross.models.priors import Degenerate
from ldcross.models.priors import GaussianPerturbation
from ldcross.models.priors import UniformSupport

log = logging.getLogger(__name__)

Prior = Union[Degenerate, UniformSupport, GaussianPerturbation]


@dataclass(frozen=True, eq=False, config=ARRAYS)
class RandomMeanVariance:
    """Z^n = X^n Y1^n + Y2^n with X^n = X / sqrt(n) for a base kernel of X."""

    base: Union[BrownianMotion, OrnsteinUhlenbeck]
    y1: Prior
    y2: Prior

    @model_validator(mode='after')
    def _slots(self) -> RandomMeanVariance:
        if self.y1.target != 'variance':
            err = f'y1 prior must target the variance slot, got {self.y1.target!r}'
            raise ValueError(err)
        if self.y2.target != 'mean':
            err = f'y2 prior must target the mean slot, got {self.y2.target!r}'
            raise ValueError(err)
        return self

    @property
    def priors(self) -> tuple[Prior, Prior]:
        return self.y1, self.y2


@dataclass(frozen=True)
class RandomDiffusionOU:
    """dZ = (a0 + a1 Z) dt + Y / sqrt(n) dW, Z_0 = x."""

    a0: float
    a1: float
    x: float
    y: Prior

    @model_validator(mode='after')
    def _slots(self) -> RandomDiffusionOU:
        if self.y.target != 'diffusion':
            err = f'y prior must target the diffusion slot, got {self.y.target!r}'
            raise ValueError(err)
        return self

    @property
    def priors(self) -> tuple[Prior]:
        return (self.y,)


Family = Union[RandomMeanVariance, RandomDiffusionOU]


@dataclass(frozen=True, eq=False, config=ARRAYS)
class CrossingProblem:
    """p_n = P(sup_t (Z^n_t - phi(t)) > level)."""

    family: Family
    barrier: Path
    grid: TimeGrid
    level: float = DEFAULT_LEVEL

    @model_validator(mode='after')
    def _consistent(self) -> CrossingProblem:
        if self.barrier.grid != self.grid:
            err = f'barrier on M={self.barrier.grid.M}, problem grid M={self.grid.M}'
            raise ValueError(err)
        start = self.deterministic_start
        if start is not None and not self.level + self.barrier.values[0] > start:
            log.warning(
                'level %s + phi(0)=%s is not above the start %s: the crossing has zero rate',
                self.level,
                self.barrier.values[0],
                start,
            )
        return self

    @property
    def deterministic_start(self) -> float | None:
        if isinstance(self.family, RandomDiffusionOU):
            return self.family.x
        y2 = self.family.y2
        if isinstance(y2, Degenerate):
            return y2.value
        return None

    @classmethod
    def flat(cls, family: Family, grid: TimeGrid, level: float = DEFAULT_LEVEL) -> CrossingProblem:
        return cls(family=family, barrier=Path(values=np.zeros(grid.size), grid=grid), grid=grid, level=level)


@dataclass(frozen=True)
class RateSearch:
    scan_points: int = SCAN_POINTS
    levels: int = REFINE_LEVELS
    tol: float = RATE_TOL
    xtol: float = ARG_TOL

    @model_validator(mode='after')
    def _positive(self) -> RateSearch:
        if self.scan_points < 3 or self.levels < 1 or self.tol <= 0 or self.xtol <= 0:  # noqa: PLR2004
            err = f'invalid search settings {self}'
            raise ValueError(err)
        return self
