# results.py

from __future__ import annotations

from typing import Tuple

from pydantic.dataclasses import dataclass

from ldcross.models.paths import ARRAYS
from ldcross.models.paths import Path


@dataclass(frozen=True, eq=False, config=ARRAYS)
class PathSample:
    z: Path
    y: Tuple[float, ...]
    n: int
    seed: Tuple[int, ...]


@dataclass(frozen=True)
class RateResult:
    """Crossing rate I_phi with its argmin (t*, y*) and the per-grid-t profile."""

    rate: float
    t_star: float
    y_star: Tuple[float, ...]
    profile: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.rate >= 0:
            err = f'rate={self.rate} must be >= 0'
            raise ValueError(err)


@dataclass(frozen=True)
class MCEstimate:
    n: int
    p_hat: float
    hits: int
    paths: int
    ci95: Tuple[float, float]
    seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.hits <= self.paths:
            err = f'hits={self.hits} outside [0, paths={self.paths}]'
            raise ValueError(err)
        lo, hi = self.ci95
        if not lo <= self.p_hat <= hi:
            err = f'p_hat={self.p_hat} outside its interval {self.ci95}'
            raise ValueError(err)


@dataclass(frozen=True)
class SlopeReport:
    """Prefactor-aware fit log p_n ≈ -I n - ½ log n + const."""

    i_hat: float
    intercept: float
    r2: float
    per_n: Tuple[MCEstimate, ...]
