# config.py

from __future__ import annotations

import hashlib
import logging
from typing import TYPE_CHECKING
from typing import Annotated
from typing import Any
from typing import List
from typing import Literal
from typing import Optional
from typing import Union

import numpy as np
import yaml
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import field_validator
from pydantic import model_validator

from ldcross import priors
from ldcross._exceptions import InvalidConfigError
from ldcross.constants import ARG_TOL
from ldcross.constants import DEFAULT_ALPHA
from ldcross.constants import DEFAULT_BATCH
from ldcross.constants import DEFAULT_GRID
from ldcross.constants import DEFAULT_LEVEL
from ldcross.constants import DEFAULT_OUTPUT
from ldcross.constants import RATE_TOL
from ldcross.constants import REFINE_LEVELS
from ldcross.constants import SCAN_POINTS
from ldcross.models.kernels import BrownianMotion
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.paths import Path
from ldcross.models.paths import TimeGrid
from ldcross.models.priors import Degenerate
from ldcross.models.priors import GaussianPerturbation
from ldcross.models.priors import UniformSupport
from ldcross.models.problem import CrossingProblem
from ldcross.models.problem import RandomDiffusionOU
from ldcross.models.problem import RandomMeanVariance
from ldcross.models.problem import RateSearch

if TYPE_CHECKING:
    from pathlib import Path as FilePath

    from ldcross.datatypes import BaseKernel
    from ldcross.datatypes import PriorModel
    from ldcross.models.priors import Target

log = logging.getLogger(__name__)

DIGEST_SIZE = 16


class Schema(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True, allow_inf_nan=False)


def _reason(err: ValueError) -> str:
    if isinstance(err, ValidationError):
        return '; '.join(e['msg'].removeprefix('Value error, ') for e in err.errors())
    return str(err)


# priors


class DegenerateSpec(Schema):
    kind: Literal['degenerate'] = 'degenerate'
    value: float

    def build(self, target: Target, alpha: float) -> PriorModel:
        return Degenerate(value=self.value, target=target, alpha=alpha)


class UniformSpec(Schema):
    kind: Literal['uniform'] = 'uniform'
    a: float
    b: float

    def build(self, target: Target, alpha: float) -> PriorModel:
        return UniformSupport(a=self.a, b=self.b, target=target, alpha=alpha)


class GaussianSpec(Schema):
    kind: Literal['gaussian'] = 'gaussian'
    center: float
    variance: float

    def build(self, target: Target, alpha: float) -> PriorModel:
        return GaussianPerturbation(center=self.center, variance=self.variance, target=target, alpha=alpha)


PriorSpec = Annotated[Union[DegenerateSpec, UniformSpec, GaussianSpec], Field(discriminator='kind')]


# base kernels


class BrownianSpec(Schema):
    kind: Literal['brownian'] = 'brownian'

    def build(self) -> BaseKernel:
        return BrownianMotion()


class OUKernelSpec(Schema):
    kind: Literal['ou'] = 'ou'
    a1: float = 0.0
    y: float = 1.0

    def build(self) -> BaseKernel:
        return OrnsteinUhlenbeck(a1=self.a1, y=self.y)


BaseSpec = Annotated[Union[BrownianSpec, OUKernelSpec], Field(discriminator='kind')]


# families


class RMVSpec(Schema):
    kind: Literal['rmv'] = 'rmv'
    base: BaseSpec = Field(default_factory=BrownianSpec)
    y1: PriorSpec
    y2: PriorSpec


class OUFamilySpec(Schema):
    kind: Literal['ou'] = 'ou'
    a0: float = 0.0
    a1: float = 0.0
    x: float = 0.0
    y: PriorSpec


FamilySpec = Annotated[Union[RMVSpec, OUFamilySpec], Field(discriminator='kind')]


# barriers


class ZeroBarrier(Schema):
    kind: Literal['zero'] = 'zero'

    def sample(self, grid: TimeGrid) -> Path:
        return Path.constant(0.0, grid)


class LinearBarrier(Schema):
    kind: Literal['linear'] = 'linear'
    slope: float
    intercept: float = 0.0

    def sample(self, grid: TimeGrid) -> Path:
        return Path.from_function(lambda t: self.intercept + self.slope * t, grid)


class TableBarrier(Schema):
    """Values on equispaced knots of [0, 1], linearly interpolated onto the grid."""

    kind: Literal['table'] = 'table'
    values: List[float] = Field(min_length=2)

    def sample(self, grid: TimeGrid) -> Path:
        knots = np.linspace(0.0, 1.0, len(self.values))
        return Path(values=np.interp(grid.points, knots, self.values), grid=grid)


BarrierSpec = Annotated[Union[ZeroBarrier, LinearBarrier, TableBarrier], Field(discriminator='kind')]


class ProblemSpec(Schema):
    family: FamilySpec
    barrier: BarrierSpec = Field(default_factory=ZeroBarrier)
    level: float = DEFAULT_LEVEL
    alpha: float = DEFAULT_ALPHA

    @model_validator(mode='after')
    def _domain(self) -> ProblemSpec:
        # every domain constructor runs here, so a config that parses also builds
        self.build_family()
        return self

    def _prior(self, name: str, spec: PriorSpec, target: Target) -> PriorModel:
        try:
            prior = spec.build(target, self.alpha)
            priors.validate(prior)
        except (ValueError, InvalidConfigError) as e:
            err = f'family.{name}: {_reason(e) if isinstance(e, ValueError) else e}'
            raise ValueError(err) from e
        return prior

    def build_family(self) -> RandomMeanVariance | RandomDiffusionOU:
        family = self.family
        if isinstance(family, RMVSpec):
            try:
                base = family.base.build()
            except ValueError as e:
                err = f'family.base: {_reason(e)}'
                raise ValueError(err) from e
            return RandomMeanVariance(
                base=base,
                y1=self._prior('y1', family.y1, 'variance'),
                y2=self._prior('y2', family.y2, 'mean'),
            )
        return RandomDiffusionOU(a0=family.a0, a1=family.a1, x=family.x, y=self._prior('y', family.y, 'diffusion'))


class SearchSpec(Schema):
    scan_points: int = Field(default=SCAN_POINTS, ge=3)
    levels: int = Field(default=REFINE_LEVELS, ge=1)
    tol: float = Field(default=RATE_TOL, gt=0)
    xtol: float = Field(default=ARG_TOL, gt=0)

    def build(self) -> RateSearch:
        return RateSearch(scan_points=self.scan_points, levels=self.levels, tol=self.tol, xtol=self.xtol)


class MonteCarloSpec(Schema):
    n_ladder: List[int] = Field(min_length=1)
    paths: int = Field(gt=0)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    batch_size: int = Field(default=DEFAULT_BATCH, gt=0)
    scheme: Literal['exact', 'euler'] = 'exact'

    @field_validator('n_ladder')
    @classmethod
    def _increasing(cls, v: list[int]) -> list[int]:
        if any(n < 1 for n in v):
            err = f'n_ladder {v} must hold positive integers'
            raise ValueError(err)
        if any(b <= a for a, b in zip(v, v[1:])):
            err = f'n_ladder {v} must be strictly increasing'
            raise ValueError(err)
        return v


class OutputSpec(Schema):
    directory: str = DEFAULT_OUTPUT


class ExperimentConfig(Schema):
    problem: ProblemSpec
    grid: int = DEFAULT_GRID
    search: SearchSpec = Field(default_factory=SearchSpec)
    montecarlo: Optional[MonteCarloSpec] = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator('grid')
    @classmethod
    def _dyadic(cls, v: int) -> int:
        TimeGrid(M=v)
        return v

    @model_validator(mode='after')
    def _barrier(self) -> ExperimentConfig:
        # the barrier is only sampled on the experiment grid, so check it there
        try:
            self.problem.barrier.sample(self.time_grid)
        except ValueError as e:
            err = f'problem.barrier: {_reason(e)}'
            raise ValueError(err) from e
        return self

    @property
    def time_grid(self) -> TimeGrid:
        return TimeGrid(M=self.grid)


def _errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = '.'.join(str(p) for p in e['loc'])
        msg = e['msg'].removeprefix('Value error, ')
        lines.append(f'{loc}: {msg}' if loc else msg)
    return '; '.join(lines)


def parse_config(data: Any) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        err = f'invalid config: {_errors(e)}'
        raise InvalidConfigError(err) from e


def load_config(filepath: FilePath) -> ExperimentConfig:
    if not filepath.exists():
        err = f'config {filepath.as_posix()!r} not found'
        raise FileNotFoundError(err)
    log.debug('reading config from %r', filepath.as_posix())
    try:
        data = yaml.safe_load(filepath.read_text())
    except yaml.YAMLError as e:
        err = f'config {filepath.as_posix()!r} is not valid YAML: {e}'
        raise InvalidConfigError(err) from e
    return parse_config(data)


def override(cfg: ExperimentConfig, seed: int | None = None, grid: int | None = None) -> ExperimentConfig:
    """Apply CLI overrides; the result is re-validated so the digest covers what runs."""
    data = cfg.model_dump(mode='json')
    if grid is not None:
        data['grid'] = grid
    if seed is not None:
        if data['montecarlo'] is None:
            log.warning('--seed given but the config has no montecarlo section')
        else:
            data['montecarlo']['master_seed'] = seed
    return parse_config(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.model_dump(mode='json'), sort_keys=True, default_flow_style=False)


def config_digest(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:DIGEST_SIZE]


def to_problem(cfg: ExperimentConfig) -> CrossingProblem:
    grid = cfg.time_grid
    spec = cfg.problem
    return CrossingProblem(
        family=spec.build_family(),
        barrier=spec.barrier.sample(grid),
        grid=grid,
        level=spec.level,
    )
