from __future__ import annotations

import pytest

from ldcross.models.kernels import BrownianMotion
from ldcross.models.paths import TimeGrid
from ldcross.models.priors import Degenerate
from ldcross.models.priors import GaussianPerturbation
from ldcross.models.priors import UniformSupport
from ldcross.models.problem import CrossingProblem
from ldcross.models.problem import RandomDiffusionOU
from ldcross.models.problem import RandomMeanVariance


@pytest.fixture
def grid() -> TimeGrid:
    return TimeGrid(M=256)


@pytest.fixture
def brownian_problem(grid: TimeGrid) -> CrossingProblem:
    family = RandomMeanVariance(
        base=BrownianMotion(),
        y1=Degenerate(value=1.0, target='variance'),
        y2=Degenerate(value=0.0),
    )
    return CrossingProblem.flat(family, grid)


@pytest.fixture
def random_variance_problem(grid: TimeGrid) -> CrossingProblem:
    family = RandomMeanVariance(
        base=BrownianMotion(),
        y1=UniformSupport(a=1.0, b=2.0, target='variance'),
        y2=Degenerate(value=0.0),
    )
    return CrossingProblem.flat(family, grid)


@pytest.fixture
def random_mean_problem(grid: TimeGrid) -> CrossingProblem:
    family = RandomMeanVariance(
        base=BrownianMotion(),
        y1=Degenerate(value=1.0, target='variance'),
        y2=GaussianPerturbation(center=0.0, variance=1.0),
    )
    return CrossingProblem.flat(family, grid)


@pytest.fixture
def ou_problem(grid: TimeGrid) -> CrossingProblem:
    family = RandomDiffusionOU(a0=0.0, a1=1.0, x=0.0, y=Degenerate(value=1.0, target='diffusion'))
    return CrossingProblem.flat(family, grid)
