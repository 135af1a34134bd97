# selftest.py

from __future__ import annotations

import logging
import math
from typing import Any
from typing import Callable
from typing import NamedTuple

from ldcross import config
from ldcross import crossing
from ldcross import rkhs
from ldcross.models.kernels import BrownianMotion
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.kernels import Scaled
from ldcross.models.paths import PositivePath
from ldcross.models.paths import TimeGrid
from ldcross.rkhs import QuadFormSolver

log = logging.getLogger(__name__)

REPRODUCING_TOL = 1e-8
HOELDER_TOL = 1e-12
HOELDER_DRIFT = 0.02

DEGENERATE_ONE = {'kind': 'degenerate', 'value': 1.0}
DEGENERATE_ZERO = {'kind': 'degenerate', 'value': 0.0}

BUILTIN: dict[str, dict[str, Any]] = {
    'brownian-degenerate': {
        'problem': {'family': {'kind': 'rmv', 'base': {'kind': 'brownian'}, 'y1': DEGENERATE_ONE, 'y2': DEGENERATE_ZERO}},
    },
    'random-variance': {
        'problem': {
            'family': {
                'kind': 'rmv',
                'base': {'kind': 'brownian'},
                'y1': {'kind': 'uniform', 'a': 1.0, 'b': 2.0},
                'y2': DEGENERATE_ZERO,
            },
        },
    },
    'random-mean': {
        'problem': {
            'family': {
                'kind': 'rmv',
                'base': {'kind': 'brownian'},
                'y1': DEGENERATE_ONE,
                'y2': {'kind': 'gaussian', 'center': 0.0, 'variance': 1.0},
            },
        },
    },
    'ou-a1-1': {
        'problem': {'family': {'kind': 'ou', 'a0': 0.0, 'a1': 1.0, 'x': 0.0, 'y': DEGENERATE_ONE}},
    },
}


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def builtin(name: str) -> config.ExperimentConfig:
    return config.parse_config(BUILTIN[name])


def _within(name: str, value: float, expected: float, tol: float) -> Check:
    gap = abs(value - expected)
    return Check(name, gap <= tol, f'{value:.12g} vs {expected:.12g} (|gap|={gap:.3g}, tol={tol:g})')


def check_rates() -> list[Check]:
    """Closed-form crossing rates of the built-in problems."""
    checks = []

    problem = config.to_problem(builtin('brownian-degenerate'))
    result = crossing.minimize_rate(problem)
    checks.append(_within('brownian rate', result.rate, 0.5, 1e-9))
    checks.append(_within('brownian t*', result.t_star, 1.0, 1e-6))
    checks.append(_within('brownian brute force', crossing.brute_force_rate(problem), result.rate, 1e-6))

    result = crossing.minimize_rate(config.to_problem(builtin('random-variance')))
    checks.append(_within('random variance rate', result.rate, 0.125, 1e-8))
    checks.append(_within('random variance y1*', result.y_star[0], 2.0, 1e-6))

    result = crossing.minimize_rate(config.to_problem(builtin('random-mean')))
    checks.append(_within('random mean rate', result.rate, 0.25, 1e-8))
    checks.append(_within('random mean y2*', result.y_star[1], 0.5, 1e-5))

    result = crossing.minimize_rate(config.to_problem(builtin('ou-a1-1')))
    checks.append(_within('ou rate', result.rate, 1 / math.expm1(2), 1e-8))
    checks.append(_within('ou t*', result.t_star, 1.0, 1e-6))
    return checks


def shipped_kernels(grid: TimeGrid) -> dict[str, Any]:
    wave = PositivePath.from_function(lambda t: 1.5 + 0.5 * (t - 0.5) ** 2, grid)
    return {
        'brownian': BrownianMotion(),
        'ou a1=1': OrnsteinUhlenbeck(a1=1.0),
        'ou a1=-0.5 y=2': OrnsteinUhlenbeck(a1=-0.5, y=2.0),
        'ou y(t)': OrnsteinUhlenbeck(a1=0.5, y=wave),
        'scaled brownian': Scaled(y1=2.0, base=BrownianMotion()),
        'scaled ou': Scaled(y1=wave, base=OrnsteinUhlenbeck(a1=-1.0)),
    }


def check_reproducing(grid: TimeGrid | None = None) -> list[Check]:
    grid = grid or TimeGrid(M=256)
    checks = []
    for name, model in shipped_kernels(grid).items():
        error = rkhs.reproducing_error(QuadFormSolver.from_model(model, grid))
        checks.append(Check(f'reproducing {name}', error <= REPRODUCING_TOL, f'max relative error {error:.3g}'))
    return checks


def check_hoelder() -> list[Check]:
    """Brownian family equals 1 at alpha = 1/2; the OU family is stable under refinement."""

    def speed(n: int) -> float:
        return float(n)

    probe = (1, 4, 16, 64)
    brownian = rkhs.hoelder_tightness_bound(BrownianMotion(), speed, 0.5, TimeGrid(M=256), probe)
    checks = [_within('hoelder brownian', brownian, 1.0, HOELDER_TOL)]

    ou = OrnsteinUhlenbeck(a1=1.0)
    coarse = rkhs.hoelder_tightness_bound(ou, speed, 0.5, TimeGrid(M=256), probe)
    fine = rkhs.hoelder_tightness_bound(ou, speed, 0.5, TimeGrid(M=1024), probe)
    drift = abs(fine - coarse) / coarse
    passed = math.isfinite(fine) and drift <= HOELDER_DRIFT
    checks.append(Check('hoelder ou', passed, f'{coarse:.6g} (M=256) vs {fine:.6g} (M=1024)'))
    return checks


SUITE: tuple[Callable[[], list[Check]], ...] = (check_rates, check_reproducing, check_hoelder)


def run() -> list[Check]:
    checks = []
    for suite in SUITE:
        for check in suite():
            level = logging.INFO if check.passed else logging.ERROR
            log.log(level, '%s: %s (%s)', 'ok' if check.passed else 'FAIL', check.name, check.detail)
            checks.append(check)
    return checks
