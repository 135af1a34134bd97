from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import norm

from ldcross import priors
from ldcross._exceptions import InvalidConfigError
from ldcross.models.priors import Degenerate
from ldcross.models.priors import GaussianPerturbation
from ldcross.models.priors import UniformSupport


def test_degenerate_sample() -> None:
    rng = np.random.default_rng(0)
    assert priors.sample_y(Degenerate(value=2.0), 5, rng) == 2.0
    assert np.array_equal(priors.sample_y(Degenerate(value=2.0), 5, rng, size=3), [2.0, 2.0, 2.0])


def test_gaussian_concentrates() -> None:
    rng = np.random.default_rng(1)
    draws = priors.sample_y(GaussianPerturbation(center=1.0, variance=1.0), 10_000, rng, size=20_000)
    assert draws.mean() == pytest.approx(1.0, abs=3 * 0.01 / math.sqrt(20_000))
    assert draws.std() == pytest.approx(0.01, rel=0.05)


def test_uniform_moments() -> None:
    rng = np.random.default_rng(2)
    size = 1_000_000
    draws = priors.sample_y(UniformSupport(a=1.0, b=2.0), 1, rng, size=size)
    assert draws.min() >= 1.0
    assert draws.max() <= 2.0
    assert draws.mean() == pytest.approx(1.5, abs=3 * math.sqrt(1 / 12 / size))


def test_gaussian_positive_target_clamps_at_alpha() -> None:
    prior = GaussianPerturbation(center=1.0, variance=0.05, target='variance')
    draws = priors.sample_y(prior, 1, np.random.default_rng(3), size=100_000)
    assert draws.min() >= prior.alpha


def test_sample_rejects_bad_n() -> None:
    with pytest.raises(ValueError, match='n=0'):
        priors.sample_y(Degenerate(value=1.0), 0, np.random.default_rng(0))


@pytest.mark.parametrize(
    ('prior', 'y', 'expected'),
    [
        (UniformSupport(a=1.0, b=2.0), 1.5, 0.0),
        (UniformSupport(a=1.0, b=2.0), 2.5, math.inf),
        (GaussianPerturbation(center=1.0, variance=1.0), 2.0, 0.5),
        (Degenerate(value=2.0), 1.9, math.inf),
        (Degenerate(value=2.0), 2.0, 0.0),
    ],
)
def test_rate_examples(prior, y, expected) -> None:
    assert priors.rate_I_Y(prior, y) == expected


def test_gaussian_rate_infinite_below_floor() -> None:
    prior = GaussianPerturbation(center=1.0, variance=0.01, target='diffusion')
    assert priors.rate_I_Y(prior, prior.alpha / 2) == math.inf
    assert math.isfinite(priors.rate_I_Y(prior, prior.alpha))


def test_rate_is_vectorized() -> None:
    out = priors.rate_I_Y(GaussianPerturbation(center=0.0, variance=2.0), np.array([0.0, 2.0]))
    assert np.allclose(out, [0.0, 1.0])


@pytest.mark.parametrize(
    'prior',
    [
        UniformSupport(a=-1.0, b=3.0),
        GaussianPerturbation(center=0.2, variance=0.7),
        GaussianPerturbation(center=1.0, variance=0.04, target='variance'),
    ],
)
def test_sublevel_sets_are_closed_intervals(prior) -> None:
    lo, hi = priors.bracket(prior)
    ys = np.linspace(lo - 1, hi + 1, 4001)
    rates = np.asarray(priors.rate_I_Y(prior, ys))
    for level in (0.5, 2.0):
        inside = np.flatnonzero(rates <= level)
        assert inside.size > 0
        assert np.array_equal(inside, np.arange(inside[0], inside[-1] + 1))


def test_gaussian_ldp_matches_exact_tail() -> None:
    # (1/n) log P(Y^n >= y) -> -I_Y(y) for y above the center
    prior = GaussianPerturbation(center=0.0, variance=1.0)
    y = 1.0
    for n, tol in ((64, 0.12), (256, 0.04)):
        rate = -norm.logsf(y * math.sqrt(n)) / n
        assert rate == pytest.approx(priors.rate_I_Y(prior, y), rel=tol)


def test_bracket() -> None:
    assert priors.bracket(Degenerate(value=3.0)) == (3.0, 3.0)
    assert priors.bracket(UniformSupport(a=1.0, b=2.0)) == (1.0, 2.0)
    assert priors.bracket(GaussianPerturbation(center=0.0, variance=4.0)) == (-16.0, 16.0)
    lo, _ = priors.bracket(GaussianPerturbation(center=1.0, variance=0.01, target='variance'))
    assert lo == pytest.approx(0.2)


def test_validate_rejects_heavy_clamping() -> None:
    prior = GaussianPerturbation(center=0.5, variance=1.0, target='variance')
    with pytest.raises(InvalidConfigError, match='below alpha'):
        priors.validate(prior)
    assert priors.clamp_probability(prior) > 1e-3


@pytest.mark.parametrize(
    ('kwargs', 'match'),
    [
        ({'a': 2.0, 'b': 1.0}, 'empty support'),
        ({'a': 0.0, 'b': 1.0, 'target': 'variance'}, 'positivity floor'),
    ],
)
def test_uniform_invalid(kwargs, match) -> None:
    with pytest.raises(ValueError, match=match):
        UniformSupport(**kwargs)


def test_gaussian_invalid_variance() -> None:
    with pytest.raises(ValueError, match='variance'):
        GaussianPerturbation(center=0.0, variance=0.0)
