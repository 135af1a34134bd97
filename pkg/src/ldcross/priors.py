# priors.py

from __future__ import annotations

import functools
import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.stats import norm

from ldcross._exceptions import InvalidConfigError
from ldcross.constants import CLAMP_LIMIT
from ldcross.constants import GAUSSIAN_BRACKET
from ldcross.models.priors import Degenerate
from ldcross.models.priors import GaussianPerturbation
from ldcross.models.priors import UniformSupport

if TYPE_CHECKING:
    from ldcross.datatypes import ArrayLike
    from ldcross.datatypes import PriorModel

log = logging.getLogger(__name__)


def clamp_probability(prior: GaussianPerturbation, n: int = 1) -> float:
    """P(Y^n < alpha) for a positive target, 0 for the mean slot."""
    if not prior.positive:
        return 0.0
    return float(norm.cdf((prior.alpha - prior.center) / math.sqrt(prior.variance / n)))


def validate(prior: PriorModel) -> None:
    """Configuration checks that go beyond the dataclass invariants."""
    if isinstance(prior, GaussianPerturbation):
        p = clamp_probability(prior, n=1)
        if p > CLAMP_LIMIT:
            err = (
                f'gaussian prior for {prior.target} puts mass {p:.3g} below alpha={prior.alpha} at n=1 '
                f'(limit {CLAMP_LIMIT:g}); raise center or lower variance'
            )
            raise InvalidConfigError(err)


@functools.singledispatch
def _draw(prior: PriorModel, n: int, rng: np.random.Generator, size: int | None) -> ArrayLike:
    err = f'no sampler for {type(prior).__name__!r}'
    raise NotImplementedError(err)


@_draw.register(Degenerate)
def _(prior: Degenerate, n: int, rng: np.random.Generator, size: int | None) -> ArrayLike:  # noqa: ARG001
    return prior.value if size is None else np.full(size, prior.value)


@_draw.register(UniformSupport)
def _(prior: UniformSupport, n: int, rng: np.random.Generator, size: int | None) -> ArrayLike:  # noqa: ARG001
    return rng.uniform(prior.a, prior.b, size=size)


@_draw.register(GaussianPerturbation)
def _(prior: GaussianPerturbation, n: int, rng: np.random.Generator, size: int | None) -> ArrayLike:
    draws = prior.center + math.sqrt(prior.variance / n) * rng.standard_normal(size=size)
    if prior.positive:
        draws = np.maximum(draws, prior.alpha)
    return draws


def sample_y(prior: PriorModel, n: int, rng: np.random.Generator, size: int | None = None) -> ArrayLike:
    """
    Draw the conditioning value of Y^n.

    Returns a float when `size` is None, else an array of `size` draws.
    The stream is consumed identically for every call with equal `size`.
    """
    if n < 1:
        err = f'n={n} must be >= 1'
        raise ValueError(err)
    validate(prior)
    out = _draw(prior, n, rng, size)
    return float(out) if size is None else np.asarray(out, dtype=float)


def rate_I_Y(prior: PriorModel, y: ArrayLike) -> ArrayLike:  # noqa: N802
    """Good rate function of the prior family at speed n."""
    y = np.asarray(y, dtype=float)
    if isinstance(prior, Degenerate):
        out = np.where(y == prior.value, 0.0, np.inf)
    elif isinstance(prior, UniformSupport):
        out = np.where((y >= prior.a) & (y <= prior.b), 0.0, np.inf)
    elif isinstance(prior, GaussianPerturbation):
        out = (y - prior.center) ** 2 / (2 * prior.variance)
        if prior.positive:
            out = np.where(y >= prior.alpha, out, np.inf)
    else:
        err = f'no rate function for {type(prior).__name__!r}'
        raise NotImplementedError(err)
    return float(out) if out.ndim == 0 else out


def bracket(prior: PriorModel) -> tuple[float, float]:
    """Interval outside of which rate_I_Y is +inf or negligible for the search."""
    if isinstance(prior, Degenerate):
        return prior.value, prior.value
    if isinstance(prior, UniformSupport):
        return prior.a, prior.b
    half = GAUSSIAN_BRACKET * prior.scale
    lo = prior.center - half
    if prior.positive:
        lo = max(lo, prior.alpha)
    return lo, prior.center + half
