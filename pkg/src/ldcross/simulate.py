# simulate.py

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING
from typing import Literal
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.signal import lfilter

from ldcross import kernels
from ldcross.constants import A1_EPS
from ldcross.constants import JITTER_SCALE
from ldcross.models.kernels import BrownianMotion
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.paths import Path
from ldcross.models.paths import PositivePath
from ldcross.models.results import PathSample
from ldcross.priors import sample_y

if TYPE_CHECKING:
    from ldcross.datatypes import FloatArray
    from ldcross.datatypes import KernelModel
    from ldcross.datatypes import PriorModel
    from ldcross.models.paths import TimeGrid

log = logging.getLogger(__name__)

Scheme = Literal['exact', 'euler']


class Streams(NamedTuple):
    prior: np.random.Generator
    noise: np.random.Generator
    key: tuple[int, ...]


def spawn_streams(master_seed: int, *key: int) -> Streams:
    """Independent prior and noise generators for the batch identified by `key`."""
    ss = np.random.SeedSequence([master_seed, *key])
    prior, noise = ss.spawn(2)
    return Streams(prior=np.random.default_rng(prior), noise=np.random.default_rng(noise), key=(master_seed, *key))


def cholesky_factor(gram: FloatArray) -> FloatArray:
    """Lower factor L with L L^T = gram + jitter Id; zero for a zero gram."""
    size = gram.shape[0]
    trace = float(np.trace(gram))
    if trace == 0:
        return np.zeros_like(gram, dtype=float)
    jitter = JITTER_SCALE * trace / size
    return scipy.linalg.cholesky(gram + jitter * np.eye(size), lower=True)


def sample_gaussian_batch(factor: FloatArray, rng: np.random.Generator, size: int) -> FloatArray:
    """`size` centered Gaussian vectors with covariance factor @ factor.T, one per row."""
    xi = rng.standard_normal((size, factor.shape[0]))
    return xi @ factor.T


def sample_gaussian_path(factor: FloatArray, grid: TimeGrid, rng: np.random.Generator) -> Path:
    return Path(values=sample_gaussian_batch(factor, rng, 1)[0], grid=grid)


def _linear_recursion(start: FloatArray, rho: float, drive: FloatArray) -> FloatArray:
    """
    z_0 = start, z_{i+1} = rho z_i + drive_i along axis 1.

    Returns an array of shape (batch, M + 1).
    """
    zi = (rho * start)[:, None]
    steps, _ = lfilter([1.0], [1.0, -rho], drive, axis=1, zi=zi)
    return np.concatenate([start[:, None], steps], axis=1)


def _transition(a1: float, dt: float, scheme: Scheme = 'exact') -> tuple[float, float, float]:
    """(rho, drift factor, variance factor) of one grid step of dZ = (a0 + a1 Z) dt + dW."""
    if scheme == 'euler':
        return 1.0 + a1 * dt, dt, dt
    if abs(a1) < A1_EPS:
        return 1.0, dt, dt
    rho = math.exp(a1 * dt)
    return rho, math.expm1(a1 * dt) / a1, math.expm1(2 * a1 * dt) / (2 * a1)


def _markov_base(model: BrownianMotion | OrnsteinUhlenbeck, grid: TimeGrid) -> tuple[float, FloatArray]:
    """Centered transition of a Markov base kernel: rho and per-cell noise scale."""
    if isinstance(model, BrownianMotion):
        return 1.0, np.full(grid.M, math.sqrt(grid.dt))
    rho, _, var = _transition(model.a1, grid.dt)
    y = model.y
    if isinstance(y, PositivePath):
        cells = y.cell_values
    else:
        cells = np.full(grid.M, y)
    return rho, cells * math.sqrt(var)


def sample_centered_batch(model: KernelModel, grid: TimeGrid, rng: np.random.Generator, size: int) -> FloatArray:
    """
    Zero-mean paths with covariance `model` on the grid.

    Brownian and OU kernels run their exact Markov recursion, anything
    else goes through the Cholesky factor of the Gram matrix.
    """
    if isinstance(model, (BrownianMotion, OrnsteinUhlenbeck)):
        rho, scale = _markov_base(model, grid)
        drive = scale[None, :] * rng.standard_normal((size, grid.M))
        return _linear_recursion(np.zeros(size), rho, drive)
    factor = cholesky_factor(kernels.gram_matrix(model, grid))
    return sample_gaussian_batch(factor, rng, size)


def sample_rmv_batch(
    n: int,
    priors: tuple[PriorModel, PriorModel],
    base: KernelModel,
    grid: TimeGrid,
    streams: Streams,
    size: int,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Z^n = X y1 / sqrt(n) + y2; returns (z, y1, y2) with z of shape (size, M + 1)."""
    y1 = sample_y(priors[0], n, streams.prior, size=size)
    y2 = sample_y(priors[1], n, streams.prior, size=size)
    x = sample_centered_batch(base, grid, streams.noise, size)
    z = x * (y1 / math.sqrt(n))[:, None] + y2[:, None]
    return z, y1, y2


def sample_ou_batch(
    n: int,
    prior: PriorModel,
    a0: float,
    a1: float,
    x: float,
    grid: TimeGrid,
    streams: Streams,
    size: int,
    scheme: Scheme = 'exact',
) -> tuple[FloatArray, FloatArray]:
    """
    dZ = (a0 + a1 Z) dt + Y / sqrt(n) dW, Z_0 = x, with Y drawn once per path.

    `exact` uses the Gaussian transition of the OU process (no
    discretization bias); `euler` is the Euler–Maruyama cross-check.
    """
    y = sample_y(prior, n, streams.prior, size=size)
    rho, drift, var = _transition(a1, grid.dt, scheme)
    noise = streams.noise.standard_normal((size, grid.M))
    drive = a0 * drift + (y * math.sqrt(var / n))[:, None] * noise
    z = _linear_recursion(np.full(size, float(x)), rho, drive)
    return z, y


def sample_rmv_path(
    n: int,
    priors: tuple[PriorModel, PriorModel],
    base: KernelModel,
    grid: TimeGrid,
    streams: Streams,
) -> PathSample:
    z, y1, y2 = sample_rmv_batch(n, priors, base, grid, streams, 1)
    return PathSample(z=Path(values=z[0], grid=grid), y=(float(y1[0]), float(y2[0])), n=n, seed=streams.key)


def sample_ou_path(
    n: int,
    prior: PriorModel,
    a0: float,
    a1: float,
    x: float,
    grid: TimeGrid,
    streams: Streams,
    scheme: Scheme = 'exact',
) -> PathSample:
    z, y = sample_ou_batch(n, prior, a0, a1, x, grid, streams, 1, scheme)
    return PathSample(z=Path(values=z[0], grid=grid), y=(float(y[0]),), n=n, seed=streams.key)
