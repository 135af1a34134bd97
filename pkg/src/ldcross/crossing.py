# crossing.py

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING
from typing import Callable
from typing import Iterable
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.stats import linregress
from scipy.stats import norm

from ldcross import kernels
from ldcross import priors
from ldcross import simulate
from ldcross._exceptions import DegenerateTimeError
from ldcross._exceptions import InsufficientHitsError
from ldcross._exceptions import InvalidConfigError
from ldcross._exceptions import NoFiniteRateError
from ldcross.constants import CONFIDENCE
from ldcross.constants import DEFAULT_BATCH
from ldcross.constants import JITTER_SCALE
from ldcross.constants import MIN_HITS
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.paths import Path
from ldcross.models.paths import TimeGrid
from ldcross.models.problem import CrossingProblem
from ldcross.models.problem import RandomDiffusionOU
from ldcross.models.problem import RandomMeanVariance
from ldcross.models.problem import RateSearch
from ldcross.models.results import MCEstimate
from ldcross.models.results import RateResult
from ldcross.models.results import SlopeReport
from ldcross.search import MIN_ZOOM_POINTS
from ldcross.search import golden_section
from ldcross.search import guarded_minimize
from ldcross.search import zoom_minimize

if TYPE_CHECKING:
    from ldcross.datatypes import ArrayLike
    from ldcross.datatypes import FloatArray
    from ldcross.simulate import Scheme

log = logging.getLogger(__name__)

RateFunction = Callable[..., 'ArrayLike']

# rows of the t-grid evaluated together in the coarse scan
SCAN_CHUNK = 256


def _scalar(out: np.ndarray) -> ArrayLike:
    return float(out) if np.ndim(out) == 0 else out


def _crossing_term(gap: ArrayLike, variance: ArrayLike) -> np.ndarray:
    """gap² / (2 variance), +inf where the variance vanishes and gap != 0."""
    gap, variance = np.broadcast_arrays(np.asarray(gap, dtype=float), np.asarray(variance, dtype=float))
    with np.errstate(divide='ignore', invalid='ignore'):
        term = np.where(variance > 0, gap**2 / (2 * variance), np.inf)
    return np.where(gap == 0, 0.0, term)


def _rmv(problem: CrossingProblem) -> RandomMeanVariance:
    if not isinstance(problem.family, RandomMeanVariance):
        err = f'expected a random mean/variance family, got {type(problem.family).__name__}'
        raise TypeError(err)
    return problem.family


def _ou(problem: CrossingProblem) -> RandomDiffusionOU:
    if not isinstance(problem.family, RandomDiffusionOU):
        err = f'expected a random-diffusion OU family, got {type(problem.family).__name__}'
        raise TypeError(err)
    return problem.family


def _gap(problem: CrossingProblem, t: ArrayLike, center: ArrayLike) -> ArrayLike:
    return problem.level + problem.barrier.at(t) - center


def pointwise_rate_rmv(t: ArrayLike, y1: ArrayLike, y2: ArrayLike, problem: CrossingProblem) -> ArrayLike:
    """I_Y(y1, y2) + (c + phi(t) - y2)² / (2 y1² k(t,t))."""
    family = _rmv(problem)
    y1 = np.asarray(y1, dtype=float)
    variance = y1**2 * np.asarray(kernels.covariance(family.base, t, t))
    prior = np.asarray(priors.rate_I_Y(family.y1, y1)) + np.asarray(priors.rate_I_Y(family.y2, y2))
    return _scalar(prior + _crossing_term(_gap(problem, t, y2), variance))


def pointwise_rate_ou(t: ArrayLike, y: ArrayLike, problem: CrossingProblem) -> ArrayLike:
    """I_Y(y) + (c + phi(t) - m(t))² / (2 k^y(t,t))."""
    family = _ou(problem)
    y = np.asarray(y, dtype=float)
    variance = y**2 * np.asarray(kernels.ou_variance(family.a1, t))
    mean = kernels.ou_mean(family.x, family.a0, family.a1, t)
    prior = np.asarray(priors.rate_I_Y(family.y, y))
    return _scalar(prior + _crossing_term(_gap(problem, t, mean), variance))


def _rate_function(problem: CrossingProblem) -> RateFunction:
    if isinstance(problem.family, RandomMeanVariance):
        return functools.partial(_rmv_rate, problem=problem)
    return functools.partial(_ou_rate, problem=problem)


def _rmv_rate(t: ArrayLike, y1: ArrayLike, y2: ArrayLike, problem: CrossingProblem) -> ArrayLike:
    return pointwise_rate_rmv(t, y1, y2, problem)


def _ou_rate(t: ArrayLike, y: ArrayLike, problem: CrossingProblem) -> ArrayLike:
    return pointwise_rate_ou(t, y, problem)


def _conditioning(problem: CrossingProblem, y: float | Sequence[float]) -> tuple[float, ...]:
    ys = (float(y),) if np.ndim(y) == 0 else tuple(float(v) for v in y)  # type: ignore[union-attr]
    expected = len(problem.family.priors)
    if len(ys) != expected:
        err = f'expected {expected} conditioning values, got {len(ys)}'
        raise ValueError(err)
    return ys


def _center_and_variance(problem: CrossingProblem, t: float, ys: tuple[float, ...]) -> tuple[float, float]:
    if isinstance(problem.family, RandomMeanVariance):
        y1, y2 = ys
        return y2, y1**2 * float(kernels.covariance(problem.family.base, t, t))
    family = problem.family
    (y,) = ys
    return float(kernels.ou_mean(family.x, family.a0, family.a1, t)), y**2 * float(kernels.ou_variance(family.a1, t))


def lagrange_beta(t: float, problem: CrossingProblem, y: float | Sequence[float]) -> float:
    """
    Multiplier of the optimal measure beta · delta_t at crossing time t.

    ½ beta² k(t,t) reproduces the pointwise crossing term, with k the
    conditional kernel (k̄ for the mean/variance family, k^y for OU).
    """
    ys = _conditioning(problem, y)
    center, variance = _center_and_variance(problem, t, ys)
    if variance <= 0:
        err = f'kernel variance vanishes at t={t}'
        raise DegenerateTimeError(err)
    gap = float(_gap(problem, t, center))
    if isinstance(problem.family, RandomMeanVariance):
        y1 = ys[0]
        return gap / (y1 * (variance / y1**2))
    return gap / variance


def extremal_path(t: float, problem: CrossingProblem, y: float | Sequence[float]) -> Path:
    """Most likely path crossing at time t given y, induced by beta · delta_t."""
    ys = _conditioning(problem, y)
    beta = lagrange_beta(t, problem, ys)
    u = problem.grid.points
    if isinstance(problem.family, RandomMeanVariance):
        y1, y2 = ys
        values = y2 + y1 * beta * np.asarray(kernels.covariance(problem.family.base, u, t))
    else:
        family = problem.family
        kernel = OrnsteinUhlenbeck(a0=family.a0, a1=family.a1, x=family.x, y=ys[0])
        values = kernels.ou_mean(family.x, family.a0, family.a1, u) + beta * np.asarray(kernels.covariance(kernel, u, t))
    return Path(values=values, grid=problem.grid)


def _minimize_over_y(
    rate: RateFunction,
    t: float,
    brackets: Sequence[tuple[float, float]],
    search: RateSearch,
    fixed: tuple[float, ...] = (),
) -> tuple[float, tuple[float, ...]]:
    """
    Nested guarded search, one conditioning coordinate per level.

    The last coordinate is scanned on a vector of values; the one before it
    on a lattice, minimizing the last coordinate row by row.
    """
    if len(fixed) == len(brackets):
        return float(rate(t, *fixed)), fixed

    lo, hi = brackets[len(fixed)]
    remaining = len(brackets) - len(fixed)

    def obj(y: float) -> float:
        return _minimize_over_y(rate, t, brackets, search, (*fixed, y))[0]

    def vectorized(ys: np.ndarray) -> np.ndarray:
        return np.asarray(rate(t, *fixed, ys), dtype=float)

    def lattice(ys: np.ndarray) -> np.ndarray:
        inner_lo, inner_hi = brackets[-1]
        if inner_hi <= inner_lo:
            return np.asarray(rate(t, *fixed, ys, inner_lo), dtype=float)
        _, values = zoom_minimize(
            lambda zs: rate(t, *fixed, ys[:, None], zs),
            np.full(ys.size, inner_lo),
            np.full(ys.size, inner_hi),
            search.scan_points,
            search.xtol,
        )
        return values

    batch = None
    if remaining == 1:
        batch = vectorized
    elif remaining == 2 and search.scan_points >= MIN_ZOOM_POINTS:  # noqa: PLR2004
        batch = lattice
    y, _ = guarded_minimize(obj, lo, hi, search.scan_points, search.xtol, batch)
    return _minimize_over_y(rate, t, brackets, search, (*fixed, y))


def _scan_profile(rate: RateFunction, grid: TimeGrid, brackets: Sequence[tuple[float, float]], scan: int) -> FloatArray:
    """min over the y scan lattice of the pointwise rate, at every grid t."""
    axes = [np.linspace(lo, hi, scan) if hi > lo else np.array([lo]) for lo, hi in brackets]
    t = grid.points
    profile = np.empty(grid.size)
    for start in range(0, grid.size, SCAN_CHUNK):
        rows = t[start : start + SCAN_CHUNK]
        mesh = np.meshgrid(rows, *axes, indexing='ij', sparse=True)
        values = np.broadcast_to(rate(*mesh), (rows.size, *(a.size for a in axes)))
        profile[start : start + rows.size] = values.reshape(rows.size, -1).min(axis=1)
    return profile


def minimize_rate(problem: CrossingProblem, search: RateSearch | None = None) -> RateResult:
    """
    I_phi = inf_y inf_t {I_Y(y) + crossing term}.

    A coarse scan over grid times and the y lattice picks a starting cell;
    golden-section in t, nested with guarded golden-section over each
    conditioning coordinate, refines it.
    """
    search = search or RateSearch()
    rate = _rate_function(problem)
    brackets = [priors.bracket(p) for p in problem.family.priors]
    log.debug('minimize: brackets=%s M=%s', brackets, problem.grid.M)

    profile = _scan_profile(rate, problem.grid, brackets, search.scan_points)
    if not np.isfinite(profile).any():
        err = 'every probed (t, y) gives an infinite rate'
        raise NoFiniteRateError(err)

    t = problem.grid.points
    i = int(np.argmin(profile))
    best_t = float(t[i])
    best_v, best_y = _minimize_over_y(rate, best_t, brackets, search)
    lo, hi = float(t[max(i - 1, 0)]), float(t[min(i + 1, problem.grid.M)])

    for level in range(search.levels):
        s = golden_section(lambda s: _minimize_over_y(rate, s, brackets, search)[0], lo, hi, search.xtol)
        v, y = _minimize_over_y(rate, s, brackets, search)
        log.debug('minimize: level=%s t=%.12g rate=%.12g', level, s, v)
        if not v < best_v:
            break
        gain = best_v - v
        best_t, best_v, best_y = s, v, y
        if gain <= search.tol:
            break
        quarter = (hi - lo) / 4
        lo, hi = max(0.0, s - quarter), min(1.0, s + quarter)

    if not math.isfinite(best_v):
        err = 'no finite rate found by the refinement'
        raise NoFiniteRateError(err)

    value = float(rate(best_t, *best_y))
    log.info('minimize: rate=%.12g t*=%.12g y*=%s', value, best_t, best_y)
    return RateResult(rate=value, t_star=best_t, y_star=best_y, profile=tuple(float(p) for p in profile))


def _precision(gram: FloatArray) -> FloatArray:
    size = gram.shape[0]
    jitter = JITTER_SCALE * float(np.trace(gram)) / size
    factor = scipy.linalg.cho_factor(gram + jitter * np.eye(size), lower=True)
    return scipy.linalg.cho_solve(factor, np.eye(size))


def constrained_minimum(precision: FloatArray, index: int, target: float) -> float:
    """min ½ hᵀ P h subject to h[index] = target, by one linear solve on the free coordinates."""
    if target == 0:
        return 0.0
    size = precision.shape[0]
    free = np.arange(size) != index
    h = np.empty(size)
    h[index] = target
    h[free] = np.linalg.solve(precision[np.ix_(free, free)], -precision[free, index] * target)
    return 0.5 * float(h @ precision @ h)


def _unit_minima(gram: FloatArray) -> FloatArray:
    """Constrained minima for target 1 at every grid index; +inf where k(t,t) = 0."""
    precision = _precision(gram)
    diag = np.diag(gram)
    return np.array([constrained_minimum(precision, j, 1.0) if diag[j] > 0 else np.inf for j in range(diag.size)])


def _scaled(target: np.ndarray, unit: np.ndarray) -> np.ndarray:
    with np.errstate(invalid='ignore'):
        return np.where(target == 0, 0.0, target**2 * unit)


def brute_force_table(problem: CrossingProblem, t_grid: TimeGrid, y_values: Sequence[Iterable[float]]) -> FloatArray:
    """
    I_Y(y) + min over discretized paths w with w(t) = c + phi(t) of J(w | y),
    for every t of `t_grid` and every y in the product of `y_values`.

    The path minimization is the constrained discrete quadratic form itself,
    independent of the closed-form multiplier.
    """
    t = t_grid.points
    axes = [np.asarray(list(v), dtype=float) for v in y_values]
    if isinstance(problem.family, RandomMeanVariance):
        family = problem.family
        y1, y2 = axes
        unit = _unit_minima(kernels.gram_matrix(family.base, t_grid))
        target = (_gap(problem, t[:, None, None], y2[None, None, :])) / y1[None, :, None]
        prior = np.asarray(priors.rate_I_Y(family.y1, y1))[:, None] + np.asarray(priors.rate_I_Y(family.y2, y2))[None, :]
        return prior[None, :, :] + _scaled(target, unit[:, None, None])

    family = _ou(problem)
    (ys,) = axes
    target = np.asarray(_gap(problem, t, kernels.ou_mean(family.x, family.a0, family.a1, t)))
    table = np.empty((t.size, ys.size))
    for k, y in enumerate(ys):
        gram = kernels.gram_matrix(OrnsteinUhlenbeck(a1=family.a1, y=float(y)), t_grid)
        table[:, k] = float(priors.rate_I_Y(family.y, y)) + _scaled(target, _unit_minima(gram))
    return table


def brute_force_rate(problem: CrossingProblem, t_grid: TimeGrid | None = None, y_points: int = 16) -> float:
    """Global minimum of `brute_force_table` on coarse t and y lattices; a test oracle."""
    t_grid = t_grid or TimeGrid(M=min(32, problem.grid.M))
    y_values = []
    for prior in problem.family.priors:
        lo, hi = priors.bracket(prior)
        y_values.append(np.linspace(lo, hi, y_points) if hi > lo else np.array([lo]))
    return float(np.min(brute_force_table(problem, t_grid, y_values)))


def wilson_interval(hits: int, paths: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    z = float(norm.ppf(0.5 + confidence / 2))
    p = hits / paths
    denom = 1 + z**2 / paths
    center = (p + z**2 / (2 * paths)) / denom
    half = z * math.sqrt(p * (1 - p) / paths + z**2 / (4 * paths**2)) / denom
    return min(max(0.0, center - half), p), max(min(1.0, center + half), p)


def _simulate(problem: CrossingProblem, n: int, streams: simulate.Streams, size: int, scheme: Scheme) -> FloatArray:
    family = problem.family
    if isinstance(family, RandomMeanVariance):
        z, _, _ = simulate.sample_rmv_batch(n, family.priors, family.base, problem.grid, streams, size)
        return z
    z, _ = simulate.sample_ou_batch(n, family.y, family.a0, family.a1, family.x, problem.grid, streams, size, scheme)
    return z


def _count_hits(problem: CrossingProblem, n: int, master_seed: int, scheme: Scheme, batch: tuple[int, int]) -> int:
    index, size = batch
    streams = simulate.spawn_streams(master_seed, n, index)
    z = _simulate(problem, n, streams, size, scheme)
    excess = np.max(z - problem.barrier.values, axis=1)
    return int(np.count_nonzero(excess > problem.level))


def mc_crossing_probability(
    problem: CrossingProblem,
    n: int,
    paths: int,
    master_seed: int,
    batch_size: int = DEFAULT_BATCH,
    threads: int = 1,
    scheme: Scheme = 'exact',
) -> MCEstimate:
    """
    Crude Monte Carlo estimate of p_n on the grid, with a Wilson interval.

    Batch b draws from streams derived from (master_seed, n, b), so the
    estimate depends on the batch size but not on the thread count.
    """
    if paths < 1:
        err = f'paths={paths} must be >= 1'
        raise ValueError(err)
    batches = [(b, min(batch_size, paths - start)) for b, start in enumerate(range(0, paths, batch_size))]
    count = functools.partial(_count_hits, problem, n, master_seed, scheme)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        hits = sum(pool.map(count, batches))
    p_hat = hits / paths
    log.info('mc: n=%s hits=%s/%s p_hat=%.6g (%s batches)', n, hits, paths, p_hat, len(batches))
    return MCEstimate(
        n=n,
        p_hat=p_hat,
        hits=hits,
        paths=paths,
        ci95=wilson_interval(hits, paths),
        seed=master_seed,
    )


def ldp_slope_check(
    problem: CrossingProblem,
    n_ladder: Sequence[int],
    paths: int,
    master_seed: int,
    batch_size: int = DEFAULT_BATCH,
    threads: int = 1,
    scheme: Scheme = 'exact',
) -> SlopeReport:
    """Fit log p_n + ½ log n = -I n + const over the n ladder."""
    ladder = [int(n) for n in n_ladder]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        err = f'n ladder {ladder} must be non-empty and strictly increasing'
        raise InvalidConfigError(err)

    per_n = tuple(mc_crossing_probability(problem, n, paths, master_seed, batch_size, threads, scheme) for n in ladder)
    short = [e for e in per_n if e.hits < MIN_HITS]
    if short:
        worst = short[0]
        err = f'n={worst.n} has {worst.hits} hits out of {worst.paths} paths (need {MIN_HITS})'
        raise InsufficientHitsError(err)
    if len(ladder) < 2:  # noqa: PLR2004
        err = 'the slope fit needs at least two rungs'
        raise InvalidConfigError(err)

    n = np.asarray(ladder, dtype=float)
    y = np.log([e.p_hat for e in per_n]) + 0.5 * np.log(n)
    fit = linregress(n, y)
    log.info('slope: I_hat=%.6g r2=%.6g', -fit.slope, fit.rvalue**2)
    return SlopeReport(i_hat=float(-fit.slope), intercept=float(fit.intercept), r2=float(fit.rvalue**2), per_n=per_n)
