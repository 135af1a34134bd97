# kernels.py

from __future__ import annotations

import functools
import logging
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg

from ldcross._exceptions import NonPSDError
from ldcross.constants import A1_EPS
from ldcross.constants import PSD_TOL
from ldcross.models.kernels import BrownianMotion
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.kernels import Scaled
from ldcross.models.paths import PositivePath

if TYPE_CHECKING:
    from ldcross.datatypes import ArrayLike
    from ldcross.datatypes import BaseKernel
    from ldcross.datatypes import FloatArray
    from ldcross.datatypes import KernelModel
    from ldcross.models.paths import TimeGrid

log = logging.getLogger(__name__)


def _scalar(out: np.ndarray) -> ArrayLike:
    return float(out) if np.ndim(out) == 0 else out


def _exp_integral(a1: float, lo: ArrayLike, hi: ArrayLike) -> ArrayLike:
    """∫_lo^hi e^{-2 a1 u} du, with the analytic limit hi - lo at a1 = 0."""
    if abs(a1) < A1_EPS:
        return np.subtract(hi, lo)
    return np.exp(-2 * a1 * np.asarray(lo)) * -np.expm1(-2 * a1 * np.subtract(hi, lo)) / (2 * a1)


def _ou_integral(a1: float, y: float | PositivePath, u: ArrayLike) -> ArrayLike:
    """∫_0^u e^{-2 a1 v} y(v)^2 dv, exact cell by cell for piecewise-constant y."""
    if isinstance(y, float):
        return y**2 * _exp_integral(a1, 0.0, u)
    if y.is_constant:
        return float(y.values[0]) ** 2 * _exp_integral(a1, 0.0, u)

    cells = y.cell_values
    m = cells.size
    knots = y.grid.points
    per_cell = cells**2 * _exp_integral(a1, knots[:-1], knots[1:])
    cumulative = np.concatenate([[0.0], np.cumsum(per_cell)])
    j = np.clip(np.floor(np.asarray(u) * m).astype(int), 0, m - 1)
    return cumulative[j] + cells[j] ** 2 * _exp_integral(a1, knots[j], u)


def _path_at(y: float | PositivePath, t: ArrayLike) -> ArrayLike:
    if isinstance(y, float):
        return y
    return y.at(t)


@functools.singledispatch
def covariance(model: KernelModel, s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Vectorized cov(s, t); broadcasts `s` against `t`."""
    err = f'no covariance for {type(model).__name__!r}'
    raise NotImplementedError(err)


@covariance.register(BrownianMotion)
def _(model: BrownianMotion, s: ArrayLike, t: ArrayLike) -> ArrayLike:  # noqa: ARG001
    return _scalar(np.minimum(s, t))


@covariance.register(OrnsteinUhlenbeck)
def _(model: OrnsteinUhlenbeck, s: ArrayLike, t: ArrayLike) -> ArrayLike:
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    y = model.constant_y
    integral = _ou_integral(model.a1, model.y if y is None else y, np.minimum(s, t))
    return _scalar(np.exp(model.a1 * (s + t)) * integral)


@covariance.register(Scaled)
def _(model: Scaled, s: ArrayLike, t: ArrayLike) -> ArrayLike:
    return _scalar(np.asarray(_path_at(model.y1, s) * _path_at(model.y1, t) * covariance(model.base, s, t)))


@functools.singledispatch
def mean(model: KernelModel, t: ArrayLike) -> ArrayLike:
    err = f'no mean for {type(model).__name__!r}'
    raise NotImplementedError(err)


@mean.register(BrownianMotion)
def _(model: BrownianMotion, t: ArrayLike) -> ArrayLike:  # noqa: ARG001
    return _scalar(np.zeros_like(np.asarray(t, dtype=float)))


@mean.register(OrnsteinUhlenbeck)
def _(model: OrnsteinUhlenbeck, t: ArrayLike) -> ArrayLike:
    return ou_mean(model.x, model.a0, model.a1, t)


@mean.register(Scaled)
def _(model: Scaled, t: ArrayLike) -> ArrayLike:
    return _scalar(np.asarray(_path_at(model.y1, t) * mean(model.base, t)))


def eval_base_kernel(model: KernelModel, s: float, t: float) -> float:
    return float(covariance(model, s, t))


def scaled_kernel(y1: float | PositivePath, base: BaseKernel, s: float, t: float) -> float:
    return float(_path_at(y1, s) * _path_at(y1, t) * eval_base_kernel(base, s, t))


def ou_mean(x: float, a0: float, a1: float, t: ArrayLike) -> ArrayLike:
    """m(t) = e^{a1 t} (x + a0/a1 (1 - e^{-a1 t})), solving m' = a0 + a1 m, m(0) = x."""
    t = np.asarray(t, dtype=float)
    if abs(a1) < A1_EPS:
        return _scalar(x + a0 * t)
    return _scalar(np.exp(a1 * t) * (x - a0 / a1 * np.expm1(-a1 * t)))


def ou_variance(a1: float, t: ArrayLike) -> ArrayLike:
    """k^{y≡1}(t, t) = (e^{2 a1 t} - 1) / (2 a1)."""
    t = np.asarray(t, dtype=float)
    if abs(a1) < A1_EPS:
        return _scalar(t.copy())
    return _scalar(np.expm1(2 * a1 * t) / (2 * a1))


def gram_matrix(model: KernelModel, grid: TimeGrid, check: bool = True) -> FloatArray:
    """K[i, j] = cov(t_i, t_j) on the grid; raises NonPSDError for an invalid kernel."""
    t = grid.points
    gram = np.asarray(covariance(model, t[:, None], t[None, :]), dtype=float)
    if check:
        check_psd(gram)
    log.debug('gram: %s on M=%s, trace=%.6g', model, grid.M, np.trace(gram))
    return gram


def check_psd(gram: FloatArray, tol: float = PSD_TOL) -> None:
    """min eigenvalue >= -tol * trace, tested by factorizing gram + tol * trace * Id."""
    trace = float(np.trace(gram))
    if not np.all(np.isfinite(gram)) or trace < 0:
        err = f'gram is not a covariance matrix (trace={trace})'
        raise NonPSDError(err)
    if trace == 0:
        if np.any(gram):
            err = 'gram has zero trace but nonzero entries'
            raise NonPSDError(err)
        return
    shifted = gram + tol * trace * np.eye(gram.shape[0])
    try:
        scipy.linalg.cholesky(shifted, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        err = f'gram has an eigenvalue below -{tol:g} * trace'
        raise NonPSDError(err) from e
