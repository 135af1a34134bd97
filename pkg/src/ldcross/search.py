# search.py

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from ldcross.constants import ARG_TOL
from ldcross.constants import SCAN_AGREEMENT
from ldcross.constants import SCAN_POINTS

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQ = (3 - math.sqrt(5)) / 2

# a scan of 5 points narrows the bracket at least by half per pass
MIN_ZOOM_POINTS = 5
MAX_PASSES = 64


def golden_section(obj: Callable[[float], float], a: float, b: float, tol: float = ARG_TOL) -> float:
    """
    Minimizer of a unimodal `obj` on [a, b] to within `tol` in the argument.

    Infinite values are ordered like any other, so a +inf region pushes the
    bracket away from it.
    """
    dist = b - a
    if dist <= tol:
        return (a + b) / 2

    n = math.ceil(math.log(tol / dist) / math.log(INV_PHI))
    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = obj(c)
    yd = obj(d)

    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            dist = INV_PHI * dist
            c = a + INV_PHI_SQ * dist
            yc = obj(c)
        else:
            a, c, yc = c, d, yd
            dist = INV_PHI * dist
            d = a + INV_PHI * dist
            yd = obj(d)

    if yc < yd:
        return (a + d) / 2
    return (c + b) / 2


def guarded_minimize(
    obj: Callable[[float], float],
    a: float,
    b: float,
    scan_points: int = SCAN_POINTS,
    tol: float = ARG_TOL,
    vectorized: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[float, float]:
    """
    Scan `scan_points` equispaced points of [a, b], then golden-section
    refine between the neighbours of the best scan point.

    Returns (argmin, value). The scan argmin wins whenever it is lower than
    the golden-section result, which covers minima on the bracket ends and
    objectives that are not unimodal. With `vectorized` the refinement is a
    `zoom_minimize` of the same bracket and `obj` is not called.
    """
    if b <= a:
        return a, obj(a)
    if vectorized is not None and scan_points >= MIN_ZOOM_POINTS:
        x, v = zoom_minimize(lambda xs: np.asarray(vectorized(xs[0]), dtype=float), a, b, scan_points, tol)
        return float(x[0]), float(v[0])
    xs = np.linspace(a, b, scan_points)
    values = vectorized(xs) if vectorized is not None else np.array([obj(float(x)) for x in xs])
    i = int(np.argmin(values))
    best_x, best_v = float(xs[i]), float(values[i])
    lo, hi = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, scan_points - 1)])
    x = golden_section(obj, lo, hi, tol)
    v = obj(x)
    if abs(x - best_x) > SCAN_AGREEMENT and best_v <= v:
        log.debug('search: scan argmin %.9g kept over golden %.9g', best_x, x)
    if v < best_v:
        return x, v
    return best_x, best_v


def zoom_minimize(
    batch: Callable[[np.ndarray], np.ndarray],
    a: float | np.ndarray,
    b: float | np.ndarray,
    scan_points: int = SCAN_POINTS,
    tol: float = ARG_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Row-wise minimizer over the brackets [a_r, b_r] by repeated scans.

    Each pass evaluates `batch` once on an (rows, scan_points) lattice and
    narrows every row to the neighbours of its best point, until all
    brackets are below `tol`. Returns (argmin, value) arrays, one entry per row.
    """
    if scan_points < MIN_ZOOM_POINTS:
        err = f'zoom needs at least {MIN_ZOOM_POINTS} scan points, got {scan_points}'
        raise ValueError(err)
    lo = np.array(a, dtype=float, ndmin=1)
    hi = np.array(b, dtype=float, ndmin=1)
    rows = np.arange(lo.size)
    best_x = lo.copy()
    best_v = np.full(lo.size, np.inf)
    for _ in range(MAX_PASSES):
        xs = np.linspace(lo, hi, scan_points, axis=1)
        values = np.broadcast_to(np.asarray(batch(xs), dtype=float), xs.shape)
        i = np.argmin(values, axis=1)
        better = values[rows, i] < best_v
        best_x = np.where(better, xs[rows, i], best_x)
        best_v = np.where(better, values[rows, i], best_v)
        if np.all(hi - lo <= tol):
            break
        lo, hi = xs[rows, np.maximum(i - 1, 0)], xs[rows, np.minimum(i + 1, scan_points - 1)]
    return best_x, best_v
