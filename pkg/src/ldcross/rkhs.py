# rkhs.py

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING
from typing import Iterable

import numpy as np
import scipy.linalg

from ldcross import kernels
from ldcross._exceptions import GridMismatchError
from ldcross.constants import DIVERGENCE_LIMIT
from ldcross.constants import INITIAL_VALUE_TOL
from ldcross.constants import JITTER_SCALE
from ldcross.constants import STABILITY_FLOOR
from ldcross.constants import STABILITY_RATIO
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.paths import Path
from ldcross.models.paths import PositivePath
from ldcross.models.paths import TimeGrid

if TYPE_CHECKING:
    from ldcross.datatypes import FloatArray
    from ldcross.datatypes import KernelModel
    from ldcross.datatypes import SpeedFunction

log = logging.getLogger(__name__)


class QuadFormSolver:
    """
    Discrete RKHS quadratic form h -> h^T (K + jitter Id)^{-1} h on a grid.

    The factorization is computed once; solves are read-only and safe to
    share between threads. One step of iterated Tikhonov refinement keeps
    the jitter bias second order for paths in the column space of K.
    """

    def __init__(
        self,
        gram: FloatArray,
        grid: TimeGrid,
        jitter: float | None = None,
        refinements: int = 1,
    ) -> None:
        gram = np.array(gram, dtype=float)
        if gram.shape != (grid.size, grid.size):
            err = f'gram of shape {gram.shape} does not match grid M={grid.M}'
            raise GridMismatchError(err)
        gram.setflags(write=False)
        self.gram = gram
        self.grid = grid
        self.trace = float(np.trace(gram))
        self.jitter = JITTER_SCALE * self.trace / grid.size if jitter is None else jitter
        self.refinements = refinements
        self._factor = None
        if self.trace > 0:
            self._factor = scipy.linalg.cho_factor(gram + self.jitter * np.eye(grid.size), lower=True)
        log.debug('solver: M=%s jitter=%.3g', grid.M, self.jitter)

    @classmethod
    def from_model(cls, model: KernelModel, grid: TimeGrid) -> QuadFormSolver:
        return cls(kernels.gram_matrix(model, grid), grid)

    @property
    def degenerate(self) -> bool:
        return self._factor is None

    def solve(self, h: FloatArray) -> FloatArray:
        if self._factor is None:
            err = 'cannot solve with a zero gram'
            raise ValueError(err)
        w = scipy.linalg.cho_solve(self._factor, h)
        for _ in range(self.refinements):
            w = w + scipy.linalg.cho_solve(self._factor, h - self.gram @ w)
        return w

    def quad(self, h: FloatArray) -> float:
        h = np.asarray(h, dtype=float)
        if self._factor is None:
            return 0.0 if not np.any(h) else math.inf
        return max(float(h @ self.solve(h)), 0.0)

    def coarse(self) -> QuadFormSolver:
        """Solver on every other grid point (M/2)."""
        return QuadFormSolver(self.gram[::2, ::2], self.grid.coarsen(), refinements=self.refinements)

    def check_grid(self, path: Path) -> None:
        if path.grid != self.grid:
            err = f'path on M={path.grid.M}, solver on M={self.grid.M}'
            raise GridMismatchError(err)


def _values(path: Path | FloatArray, solver: QuadFormSolver) -> FloatArray:
    if isinstance(path, Path):
        solver.check_grid(path)
        return np.asarray(path.values)
    values = np.asarray(path, dtype=float)
    if values.shape != (solver.grid.size,):
        err = f'values of shape {values.shape} do not match solver grid M={solver.grid.M}'
        raise GridMismatchError(err)
    return values


def rkhs_norm_sq(h: Path | FloatArray, solver: QuadFormSolver, refinement_check: bool = False) -> float:
    """
    Discretized ||h||_H^2, or +inf when the form diverges.

    Divergence is diagnosed, not decided: the value exceeds DIVERGENCE_LIMIT,
    or with `refinement_check` it grows by more than STABILITY_RATIO from the
    M/2 subgrid to M.
    """
    values = _values(h, solver)
    value = solver.quad(values)
    if value > DIVERGENCE_LIMIT:
        log.warning('rkhs: norm %.3g above divergence limit', value)
        return math.inf
    if refinement_check and solver.grid.M >= 4 and value > STABILITY_FLOOR:  # noqa: PLR2004
        coarse = solver.coarse().quad(values[::2])
        if value > STABILITY_RATIO * coarse:
            log.warning('rkhs: norm not stable under refinement (%.3g vs %.3g)', value, coarse)
            return math.inf
    return value


def cramer_transform(x: Path | FloatArray, solver: QuadFormSolver, refinement_check: bool = False) -> float:
    """Λ*(x) = ½ ||x||_H^2 for a centered Gaussian process."""
    return 0.5 * rkhs_norm_sq(x, solver, refinement_check=refinement_check)


def _as_values(y: float | Path, grid: TimeGrid) -> FloatArray:
    if isinstance(y, Path):
        if y.grid != grid:
            err = f'conditioning path on M={y.grid.M}, expected M={grid.M}'
            raise GridMismatchError(err)
        return np.asarray(y.values)
    return np.full(grid.size, float(y))


def j_rmv(z: Path, y1: float | PositivePath, y2: float | Path, base_solver: QuadFormSolver) -> float:
    """J(z | y1, y2) = ½ ||(z - y2) / y1||^2 in the base RKHS."""
    base_solver.check_grid(z)
    h = (z.values - _as_values(y2, z.grid)) / _as_values(y1, z.grid)
    return cramer_transform(h, base_solver)


def j_ou_fw(f: Path, y: float | PositivePath, a0: float, a1: float, x: float) -> float:
    """
    Wentzell–Freidlin action ½ ∫ ((f' - a0 - a1 f) / y)^2 dt.

    Forward differences for f', midpoint values for f and y on each cell;
    +inf when f(0) != x.
    """
    if isinstance(y, PositivePath) and y.grid != f.grid:
        err = f'diffusion path on M={y.grid.M}, path on M={f.grid.M}'
        raise GridMismatchError(err)
    values = np.asarray(f.values)
    if abs(values[0] - x) > INITIAL_VALUE_TOL:
        return math.inf
    grid = f.grid
    slope = np.diff(values) * grid.M
    mid = 0.5 * (values[:-1] + values[1:])
    y_cells = y.cell_values if isinstance(y, PositivePath) else np.full(grid.M, float(y))
    residual = (slope - (a0 + a1 * mid)) / y_cells
    return 0.5 * float(np.sum(residual**2)) * grid.dt


def j_ou_rkhs(
    f: Path,
    y: float | PositivePath,
    a0: float,
    a1: float,
    x: float,
    solver: QuadFormSolver,
) -> float:
    """½ ||f - m||^2 in the RKHS of k^y; `solver` must be built on the same (a1, y)."""
    solver.check_grid(f)
    t = solver.grid.points
    diag = np.asarray(kernels.covariance(OrnsteinUhlenbeck(a1=a1, y=y), t, t), dtype=float)
    if not np.allclose(np.diag(solver.gram), diag, rtol=1e-9, atol=1e-12):
        err = f'solver was not built on the OU kernel of a1={a1}, y={y}'
        raise ValueError(err)
    h = f.values - kernels.ou_mean(x, a0, a1, f.grid.points)
    return cramer_transform(h, solver)


def ou_solver(a1: float, y: float | PositivePath, grid: TimeGrid) -> QuadFormSolver:
    return QuadFormSolver.from_model(OrnsteinUhlenbeck(a1=a1, y=y), grid)


def hoelder_tightness_bound(
    model: KernelModel,
    gamma: SpeedFunction,
    alpha: float,
    grid: TimeGrid,
    n_probe: Iterable[int],
    scale: SpeedFunction | None = None,
) -> float:
    """
    max over probed n and grid pairs s != t of
    γ(n) |k^n(t,t) + k^n(s,s) - 2 k^n(s,t)| / |t - s|^{2α},
    for the family k^n = scale(n) · k (default scale 1/n).

    A finite value uniform in n is evidence, not proof, of exponential tightness.
    """
    if not 0 < alpha <= 1:
        err = f'Hölder exponent alpha={alpha} must lie in (0, 1]'
        raise ValueError(err)
    scale = scale or (lambda n: 1.0 / n)
    t = grid.points
    gram = np.asarray(kernels.covariance(model, t[:, None], t[None, :]), dtype=float)
    diag = np.diag(gram)
    increments = np.abs(diag[:, None] + diag[None, :] - 2 * gram)
    distance = np.abs(t[:, None] - t[None, :])
    off = ~np.eye(grid.size, dtype=bool)
    quotient = float(np.max(increments[off] / distance[off] ** (2 * alpha)))
    bound = max(gamma(n) * scale(n) * quotient for n in n_probe)
    log.debug('hoelder: model=%s alpha=%s bound=%.6g', model, alpha, bound)
    return bound


def reproducing_error(solver: QuadFormSolver) -> float:
    """
    max_j |<k_j, k_j>_H - k(t_j, t_j)| / k(t_j, t_j) over the nonzero grid columns.

    Checks the reproducing property <k(., t_j), k(., t_j)>_H = k(t_j, t_j).
    """
    diag = np.diag(solver.gram)
    columns = np.flatnonzero(diag > 0)
    if columns.size == 0:
        return 0.0
    gram = solver.gram[:, columns]
    quad = np.einsum('ij,ij->j', gram, solver.solve(gram))
    return float(np.max(np.abs(quad - diag[columns]) / diag[columns]))
