# cli.py

from __future__ import annotations

import csv
import functools
import logging
import math
from pathlib import Path as FilePath
from typing import TYPE_CHECKING
from typing import Any
from typing import Callable
from typing import Iterable
from typing import Sequence

import click

from ldcross import config
from ldcross import crossing
from ldcross import format
from ldcross import logger
from ldcross import selftest as suite
from ldcross.__about__ import __appname__
from ldcross.__about__ import __version__
from ldcross._exceptions import EXCEPTIONS
from ldcross._exceptions import DegenerateTimeError
from ldcross._exceptions import InvalidConfigError
from ldcross._exceptions import exit_code
from ldcross.constants import DEFAULT_OUTPUT
from ldcross.constants import DESC
from ldcross.constants import MC_FILE
from ldcross.constants import PATH_FILE
from ldcross.constants import PROFILE_FILE
from ldcross.constants import RATE_FILE
from ldcross.constants import SERIES_FILE
from ldcross.constants import SLOPE_FILE
from ldcross.helpers import timeit

if TYPE_CHECKING:
    from ldcross.models.results import RateResult
    from ldcross.models.results import SlopeReport

log = logging.getLogger(__name__)


def _provenance(cfg: config.ExperimentConfig) -> dict[str, Any]:
    mc = cfg.montecarlo
    return {
        'version': __version__,
        'digest': config.config_digest(cfg),
        'master_seed': mc.master_seed if mc else None,
        'grid': cfg.grid,
    }


def _write_text(filepath: FilePath, text: str) -> None:
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with filepath.open(mode='w', newline='') as f:
        f.write(text)
    log.debug('wrote %r', filepath.as_posix())


def _write_csv(filepath: FilePath, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with filepath.open(mode='w', newline='') as f:
        csv.writer(f, lineterminator='\n').writerows(format.table(header, rows))
    log.debug('wrote %r', filepath.as_posix())


@timeit
def run_rate(cfg: config.ExperimentConfig, out: FilePath) -> RateResult:
    """Minimize the crossing rate and write rate.txt, profile.csv and path.csv."""
    problem = config.to_problem(cfg)
    result = crossing.minimize_rate(problem, cfg.search.build())

    record = {
        **_provenance(cfg),
        'rate': result.rate,
        't_star': result.t_star,
        'y_star': result.y_star,
    }
    _write_text(out / RATE_FILE, format.record(record))
    _write_csv(out / PROFILE_FILE, ('t', 'rate'), zip(problem.grid.points.tolist(), result.profile))

    try:
        path = crossing.extremal_path(result.t_star, problem, result.y_star)
    except DegenerateTimeError as e:
        log.warning('no extremal path: %s', e)
    else:
        _write_csv(out / PATH_FILE, ('t', 'w'), zip(path.grid.points.tolist(), path.values.tolist()))
    return result


@timeit
def run_validate(cfg: config.ExperimentConfig, out: FilePath, threads: int = 1) -> SlopeReport:
    """Monte Carlo over the n ladder, slope fit, and comparison with the computed rate."""
    mc = cfg.montecarlo
    if mc is None:
        err = 'validate needs a montecarlo section in the config'
        raise InvalidConfigError(err)

    problem = config.to_problem(cfg)
    theory = crossing.minimize_rate(problem, cfg.search.build()).rate
    report = crossing.ldp_slope_check(
        problem,
        mc.n_ladder,
        mc.paths,
        mc.master_seed,
        batch_size=mc.batch_size,
        threads=threads,
        scheme=mc.scheme,
    )

    rows = [(e.n, e.hits, e.paths, e.p_hat, e.ci95[0], e.ci95[1]) for e in report.per_n]
    _write_csv(out / MC_FILE, ('n', 'hits', 'paths', 'pHat', 'ciLo', 'ciHi'), rows)
    _write_csv(out / SERIES_FILE, ('n', 'logPHat'), ((e.n, math.log(e.p_hat)) for e in report.per_n))

    record = {
        **_provenance(cfg),
        'i_hat': report.i_hat,
        'theory_rate': theory,
        'relative_gap': format.relative_gap(report.i_hat, theory),
        'intercept': report.intercept,
        'r2': report.r2,
        'paths': mc.paths,
        'scheme': mc.scheme,
    }
    _write_text(out / SLOPE_FILE, format.record(record))
    return report


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except EXCEPTIONS as err:
            log.error(err)
            raise SystemExit(exit_code(err)) from err
        except KeyboardInterrupt:
            log.info('terminated by user')
            raise SystemExit(1) from None

    return wrapper


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = (
        click.argument('configfile', type=click.Path(dir_okay=False, path_type=FilePath)),
        click.option('--seed', type=click.IntRange(0, 2**64 - 1), help='Override the master seed.'),
        click.option('--grid', type=int, help='Override the grid size M (power of two).'),
        click.option('--out', type=click.Path(file_okay=False, path_type=FilePath), help='Output directory.'),
    )
    for option in reversed(options):
        func = option(func)
    return func


def _prepare(
    configfile: FilePath,
    seed: int | None,
    grid: int | None,
    out: FilePath | None,
) -> tuple[config.ExperimentConfig, FilePath]:
    cfg = config.override(config.load_config(configfile), seed=seed, grid=grid)
    out = out or FilePath(cfg.output.directory or DEFAULT_OUTPUT)
    log.info('config %s digest=%s M=%s out=%r', configfile.name, config.config_digest(cfg), cfg.grid, out.as_posix())
    return cfg, out


@click.group(help=DESC)
@click.option('-v', '--verbose', count=True, help='Increase verbosity (-v, -vv, -vvv).')
@click.version_option(__version__, prog_name=__appname__)
def cli(verbose: int) -> None:
    logger.verbose(verbose)


@cli.command()
@run_options
@handle_errors
def rate(configfile: FilePath, seed: int | None, grid: int | None, out: FilePath | None) -> None:
    """Compute the crossing rate by nested minimization."""
    cfg, out = _prepare(configfile, seed, grid, out)
    result = run_rate(cfg, out)
    click.echo(format.record({'rate': result.rate, 't_star': result.t_star, 'y_star': result.y_star}), nl=False)


@cli.command()
@run_options
@click.option(
    '--threads',
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help='Worker threads for Monte Carlo batches.',
)
@handle_errors
def validate(configfile: FilePath, seed: int | None, grid: int | None, out: FilePath | None, threads: int) -> None:
    """Estimate p_n by Monte Carlo and fit the large-deviation slope."""
    cfg, out = _prepare(configfile, seed, grid, out)
    report = run_validate(cfg, out, threads=threads)
    click.echo(format.record({'i_hat': report.i_hat, 'r2': report.r2}), nl=False)


@cli.command()
@handle_errors
def selftest() -> None:
    """Run the invariant suite on built-in configs."""
    checks = suite.run()
    failed = [c for c in checks if not c.passed]
    for check in checks:
        click.echo(f'{"ok" if check.passed else "FAIL":<5}{check.name}: {check.detail}')
    click.echo(f'{len(checks) - len(failed)}/{len(checks)} checks passed')
    if failed:
        raise SystemExit(1)
