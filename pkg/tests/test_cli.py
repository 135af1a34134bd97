from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from ldcross import crossing
from ldcross.__about__ import __version__
from ldcross.cli import cli
from ldcross.selftest import BUILTIN

CONFIGS = Path(__file__).parent.parent / 'configs'

SMALL_VALIDATE = {
    **BUILTIN['brownian-degenerate'],
    'grid': 64,
    'montecarlo': {'n_ladder': [1, 2, 4], 'paths': 4000, 'master_seed': 3, 'batch_size': 1000},
}


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def _write(tmp_path: Path, data: dict, name: str = 'config.yml') -> Path:
    filepath = tmp_path / name
    filepath.write_text(yaml.safe_dump(data))
    return filepath


def _record(filepath: Path) -> dict[str, str]:
    pairs = (line.split(':', 1) for line in filepath.read_text().splitlines())
    return {k.strip(): v.strip() for k, v in pairs}


def test_version(runner: CliRunner) -> None:
    result = runner.invoke(cli, ['--version'])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_rate_brownian(runner: CliRunner, tmp_path: Path) -> None:
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['rate', str(CONFIGS / 'brownian-degenerate.yml'), '--out', str(out)])
    assert result.exit_code == 0, result.output

    record = _record(out / 'rate.txt')
    assert float(record['rate']) == pytest.approx(0.5, abs=1e-9)
    assert float(record['t_star']) == pytest.approx(1.0, abs=1e-6)
    assert record['grid'] == '256'
    assert record['version'] == __version__
    assert len(record['digest']) == 16

    profile = np.genfromtxt(out / 'profile.csv', delimiter=',', skip_header=1)
    assert profile.shape == (257, 2)
    assert math.isinf(profile[0, 1])

    path = np.genfromtxt(out / 'path.csv', delimiter=',', skip_header=1)
    assert path[-1, 1] == pytest.approx(1.0)


def test_rate_ou(runner: CliRunner, tmp_path: Path) -> None:
    result = runner.invoke(cli, ['rate', str(CONFIGS / 'ou-a1-1.yml'), '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert float(_record(tmp_path / 'rate.txt')['rate']) == pytest.approx(1 / math.expm1(2), abs=1e-8)


def test_rate_grid_override(runner: CliRunner, tmp_path: Path) -> None:
    args = ['rate', str(CONFIGS / 'brownian-degenerate.yml'), '--grid', '32', '--out', str(tmp_path)]
    assert runner.invoke(cli, args).exit_code == 0
    assert _record(tmp_path / 'rate.txt')['grid'] == '32'


def test_invalid_config_exit_code(runner: CliRunner, tmp_path: Path, caplog) -> None:
    data = {**BUILTIN['random-variance']}
    data['problem'] = {'family': {**data['problem']['family'], 'y1': {'kind': 'uniform', 'a': 0.0, 'b': 2.0}}}
    result = runner.invoke(cli, ['rate', str(_write(tmp_path, data)), '--out', str(tmp_path)])
    assert result.exit_code == 2
    assert 'family.y1' in caplog.text


@pytest.mark.parametrize(
    'problem',
    [
        {'barrier': {'kind': 'table', 'values': [0.0, math.nan, 0.0]}},
        {'barrier': {'kind': 'linear', 'slope': math.inf}},
        {'level': math.nan},
    ],
    ids=['table-nan', 'slope-inf', 'level-nan'],
)
def test_non_finite_values_exit_code(runner: CliRunner, tmp_path: Path, problem: dict) -> None:
    data = {**BUILTIN['brownian-degenerate']}
    data['problem'] = {**data['problem'], **problem}
    result = runner.invoke(cli, ['rate', str(_write(tmp_path, data)), '--out', str(tmp_path)])
    assert result.exit_code == 2
    assert not (tmp_path / 'rate.txt').exists()


def test_rate_has_no_threads_option(runner: CliRunner, tmp_path: Path) -> None:
    config = _write(tmp_path, BUILTIN['brownian-degenerate'])
    result = runner.invoke(cli, ['rate', str(config), '--threads', '2'])
    assert result.exit_code != 0
    assert 'No such option' in result.output


def test_missing_config_exit_code(runner: CliRunner, tmp_path: Path) -> None:
    assert runner.invoke(cli, ['rate', str(tmp_path / 'missing.yml')]).exit_code == 2


def test_no_finite_rate_exit_code(runner: CliRunner, tmp_path: Path, monkeypatch) -> None:
    def infinite(problem):
        return lambda t, *ys: np.full(np.broadcast(t, *ys).shape, np.inf)

    monkeypatch.setattr(crossing, '_rate_function', infinite)
    result = runner.invoke(cli, ['rate', str(CONFIGS / 'brownian-degenerate.yml'), '--out', str(tmp_path)])
    assert result.exit_code == 3


def test_validate_outputs(runner: CliRunner, tmp_path: Path) -> None:
    config = _write(tmp_path, SMALL_VALIDATE)
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['validate', str(config), '--out', str(out)])
    assert result.exit_code == 0, result.output

    mc = (out / 'mc.csv').read_text().splitlines()
    assert mc[0] == 'n,hits,paths,pHat,ciLo,ciHi'
    assert len(mc) == 4
    series = np.genfromtxt(out / 'series.csv', delimiter=',', skip_header=1)
    assert series[:, 0].tolist() == [1, 2, 4]
    assert np.all(np.diff(series[:, 1]) < 0)

    slope = _record(out / 'slope.txt')
    assert slope['master_seed'] == '3'
    assert float(slope['theory_rate']) == pytest.approx(0.5, abs=1e-9)
    assert 0.3 <= float(slope['i_hat']) <= 0.6


def test_validate_is_deterministic(runner: CliRunner, tmp_path: Path) -> None:
    config = _write(tmp_path, SMALL_VALIDATE)
    first, second, threaded = tmp_path / 'a', tmp_path / 'b', tmp_path / 'c'
    assert runner.invoke(cli, ['validate', str(config), '--out', str(first)]).exit_code == 0
    assert runner.invoke(cli, ['validate', str(config), '--out', str(second)]).exit_code == 0
    assert runner.invoke(cli, ['validate', str(config), '--out', str(threaded), '--threads', '8']).exit_code == 0
    for name in ('mc.csv', 'series.csv', 'slope.txt'):
        expected = (first / name).read_bytes()
        assert (second / name).read_bytes() == expected
        assert (threaded / name).read_bytes() == expected


def test_validate_seed_override(runner: CliRunner, tmp_path: Path) -> None:
    config = _write(tmp_path, SMALL_VALIDATE)
    result = runner.invoke(cli, ['validate', str(config), '--out', str(tmp_path), '--seed', '99'])
    assert result.exit_code == 0
    assert _record(tmp_path / 'slope.txt')['master_seed'] == '99'


def test_validate_insufficient_hits(runner: CliRunner, tmp_path: Path) -> None:
    data = {**SMALL_VALIDATE, 'montecarlo': {'n_ladder': [64], 'paths': 5000, 'master_seed': 1}}
    result = runner.invoke(cli, ['validate', str(_write(tmp_path, data)), '--out', str(tmp_path)])
    assert result.exit_code == 4


def test_validate_needs_montecarlo(runner: CliRunner, tmp_path: Path) -> None:
    result = runner.invoke(cli, ['validate', str(CONFIGS / 'brownian-degenerate.yml'), '--out', str(tmp_path)])
    assert result.exit_code == 2


def test_selftest(runner: CliRunner) -> None:
    result = runner.invoke(cli, ['selftest'])
    assert result.exit_code == 0, result.output
    assert 'FAIL' not in result.output
    assert 'checks passed' in result.output


@pytest.mark.slow
def test_validate_desk_scale(runner: CliRunner, tmp_path: Path) -> None:
    args = ['validate', str(CONFIGS / 'brownian-validate.yml'), '--out', str(tmp_path), '--threads', '8']
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert float(_record(tmp_path / 'slope.txt')['relative_gap']) <= 0.15
