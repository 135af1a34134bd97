from __future__ import annotations

import copy
import logging
from pathlib import Path

import numpy as np
import pytest
import yaml

from ldcross import config
from ldcross import selftest
from ldcross._exceptions import InvalidConfigError
from ldcross.models.problem import RandomDiffusionOU
from ldcross.models.problem import RandomMeanVariance

CONFIGS = Path(__file__).parent.parent / 'configs'

BROWNIAN = selftest.BUILTIN['brownian-degenerate']


def _with(data: dict, **changes) -> dict:
    data = copy.deepcopy(data)
    for dotted, value in changes.items():
        *parents, key = dotted.split('__')
        node = data
        for p in parents:
            node = node.setdefault(p, {})
        node[key] = value
    return data


@pytest.mark.parametrize('filepath', sorted(CONFIGS.glob('*.yml')), ids=lambda p: p.stem)
def test_shipped_configs_build(filepath: Path) -> None:
    cfg = config.load_config(filepath)
    problem = config.to_problem(cfg)
    assert problem.grid.M == cfg.grid


@pytest.mark.parametrize('name', sorted(selftest.BUILTIN))
def test_builtin_configs_are_shipped(name: str) -> None:
    assert config.load_config(CONFIGS / f'{name}.yml') == selftest.builtin(name)


def test_to_problem_families() -> None:
    assert isinstance(config.to_problem(selftest.builtin('random-mean')).family, RandomMeanVariance)
    ou = config.to_problem(selftest.builtin('ou-a1-1')).family
    assert isinstance(ou, RandomDiffusionOU)
    assert ou.y.target == 'diffusion'


def test_round_trip_is_canonical() -> None:
    cfg = config.load_config(CONFIGS / 'ou-random-diffusion.yml')
    text = config.dump_config(cfg)
    again = config.parse_config(yaml.safe_load(text))
    assert again == cfg
    assert config.dump_config(again) == text


def test_digest() -> None:
    cfg = config.load_config(CONFIGS / 'brownian-validate.yml')
    digest = config.config_digest(cfg)
    assert len(digest) == 16
    assert int(digest, 16) >= 0
    assert digest == config.config_digest(config.load_config(CONFIGS / 'brownian-validate.yml'))
    assert config.config_digest(config.override(cfg, seed=1)) != digest
    assert config.config_digest(config.override(cfg, seed=cfg.montecarlo.master_seed)) == digest


def test_override_grid() -> None:
    cfg = config.override(selftest.builtin('brownian-degenerate'), grid=64)
    assert cfg.grid == 64
    assert config.to_problem(cfg).grid.M == 64


def test_seed_override_without_montecarlo(caplog) -> None:
    cfg = selftest.builtin('brownian-degenerate')
    with caplog.at_level(logging.WARNING):
        assert config.override(cfg, seed=5) == cfg
    assert 'no montecarlo section' in caplog.text


def test_uniform_at_zero_names_the_field() -> None:
    data = _with(BROWNIAN, problem__family__y1={'kind': 'uniform', 'a': 0.0, 'b': 1.0})
    with pytest.raises(InvalidConfigError, match=r'family\.y1.*a=0\.0'):
        config.parse_config(data)


def test_heavy_clamping_is_rejected() -> None:
    data = _with(BROWNIAN, problem__family__y1={'kind': 'gaussian', 'center': 0.5, 'variance': 1.0})
    with pytest.raises(InvalidConfigError, match=r'family\.y1.*below alpha'):
        config.parse_config(data)


@pytest.mark.parametrize(
    ('changes', 'match'),
    [
        ({'grid': 100}, 'power of two'),
        ({'problem__bogus': 1}, 'bogus'),
        ({'problem__family__kind': 'levy'}, 'kind'),
        ({'problem__family__y1': {'kind': 'uniform', 'a': 2.0, 'b': 1.0}}, 'empty support'),
        ({'problem__family__base': {'kind': 'ou', 'a1': 1.0, 'y': -1.0}}, 'family.base'),
        ({'montecarlo': {'n_ladder': [8, 4], 'paths': 10}}, 'strictly increasing'),
        ({'montecarlo': {'n_ladder': [4], 'paths': 0}}, 'paths'),
        ({'search': {'scan_points': 2}}, 'scan_points'),
        ({'problem__level': float('nan')}, r'problem\.level.*finite'),
        ({'problem__barrier': {'kind': 'table', 'values': [0.0, float('nan'), 0.0]}}, r'problem\.barrier'),
        ({'problem__barrier': {'kind': 'linear', 'slope': float('inf')}}, r'problem\.barrier'),
        ({'problem__barrier': {'kind': 'linear', 'slope': 1e308, 'intercept': 1e308}}, 'must be finite'),
    ],
)
def test_invalid_configs(changes: dict, match: str) -> None:
    with pytest.raises(InvalidConfigError, match=match):
        config.parse_config(_with(BROWNIAN, **changes))


def test_invalid_yaml(tmp_path: Path) -> None:
    filepath = tmp_path / 'broken.yml'
    filepath.write_text('problem: [unbalanced\n')
    with pytest.raises(InvalidConfigError, match='not valid YAML'):
        config.load_config(filepath)


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        config.load_config(tmp_path / 'nope.yml')


def test_table_barrier_is_interpolated() -> None:
    cfg = config.load_config(CONFIGS / 'table-barrier.yml')
    barrier = config.to_problem(cfg).barrier
    assert np.allclose(barrier.at(np.array([0.0, 0.25, 0.5, 0.75, 1.0])), [0.0, 0.3, 0.1, -0.2, 0.4])


def test_linear_barrier() -> None:
    data = _with(BROWNIAN, problem__barrier={'kind': 'linear', 'slope': 2.0, 'intercept': 0.5})
    barrier = config.to_problem(config.parse_config(data)).barrier
    assert barrier.at(1.0) == pytest.approx(2.5)
