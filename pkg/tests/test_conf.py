import json

import pytest

from covreg import conf
from covreg.exceptions import InvalidConfigError, UnsupportedFileTypeError


def test_defaults_match_the_reference_parameters():
    assert conf.resolve('generator.method') == 'rf'
    assert conf.resolve('generator.tree_size') == 8
    assert conf.resolve('generator.max_rules') == 4000
    assert conf.resolve('covering.alpha') == 0.49
    assert conf.resolve('covering.gamma') == 0.9
    assert conf.resolve('covering.l_max') == 3
    assert conf.resolve('estimator.fallback') == 'zero'


def test_defaults_returns_a_private_copy():
    tree = conf.defaults()
    tree['covering']['alpha'] = 0.1
    assert conf.resolve('covering.alpha') == 0.49


def test_merge_overrides_nested_values_and_ignores_none():
    base = {'covering': {'alpha': 0.49, 'gamma': 0.9}, 'generator': {'seed': 0}}
    merged = conf.merge(base, {'covering': {'gamma': 0.8, 'alpha': None}, 'generator': None})

    assert merged == {'covering': {'alpha': 0.49, 'gamma': 0.8}, 'generator': {'seed': 0}}
    assert base['covering']['gamma'] == 0.9


def test_load_yaml_and_json(tmp_path):
    (tmp_path / 'study.yaml').write_text('covering:\n  gamma: 0.8\n')
    (tmp_path / 'study.json').write_text(json.dumps({'covering': {'l_max': 2}}))

    assert conf.load(str(tmp_path / 'study.yaml')) == {'covering': {'gamma': 0.8}}
    assert conf.resolve('covering.l_max', conf.load(str(tmp_path / 'study.json'))) == 2


def test_load_rejects_unknown_extensions(tmp_path):
    path = tmp_path / 'study.txt'
    path.write_text('covering: {}')

    with pytest.raises(UnsupportedFileTypeError):
        conf.load(str(path))


def test_load_reports_malformed_yaml(tmp_path):
    path = tmp_path / 'broken.yaml'
    path.write_text('covering: [1, 2\n')

    with pytest.raises(InvalidConfigError):
        conf.load(str(path))


def test_threads_default_and_override(monkeypatch):
    monkeypatch.delenv(conf.THREADS_VARIABLE, raising=False)
    assert conf.threads() == 1

    monkeypatch.setenv(conf.THREADS_VARIABLE, '3')
    assert conf.threads() == 3


@pytest.mark.parametrize('value', ['0', '-2', 'many'])
def test_threads_rejects_invalid_values(monkeypatch, value):
    monkeypatch.setenv(conf.THREADS_VARIABLE, value)

    with pytest.raises(InvalidConfigError):
        conf.threads()
