import json
import os

import numpy as np
import pandas as pd
import pytest

from conftest import step_dataset
from covreg import store
from covreg.cli import main
from covreg.dataset import Dataset, load_features, write_csv
from covreg.estimator import fit
from covreg.glossary import ExitCode, Tag
from covreg.rules import Rule, rule_stats
from covreg.selection import Covering, CoveringEntry

SMALL = ['--max-rules', '200', '--seed', '0']


@pytest.fixture
def data(tmp_path):
    path = str(tmp_path / 'step.csv')
    write_csv(step_dataset(), path)
    return path


@pytest.fixture
def model(tmp_path, data):
    path = str(tmp_path / 'model.json')
    assert main(['fit', '--data', data, '--target', 'y', '--model', path] + SMALL) == ExitCode.SUCCESS.value
    return path


def read(path):
    with open(path, 'rb') as file:
        return file.read()


def test_fit_writes_the_model_and_its_diagnostics(tmp_path, data, capsys):
    path = str(tmp_path / 'model.json')

    assert main(['fit', '--data', data, '--target', 'y', '--model', path] + SMALL) == 0
    assert os.path.isfile(path)
    assert 'nb_rules' in capsys.readouterr().out

    with open(str(tmp_path / 'model.diagnostics.json')) as file:
        diagnostics = json.load(file)

    assert diagnostics['metadata']['n'] == 400
    assert {row['class'] for row in diagnostics['rules']} <= {'S', 'I', 'discarded'}


def test_refit_gives_the_same_bytes(tmp_path, data, model):
    again = str(tmp_path / 'again.json')

    assert main(['fit', '--data', data, '--target', 'y', '--model', again] + SMALL) == 0
    assert read(again) == read(model)


def test_predict_matches_the_saved_model(tmp_path, data, model):
    out = str(tmp_path / 'predictions.csv')

    assert main(['predict', '--model', model, '--data', data, '--out', out]) == 0

    features, _ = load_features(data, drop=['y'])
    written = pd.read_csv(out, float_precision='round_trip')['prediction'].to_numpy()
    assert np.array_equal(written, store.load_model(model).predict(features))


def test_predict_to_stdout(data, model, capsys):
    assert main(['predict', '--model', model, '--data', data]) == 0
    lines = capsys.readouterr().out.splitlines()

    assert lines[0] == 'prediction'
    assert len(lines) == 401


def test_predict_rejects_permuted_columns(tmp_path, model):
    path = str(tmp_path / 'permuted.csv')
    step_dataset().frame()[['x1', 'x0', 'y']].to_csv(path, index=False)

    assert main(['predict', '--model', model, '--data', path]) == ExitCode.INPUT_ERROR.value


def test_predict_rejects_extra_columns(tmp_path, model, capsys):
    path = str(tmp_path / 'wide.csv')
    step_dataset().frame().assign(x2=0.5).to_csv(path, index=False)

    assert main(['predict', '--model', model, '--data', path]) == ExitCode.INPUT_ERROR.value
    assert 'expected 2' in capsys.readouterr().err.lower()


def test_predict_with_a_missing_model(tmp_path, data):
    assert main(['predict', '--model', str(tmp_path / 'absent.json'), '--data', data]) == 2


def test_fit_with_a_missing_target(tmp_path, data):
    assert main(['fit', '--data', data, '--target', 'z', '--model', str(tmp_path / 'm.json')]) == 2


def test_fit_with_an_invalid_alpha(tmp_path, data):
    assert main(['fit', '--data', data, '--target', 'y', '--model', str(tmp_path / 'm.json'), '--alpha', '0.7']) == 2


def test_fit_with_an_unsupported_config(tmp_path, data):
    config = tmp_path / 'study.txt'
    config.write_text('covering: {}')

    assert main(['fit', '--data', data, '--target', 'y', '--model', str(tmp_path / 'm.json'),
                 '--config', str(config)]) == 2


def test_config_file_is_applied(tmp_path, data):
    config = tmp_path / 'study.yaml'
    config.write_text('covering:\n  gamma: 0.8\n')
    path = str(tmp_path / 'model.json')

    assert main(['fit', '--data', data, '--target', 'y', '--model', path, '--config', str(config)] + SMALL) == 0
    assert store.load_model(path).metadata['gamma'] == 0.8


def test_explain(tmp_path, data, model, capsys):
    out = str(tmp_path / 'explain.json')

    assert main(['explain', '--model', model, '--data', data, '--out', out]) == 0
    assert 'R1' in capsys.readouterr().out

    with open(out) as file:
        assert len(json.load(file)['rules']) == len(store.load_model(model).covering)


def test_explain_without_data(model, capsys):
    assert main(['explain', '--model', model]) == 0
    assert 'conditions' in capsys.readouterr().out


@pytest.fixture
def smuggled(tmp_path, model):
    """The fitted model with an extra rule covering a single grid point"""

    ds = step_dataset()
    est = store.load_model(model)
    narrow = Rule({0: (0.0, 0.0), 1: (0.0, 0.0)})
    entries = list(est.covering) + [CoveringEntry(narrow, Tag.SIGNIFICANT, rule_stats(narrow, ds), len(est.covering),
                                                  est.covering.union_coverage)]
    path = str(tmp_path / 'smuggled.json')
    store.save_model(fit(Covering(entries, est.covering.union_coverage), ds, est.fallback, est.metadata), path)
    return path


def test_diagnose_a_fitted_model(tmp_path, data, model, capsys):
    out = str(tmp_path / 'checks.json')

    assert main(['diagnose', '--model', model, '--data', data, '--out', out]) == 0
    assert 'H1' in capsys.readouterr().out

    with open(out) as file:
        assert {check['name'] for check in json.load(file)} >= {'H1', 'H3', 'cardinality'}


def test_diagnose_flags_a_narrow_rule(data, smuggled):
    assert main(['diagnose', '--model', smuggled, '--data', data]) == ExitCode.SUITABILITY_FAILURE.value
    assert main(['diagnose', '--model', smuggled, '--data', data, '--soft-fail']) == 0


def test_bench_synthetic(tmp_path, capsys):
    out, csv = str(tmp_path / 'study.json'), str(tmp_path / 'runs.csv')

    assert main(['bench-synthetic', '--runs', '2', '--n', '200', '--d', '10', '--test-size', '200',
                 '--out', out, '--csv', csv] + SMALL) == 0
    assert 'mse' in capsys.readouterr().out

    with open(out) as file:
        summary = json.load(file)

    assert len(summary['runs']) == 2
    assert 'timing' not in summary['runs'][0]
    assert len(pd.read_csv(csv)) == 2


def test_bench_synthetic_is_reproducible(tmp_path):
    first, second = str(tmp_path / 'first.json'), str(tmp_path / 'second.json')

    for out in (first, second):
        assert main(['bench-synthetic', '--runs', '1', '--n', '200', '--d', '10', '--test-size', '200',
                     '--out', out] + SMALL) == 0

    assert read(first) == read(second)


def test_bench_real(tmp_path, data, capsys):
    out = str(tmp_path / 'real.json')

    assert main(['bench-real', '--data', data, '--target', 'y', '--runs', '2', '--generator', 'rf',
                 '--out', out] + SMALL) == 0
    assert 'step' in capsys.readouterr().out

    with open(out) as file:
        assert list(json.load(file)['step']) == ['rf']


def test_bench_real_needs_a_target_per_file(data):
    assert main(['bench-real', '--data', data, '--runs', '1'] + SMALL) == 2


def test_fit_with_zero_noise_variance_on_noiseless_data(tmp_path):
    x0 = np.tile(np.repeat(np.arange(10), 10), 4) / 10
    x1 = np.tile(np.arange(10), 40) / 10
    ds = Dataset(np.column_stack([x0, x1]), 10 * (x0 >= 0.5), ['x0', 'x1'], 'y')
    data, path, out = (str(tmp_path / name) for name in ('clean.csv', 'clean.json', 'rules.json'))
    write_csv(ds, data)

    assert main(['fit', '--data', data, '--target', 'y', '--model', path, '--sigma2', '0', '--out', out] + SMALL) == 0

    with open(out) as file:
        rows = [row for row in json.load(file)['rules'] if row['reason'] not in ('coverage', 'length')]

    pure = [row for row in rows if row['var'] == 0 and row['mean'] != 5.0]

    assert pure
    assert all(row['class'] == 'S' for row in pure)
    assert store.load_model(path).metadata['sigma2_hat'] == 0.0
