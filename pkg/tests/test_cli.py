import json

import numpy as np
import pandas as pd
import pytest

from concentric_fit.cli import RunConfig, build_argparser, load_config, main
from concentric_fit.estimators import fit_all
from tests.conftest import TEST_DATA, circle_points

CIRCLES = str(TEST_DATA / 'exact_circles.csv')


def _points_file(tmp_path, rings) -> str:
    path = tmp_path / 'points.csv'
    rows = ['x,y,ring'] + [f'{x},{y},{label}' for label, pts in rings for x, y in pts]
    path.write_text('\n'.join(rows) + '\n')
    return str(path)


def test_fit_json(capsys):
    assert main(['fit', CIRCLES, '--f0', '1']) == 0
    document = json.loads(capsys.readouterr().out)
    assert list(document) == ['ls', 'oleary', 'taubin', 'semi_hyper', 'hyper']
    for record in document.values():
        assert record['valid'] is True
        assert len(record['theta']) == 7
        geometry = record['geometry']
        assert np.allclose(geometry['center'], [0.0, 0.0], atol=1e-8)
        axes = [(r['a'], r['b']) for r in geometry['rings']]
        assert np.allclose(axes, [(1.0, 1.0), (2.0, 2.0)], atol=1e-8)


def test_fit_table_with_method_subset(capsys):
    assert main(['fit', CIRCLES, '--methods', 'taubin,hyper', '--format', 'table']) == 0
    out = capsys.readouterr().out
    assert out.startswith('taubin')
    assert 'hyper' in out and 'center=' in out
    assert 'oleary' not in out


def test_fit_to_file(tmp_path):
    target = tmp_path / 'fit.json'
    assert main(['fit', CIRCLES, '-o', str(target)]) == 0
    assert json.loads(target.read_text())['hyper']['valid'] is True


def test_fit_too_few_points(tmp_path):
    path = _points_file(tmp_path, [(1, circle_points(1.0, 5))])
    assert main(['fit', path]) == 2


def test_fit_ring_gap(tmp_path):
    path = _points_file(tmp_path, [(1, circle_points(1.0, 6)), (3, circle_points(2.0, 6))])
    assert main(['fit', path]) == 2


def test_fit_unreadable_input(tmp_path):
    assert main(['fit', str(tmp_path)]) == 2


def test_fit_unwritable_output(tmp_path):
    assert main(['fit', CIRCLES, '-o', str(tmp_path)]) == 2


def test_fit_unknown_method():
    assert main(['fit', CIRCLES, '--methods', 'ransac']) == 2


def test_unknown_config_key(tmp_path):
    config = tmp_path / 'run.json'
    config.write_text(json.dumps({'bogus': 1}))
    assert main(['fit', CIRCLES, '--config', str(config)]) == 2


def test_flags_override_config(tmp_path):
    config = tmp_path / 'run.json'
    config.write_text(json.dumps({'runs': 7, 'seed': 3, 'sigma': [0.1]}))
    args = build_argparser().parse_args(['simulate', '--config', str(config), '--runs', '2'])
    merged = load_config(args)
    assert merged.runs == 2
    assert merged.seed == 3
    assert merged.sigma == [0.1]
    assert merged.preset == 'exp1'


def test_run_config_rejects_negative_sigma():
    with pytest.raises(ValueError):
        RunConfig(sigma=[-1.0])


def test_simulate_noiseless(tmp_path):
    target = tmp_path / 'sim.csv'
    assert main(['simulate', '--preset', 'exp2', '--sigma', '0', '--runs', '1', '-o', str(target)]) == 0
    frame = pd.read_csv(target)
    assert list(frame['method']) == ['ls', 'oleary', 'taubin', 'semi_hyper', 'hyper']
    assert not frame['normalized'].any()
    assert (frame['convergence_rate_pct'] == 100.0).all()
    assert (frame['nmse'] < 1e-16).all()
    assert (frame['leading_variance_trace'] > 0).all()


def test_simulate_sigma_grid(tmp_path):
    target = tmp_path / 'sim.csv'
    argv = ['simulate', '--preset', 'exp2', '--sigma', '0.01', '--sigma', '0.02',
            '--runs', '3', '--methods', 'oleary', '-o', str(target)]
    assert main(argv) == 0
    frame = pd.read_csv(target)
    assert list(frame['sigma']) == [0.01, 0.02]
    assert (frame['runs'] == 3).all()
    assert 'art_seconds' in frame.columns


def test_simulate_is_byte_identical(tmp_path):
    outputs = []
    for name in ('first.csv', 'second.csv'):
        target = tmp_path / name
        argv = ['simulate', '--preset', 'exp2', '--sigma', '0.05', '--runs', '3',
                '--seed', '42', '--omit-timing', '-o', str(target)]
        assert main(argv) == 0
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]
    assert b'art_seconds' not in outputs[0]


def test_simulate_unknown_preset():
    assert main(['simulate', '--preset', 'exp9', '--runs', '1']) == 2


def test_bias_scan_csv(tmp_path):
    target = tmp_path / 'scan.csv'
    assert main(['bias-scan', '--family', 'scenario2', '--methods', 'ls,hyper', '-o', str(target)]) == 0
    frame = pd.read_csv(target)
    assert list(frame.columns) == ['a1', 'ls', 'hyper']
    assert len(frame) == 12
    assert (frame['hyper'] == 0).all()
    assert (frame['ls'] > 0).all()


def test_bias_scan_unknown_family():
    assert main(['bias-scan', '--family', 'scenario9']) == 2


def test_fit_matches_library(tmp_path, capsys, exp2_noisy):
    frame = pd.DataFrame(exp2_noisy.points, columns=['x', 'y'])
    frame['ring'] = exp2_noisy.ring_index + 1
    path = tmp_path / 'noisy.csv'
    frame.to_csv(path, index=False, float_format='%.17g')

    assert main(['fit', str(path), '--f0', str(exp2_noisy.f0)]) == 0
    document = json.loads(capsys.readouterr().out)
    for method, result in fit_all(exp2_noisy).items():
        if result.theta is None:
            continue
        assert np.allclose(document[method.value]['theta'], result.theta.theta, rtol=1e-12, atol=1e-15)
