import math
from dataclasses import replace

import numpy as np
import pytest

from concentric_fit import simulation
from concentric_fit.design_matrices import DataSet
from concentric_fit.error_analysis import TrueScene, leading_variance, theoretical_bias
from concentric_fit.exceptions import AllRunsFailed, DataError, NumericalFailure
from concentric_fit.estimators import Method, fit_all, registry
from concentric_fit.geometry import GeometricParams, residual
from concentric_fit.simulation import (
    NoiseModel,
    Scenario,
    ScenarioFamily,
    add_noise,
    experiment_presets,
    generate_true_points,
    monte_carlo,
)

UNIT_CIRCLE = GeometricParams(0.0, 0.0, ((1.0, 1.0),))


def test_full_turn_points():
    scenario = Scenario(UNIT_CIRCLE, 0.0, 2 * math.pi, (4,))
    points = generate_true_points(scenario).points
    assert np.allclose(points, [(1, 0), (0, 1), (-1, 0), (0, -1)], atol=1e-15)


def test_arc_endpoints():
    scenario = Scenario(UNIT_CIRCLE, 0.0, math.pi / 2, (2,))
    points = generate_true_points(scenario).points
    assert np.allclose(points, [(1, 0), (0, 1)], atol=1e-15)


def test_short_arc_points_lie_on_rings(exp2):
    data = generate_true_points(exp2)
    theta = exp2.true_theta()
    assert data.counts == (15, 20)
    for p, ring in zip(data.points, data.ring_index):
        assert abs(residual(theta, p, int(ring) + 1)) <= 1e-12


def test_zero_noise_is_identity(exp2_exact):
    assert add_noise(exp2_exact, NoiseModel(sigma=0.0)) is exp2_exact


def test_noise_is_reproducible(exp2_exact):
    noise = NoiseModel(sigma=0.1, seed=5)
    first = add_noise(exp2_exact, noise, run=3)
    second = add_noise(exp2_exact, noise, run=3)
    other = add_noise(exp2_exact, noise, run=4)
    assert np.array_equal(first.points, second.points)
    assert not np.array_equal(first.points, other.points)
    assert first.counts == exp2_exact.counts


def test_noise_variance():
    noisy = add_noise(DataSet((np.zeros((50000, 2)),)), NoiseModel(sigma=0.1, seed=17))
    variance = noisy.points.var(axis=0)
    assert np.allclose(variance, 0.01, rtol=0.02)
    assert np.allclose(noisy.points.mean(axis=0), 0.0, atol=0.003)


def test_noise_model_rejects_negative_sigma():
    with pytest.raises(DataError):
        NoiseModel(sigma=-0.1)


@pytest.mark.parametrize('kwargs', [
    {'arc_end': 0.0},
    {'counts': (15,)},
    {'counts': (15, 0)},
    {'runs': 0},
])
def test_scenario_validation(exp2, kwargs):
    with pytest.raises(DataError):
        replace(exp2, **kwargs)


def test_presets():
    presets = experiment_presets()
    exp1, exp2 = presets['exp1'], presets['exp2']
    assert (exp1.geometry.x_c, exp1.geometry.y_c) == (-3.0, 3.0)
    assert exp1.geometry.rings == ((5.0, 1.0), (10.0, 2.0))
    assert exp1.counts == (10, 15)
    assert exp1.omega == pytest.approx(5 * math.pi / 3)
    assert exp2.counts == (15, 20)
    assert exp2.omega == pytest.approx(math.pi / 2)
    assert exp2.noise.sigma == 0.3

    scenario2 = presets['scenario2']
    assert isinstance(scenario2, ScenarioFamily)
    for a1, scenario in scenario2.scenarios():
        (inner, _), (outer, _) = scenario.geometry.rings
        assert inner == pytest.approx(a1)
        assert outer == pytest.approx(2 * a1)

    for name in ('scenario1', 'scenario3_high', 'scenario3_low'):
        family = presets[name]
        assert family.sweep == 'omega'
        for omega, scenario in family.scenarios():
            assert scenario.omega == pytest.approx(omega)


def _small(scenario: Scenario, sigma: float, runs: int) -> Scenario:
    return replace(scenario.with_sigma(sigma), runs=runs)


def test_monte_carlo_is_reproducible(exp2):
    scenario = _small(exp2, 0.05, 20)
    first = monte_carlo(scenario)
    second = monte_carlo(scenario)
    threaded = monte_carlo(scenario, workers=4)
    for method in Method:
        a, b, c = (r.metrics[method] for r in (first, second, threaded))
        assert np.array_equal([a.nmse, a.nb], [b.nmse, b.nb], equal_nan=True)
        assert np.allclose([a.nmse, a.nb], [c.nmse, c.nb], rtol=1e-12, equal_nan=True)
        assert a.convergence_rate == c.convergence_rate


def test_monte_carlo_matches_direct_aggregation(exp2, monkeypatch):
    monkeypatch.setattr(simulation, 'RUN_BATCH', 2)
    scenario = _small(exp2, 0.05, 11)
    truth = scenario.true_theta().theta
    exact = generate_true_points(scenario)
    errors = []
    for run in range(11):
        result = fit_all(add_noise(exact, scenario.noise, run), ['hyper'])[Method.HYPER]
        if result.ok and result.valid:
            theta = result.theta.theta
            errors.append((theta if theta @ truth >= 0 else -theta) - truth)
    errors = np.array(errors)

    hyper = monte_carlo(scenario, ['hyper'], workers=3).metrics[Method.HYPER]
    assert hyper.runs_used == len(errors)
    assert hyper.convergence_rate == pytest.approx(100.0 * len(errors) / 11)
    assert np.allclose(hyper.mean_error, errors.mean(axis=0), rtol=1e-10, atol=1e-15)
    assert hyper.nmse == pytest.approx(np.sum(errors ** 2) / (0.05 ** 2 * len(errors)), rel=1e-10)


def test_monte_carlo_report_fields(exp2):
    report = monte_carlo(_small(exp2, 0.05, 10), ['oleary', 'hyper'])
    assert list(report.metrics) == [Method.OLEARY, Method.HYPER]
    assert report.normalized
    oleary = report.get('oleary')
    assert oleary.runs_attempted == 10
    assert 0 <= oleary.convergence_rate <= 100
    assert oleary.nmse >= 0 and oleary.nb >= 0 and oleary.art >= 0
    records = report.to_records()
    assert records[0]['method'] == 'oleary'
    assert records[0]['sigma'] == 0.05


def test_noiseless_monte_carlo_reports_raw_errors(exp2):
    report = monte_carlo(_small(exp2, 0.0, 2))
    assert not report.normalized
    for method in Method:
        metrics = report.get(method)
        assert metrics.convergence_rate == 100.0
        assert metrics.nmse < 1e-16
        assert metrics.nb < 1e-8


def test_method_without_valid_runs(exp2, monkeypatch):
    def broken(self, design):
        raise NumericalFailure('no admissible eigenpair')

    monkeypatch.setattr(type(registry.get(Method.TAUBIN)), '_solve', broken)
    report = monte_carlo(_small(exp2, 0.05, 3))
    taubin = report.metrics[Method.TAUBIN]
    assert taubin.convergence_rate == 0.0
    assert taubin.runs_used == 0
    assert math.isnan(taubin.nmse)
    with pytest.raises(AllRunsFailed):
        report.get(Method.TAUBIN)
    assert report.metrics[Method.LS].runs_attempted == 3


@pytest.mark.slow
def test_oleary_always_returns_ellipses(exp2):
    report = monte_carlo(_small(exp2, 0.3, 500), ['oleary'])
    assert report.get('oleary').convergence_rate == 100.0


@pytest.mark.slow
def test_small_noise_nmse_matches_variance(exp1):
    scenario = _small(exp1, 0.005, 2000)
    expected = float(np.trace(leading_variance(TrueScene.from_scenario(scenario))))
    report = monte_carlo(scenario, workers=4)
    for method in Method:
        assert report.get(method).nmse == pytest.approx(expected, rel=0.1)


@pytest.mark.slow
def test_short_arc_convergence_rates(exp2):
    rates = {}
    for sigma in (0.2, 0.3):
        report = monte_carlo(_small(exp2, sigma, 2000), workers=4)
        rates[sigma] = {method: report.metrics[method].convergence_rate for method in Method}
        assert rates[sigma][Method.OLEARY] == 100.0
    assert rates[0.3][Method.LS] <= 10.0
    for method in (Method.TAUBIN, Method.SEMI_HYPER, Method.HYPER):
        assert 82.0 <= rates[0.2][method] <= 96.0
        assert 65.0 <= rates[0.3][method] <= 85.0


@pytest.mark.slow
def test_long_arc_bias_ordering(exp1):
    report = monte_carlo(_small(exp1, 0.1, 10000), workers=4)
    nb = {method: report.get(method).nb for method in Method}
    assert nb[Method.LS] > nb[Method.OLEARY]
    assert nb[Method.LS] > nb[Method.TAUBIN] > nb[Method.SEMI_HYPER] > nb[Method.HYPER]
    assert nb[Method.HYPER] <= 0.5 * nb[Method.TAUBIN]


@pytest.mark.slow
def test_mean_error_matches_theoretical_bias(exp1):
    # each noise draw is paired with its negation so first-order errors cancel
    sigma = 0.01
    scene = TrueScene.from_scenario(exp1)
    truth = scene.theta
    exact = generate_true_points(exp1)
    noise = NoiseModel(sigma=sigma, seed=2024)
    totals = {method: np.zeros_like(truth) for method in Method}
    pairs = 5000
    for run in range(pairs):
        shift = add_noise(exact, noise, run).points - exact.points
        for points in (exact.points + shift, exact.points - shift):
            for method, result in fit_all(exact.with_points(points)).items():
                theta = result.theta.theta
                totals[method] += (theta if theta @ truth >= 0 else -theta) - truth
    mean = {method: total / (2 * pairs * sigma ** 2) for method, total in totals.items()}

    for method in (Method.LS, Method.OLEARY, Method.TAUBIN):
        expected = theoretical_bias(scene, method).total()
        assert np.linalg.norm(mean[method] - expected) <= 0.2 * np.linalg.norm(expected)
    assert np.linalg.norm(mean[Method.HYPER]) <= 0.2 * np.linalg.norm(mean[Method.LS])
