"""
Monte Carlo Simulation
Synthetic concentric scenes, Gaussian noise injection and the benchmark
harness reporting NMSE, normalized bias, average run time and convergence
rate per method.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union
import logging
import math

import numpy as np

from config import settings
from concentric_fit.design_matrices import DataSet
from concentric_fit.estimators import FitResult, Method, fit_all, resolve_methods
from concentric_fit.exceptions import AllRunsFailed, DataError
from concentric_fit.geometry import (
    ConcentricTheta,
    GeometricParams,
    assemble_concentric_theta,
    ring_points,
)

logger = logging.getLogger(__name__)

FULL_TURN = 2 * math.pi


@dataclass(frozen=True)
class NoiseModel:
    """Isotropic Gaussian noise of standard deviation sigma per coordinate"""
    sigma: float = 0.0
    seed: int = settings.SEED

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DataError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class Scenario:
    """
    A true concentric scene sampled on one arc of every ring

    Args:
        geometry: true rings
        arc_start, arc_end: eccentric-anomaly range of the sampled arc
        counts: points per ring
        f0: carrier scale used when fitting
        noise: noise level and base seed
        runs: Monte Carlo repetitions
    """
    geometry: GeometricParams
    arc_start: float
    arc_end: float
    counts: Tuple[int, ...]
    f0: float = settings.SYNTHETIC_F0
    noise: NoiseModel = field(default_factory=NoiseModel)
    runs: int = settings.RUNS

    def __post_init__(self):
        object.__setattr__(self, 'counts', tuple(int(c) for c in self.counts))
        if not self.arc_end > self.arc_start:
            raise DataError(f"arc_end {self.arc_end} must exceed arc_start {self.arc_start}")
        if len(self.counts) != self.geometry.K:
            raise DataError(f"{len(self.counts)} counts given for {self.geometry.K} rings")
        if any(c < 1 for c in self.counts):
            raise DataError(f"every ring needs at least one point, got {self.counts}")
        if self.runs < 1:
            raise DataError(f"runs must be at least 1, got {self.runs}")

    @property
    def omega(self) -> float:
        return self.arc_end - self.arc_start

    def with_sigma(self, sigma: float) -> 'Scenario':
        return replace(self, noise=replace(self.noise, sigma=sigma))

    def true_theta(self) -> ConcentricTheta:
        return assemble_concentric_theta(self.geometry, self.f0)

    def to_dict(self) -> Dict:
        return {
            'geometry': self.geometry.to_dict(),
            'arc': [self.arc_start, self.arc_end],
            'counts': list(self.counts),
            'f0': self.f0,
            'sigma': self.noise.sigma,
            'seed': self.noise.seed,
            'runs': self.runs,
        }


@dataclass(frozen=True)
class ScenarioFamily:
    """A one-parameter sweep of scenarios, used by the bias scan"""
    name: str
    sweep: str
    values: Tuple[float, ...]
    build: Callable[[float], Scenario]
    description: str = ''

    def scenarios(self) -> Iterator[Tuple[float, Scenario]]:
        for value in self.values:
            yield value, self.build(value)


@dataclass
class MethodMetrics:
    """Monte Carlo statistics of one method"""
    method: Method
    nmse: float
    nb: float
    art: float
    convergence_rate: float
    runs_used: int
    runs_attempted: int
    mean_error: Optional[np.ndarray] = None
    error: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            'method': self.method.value,
            'nmse': self.nmse,
            'nb': self.nb,
            'art_seconds': self.art,
            'convergence_rate_pct': self.convergence_rate,
            'runs_used': self.runs_used,
            'error': self.error,
        }


@dataclass
class MetricsReport:
    """
    Monte Carlo results for one noise level

    When sigma is zero the errors are not divided by sigma^2 and
    normalized is False.
    """
    sigma: float
    runs: int
    normalized: bool
    metrics: Dict[Method, MethodMetrics]

    def get(self, method: Union[Method, str]) -> MethodMetrics:
        """
        Raises:
            AllRunsFailed: the method produced no valid fit
        """
        m = self.metrics[Method(method)]
        if m.error is not None:
            raise AllRunsFailed(m.error)
        return m

    def to_records(self) -> List[Dict]:
        return [
            {'sigma': self.sigma, 'runs': self.runs, 'normalized': self.normalized, **m.to_dict()}
            for m in self.metrics.values()
        ]


def generate_true_points(scenario: Scenario) -> DataSet:
    """
    Points equally spaced in the eccentric anomaly over the scenario arc

    A full turn is sampled without repeating the start point.
    """
    full = scenario.omega >= FULL_TURN - 1e-12
    rings = []
    for i, n in enumerate(scenario.counts, 1):
        t = np.linspace(scenario.arc_start, scenario.arc_end, n, endpoint=not full)
        rings.append(ring_points(scenario.geometry.ring(i), t))
    return DataSet(tuple(rings), scenario.f0)


def add_noise(data: DataSet, noise: NoiseModel, run: int = 0) -> DataSet:
    """
    Perturb every coordinate with N(0, sigma^2)

    The generator is seeded with noise.seed + run, so a given run is
    reproducible independently of the others.
    """
    if noise.sigma == 0:
        return data
    rng = np.random.default_rng(noise.seed + run)
    return data.with_points(data.points + rng.normal(0.0, noise.sigma, data.points.shape))


# runs handed to the thread pool per worker before results are folded in
RUN_BATCH = 64


@dataclass
class _Tally:
    """Running sums of one method's sign-aligned errors"""
    error_sum: np.ndarray
    squared_sum: float = 0.0
    valid: int = 0
    elapsed_sum: float = 0.0

    def add(self, result: FitResult, theta_true: np.ndarray) -> None:
        self.elapsed_sum += result.elapsed
        if not (result.ok and result.valid):
            return
        estimate = result.theta.theta
        if estimate @ theta_true < 0:
            estimate = -estimate
        error = estimate - theta_true
        self.error_sum += error
        self.squared_sum += float(error @ error)
        self.valid += 1

    def metrics(self, method: Method, runs: int, scale: float) -> MethodMetrics:
        art = self.elapsed_sum / runs
        rate = 100.0 * self.valid / runs
        if not self.valid:
            message = f"{method.value}: no valid fit in {runs} runs"
            logger.warning(message)
            return MethodMetrics(method, float('nan'), float('nan'), art, rate, 0, runs, None, message)
        mean_error = self.error_sum / self.valid
        nmse = self.squared_sum / (scale * self.valid)
        nb = float(np.linalg.norm(mean_error) / scale)
        logger.debug(f"{method.value}: nmse={nmse:.4g} nb={nb:.4g} rate={rate:.1f}%")
        return MethodMetrics(method, nmse, nb, art, rate, self.valid, runs, mean_error)


def _run_once(true_data: DataSet, noise: NoiseModel, run: int,
              methods: List[Method]) -> Dict[Method, FitResult]:
    return fit_all(add_noise(true_data, noise, run), methods)


def _iter_runs(true_data: DataSet, noise: NoiseModel, runs: int, methods: List[Method],
               workers: int) -> Iterator[Dict[Method, FitResult]]:
    """Per-run results in run order; at most one batch is alive at a time"""
    if workers <= 1:
        for b in range(runs):
            yield _run_once(true_data, noise, b, methods)
        return
    batch = workers * RUN_BATCH
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for start in range(0, runs, batch):
            run_ids = range(start, min(start + batch, runs))
            yield from pool.map(lambda b: _run_once(true_data, noise, b, methods), run_ids)


def monte_carlo(scenario: Scenario,
                methods: Optional[Iterable[Union[Method, str]]] = None,
                workers: Optional[int] = None) -> MetricsReport:
    """
    Repeated noisy fits of a scenario

    Per-run results are folded into running sums as they arrive, so memory
    does not grow with the run count.

    Args:
        scenario: true scene, noise model and run count
        methods: methods to benchmark, all registered ones by default
        workers: thread count; results do not depend on it

    Returns:
        MetricsReport; a method without any valid run carries an error
        message and NaN statistics instead of aborting the report
    """
    methods = resolve_methods(methods)
    workers = workers or settings.WORKERS
    theta_true = scenario.true_theta().theta
    true_data = generate_true_points(scenario)
    noise = scenario.noise
    runs = scenario.runs

    logger.info(
        f"Monte Carlo: sigma={noise.sigma:g}, runs={runs}, methods={[m.value for m in methods]}"
    )

    tallies = {method: _Tally(np.zeros_like(theta_true)) for method in methods}
    for outcome in _iter_runs(true_data, noise, runs, methods, workers):
        for method in methods:
            tallies[method].add(outcome[method], theta_true)

    normalized = noise.sigma > 0
    scale = noise.sigma ** 2 if normalized else 1.0
    metrics = {method: tallies[method].metrics(method, runs, scale) for method in methods}
    return MetricsReport(noise.sigma, runs, normalized, metrics)


def _two_ring(x_c: float, y_c: float, a: Tuple[float, float],
              b: Tuple[float, float], psi: float = 0.0) -> GeometricParams:
    return GeometricParams(x_c, y_c, ((a[0], b[0]), (a[1], b[1])), psi)


OMEGA_GRID = tuple(np.linspace(math.pi / 6, FULL_TURN, 12))
A1_GRID = tuple(np.linspace(1.01, 5.0, 12))


def experiment_presets() -> Dict[str, Union[Scenario, ScenarioFamily]]:
    """
    Named scenes: the long-arc (exp1) and short-arc (exp2) benchmarks, and
    the bias-scan families over arc length (scenario1, scenario3_high,
    scenario3_low) and inner semi-major axis (scenario2)
    """
    noise = NoiseModel(sigma=0.1, seed=settings.SEED)
    exp1 = Scenario(
        geometry=_two_ring(-3.0, 3.0, (5.0, 10.0), (1.0, 2.0)),
        arc_start=0.0,
        arc_end=5 * math.pi / 3,
        counts=(10, 15),
        noise=noise,
    )
    exp2 = Scenario(
        geometry=_two_ring(0.0, 0.0, (3.0, 6.0), (2.0, 4.0)),
        arc_start=0.0,
        arc_end=math.pi / 2,
        counts=(15, 20),
        noise=replace(noise, sigma=0.3),
    )

    def scenario1(omega: float) -> Scenario:
        return replace(exp2, arc_end=omega)

    def scenario2(a1: float) -> Scenario:
        return replace(exp2, geometry=_two_ring(0.0, 0.0, (a1, 2 * a1), (1.0, 2.0)))

    elongated = _two_ring(0.0, 0.0, (3.0, 6.0), (1.0, 2.0))

    # curvature a / b^2 at the major-axis vertex, b / a^2 at the minor-axis vertex
    def scenario3_high(omega: float) -> Scenario:
        return replace(exp2, geometry=elongated, arc_start=-omega / 2, arc_end=omega / 2)

    def scenario3_low(omega: float) -> Scenario:
        centre = math.pi / 2
        return replace(exp2, geometry=elongated, arc_start=centre - omega / 2, arc_end=centre + omega / 2)

    return {
        'exp1': exp1,
        'exp2': exp2,
        'scenario1': ScenarioFamily(
            'scenario1', 'omega', OMEGA_GRID, scenario1,
            'arcs [0, omega] on the short-arc benchmark geometry',
        ),
        'scenario2': ScenarioFamily(
            'scenario2', 'a1', A1_GRID, scenario2,
            'a2 = 2 a1, b = (1, 2), arcs [0, pi/2]',
        ),
        'scenario3_high': ScenarioFamily(
            'scenario3_high', 'omega', OMEGA_GRID, scenario3_high,
            'arcs centred on the major-axis vertex',
        ),
        'scenario3_low': ScenarioFamily(
            'scenario3_low', 'omega', OMEGA_GRID, scenario3_low,
            'arcs centred on the minor-axis vertex',
        ),
    }
