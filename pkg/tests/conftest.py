"""
Shared fixtures: exact and noisy concentric scenes
"""

import os

# keep test runs from writing log files; must precede config imports
os.environ.setdefault('LOG_TO_FILE', 'false')

from pathlib import Path
import math

import numpy as np
import pytest

from concentric_fit.design_matrices import DataSet
from concentric_fit.geometry import GeometricParams, assemble_concentric_theta
from concentric_fit.simulation import (
    NoiseModel,
    Scenario,
    add_noise,
    experiment_presets,
    generate_true_points,
)

TEST_DATA = Path(__file__).resolve().parent.parent / 'test_data'

CIRCLES_THETA = np.array([1.0, 0.0, 1.0, 0.0, 0.0, -1.0, -4.0]) / math.sqrt(19.0)


def circle_points(radius: float, n: int) -> np.ndarray:
    t = 2 * math.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(t), radius * np.sin(t)])


@pytest.fixture
def circles_data() -> DataSet:
    """8 exact points on each of the circles of radius 1 and 2 about the origin"""
    return DataSet((circle_points(1.0, 8), circle_points(2.0, 8)), f0=1.0)


@pytest.fixture
def exp1() -> Scenario:
    return experiment_presets()['exp1']


@pytest.fixture
def exp2() -> Scenario:
    return experiment_presets()['exp2']


@pytest.fixture
def exp2_exact(exp2) -> DataSet:
    return generate_true_points(exp2)


@pytest.fixture
def exp2_theta(exp2) -> np.ndarray:
    return assemble_concentric_theta(exp2.geometry, exp2.f0).theta


@pytest.fixture
def exp2_noisy(exp2_exact) -> DataSet:
    return add_noise(exp2_exact, NoiseModel(sigma=0.05, seed=1234))


@pytest.fixture
def tilted_geometry() -> GeometricParams:
    return GeometricParams(1.5, -2.0, ((4.0, 2.5), (8.0, 5.0)), 0.4)


def aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b|| after flipping a onto b's side"""
    if a @ b < 0:
        a = -a
    return float(np.linalg.norm(a - b))
