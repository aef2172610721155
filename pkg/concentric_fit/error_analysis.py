"""
Error Analysis
Leading-order covariance and second-order bias of the algebraic
estimators, evaluated at a known noiseless scene.

All quantities are the sigma^2-free factors: multiply by sigma^2 to get the
covariance or the bias at noise level sigma. theta is unit-norm and
sign-canonical throughout.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Union
import logging

import numpy as np
import pandas as pd

from concentric_fit.design_matrices import (
    ConstraintKind,
    DataSet,
    Design,
    carriers,
    deflated_pinv,
    trace_vector,
)
from concentric_fit.estimators import Method, resolve_methods
from concentric_fit.exceptions import DegenerateConstraint, GeometryError
from concentric_fit.geometry import ConcentricTheta
from concentric_fit.simulation import Scenario, ScenarioFamily, generate_true_points

logger = logging.getLogger(__name__)

# |xi^T theta| allowed on a true point, relative to ||xi||
ON_CURVE_TOL = 1e-10


class TrueScene:
    """
    Noiseless points together with the theta they lie on

    Raises:
        GeometryError: some point is off its ring
    """

    def __init__(self, theta_true: ConcentricTheta, true_points: DataSet):
        if theta_true.K != true_points.K:
            raise GeometryError(f"theta has {theta_true.K} rings, data has {true_points.K}")
        if theta_true.f0 != true_points.f0:
            raise GeometryError(f"f0 differs: theta {theta_true.f0}, data {true_points.f0}")
        self.theta_true = theta_true
        self.true_points = true_points

        xi = carriers(true_points)
        off = np.abs(xi @ theta_true.theta) / np.linalg.norm(xi, axis=1)
        if off.max() > ON_CURVE_TOL:
            raise GeometryError(f"true points are off their rings (max {off.max():.3e})")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> 'TrueScene':
        return cls(scenario.true_theta(), generate_true_points(scenario))

    @property
    def theta(self) -> np.ndarray:
        return self.theta_true.theta

    @cached_property
    def design(self) -> Design:
        """Design whose pseudoinverse has the kernel span(theta) removed"""
        base = Design(self.true_points)
        return Design(self.true_points, m_pinv=deflated_pinv(base.M, self.theta))

    @property
    def m_pinv(self) -> np.ndarray:
        return self.design.m_pinv

    @cached_property
    def xi_sum(self) -> np.ndarray:
        return self.design.xi.sum(axis=0)


@dataclass
class BiasReport:
    """
    Second-order bias of one method divided by sigma^2

    bias is split as essential_common + nonessential + essential_diff.
    unit_norm_shift is the component along theta that every unit-norm
    estimator shares; total() adds it.
    """
    method: Method
    bias: np.ndarray
    essential_common: np.ndarray
    nonessential: np.ndarray
    essential_diff: np.ndarray
    unit_norm_shift: np.ndarray
    p: float
    q: float

    def total(self) -> np.ndarray:
        return self.bias + self.unit_norm_shift

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.bias))

    def to_dict(self) -> Dict:
        return {
            'method': self.method.value,
            'bias': self.bias.tolist(),
            'bias_norm': self.norm,
            'essential_common': self.essential_common.tolist(),
            'nonessential': self.nonessential.tolist(),
            'essential_diff': self.essential_diff.tolist(),
            'unit_norm_shift': self.unit_norm_shift.tolist(),
            'p': self.p,
            'q': self.q,
        }


def m_prime(scene: TrueScene) -> np.ndarray:
    """Sum of (theta^T V0 theta) xi xi^T over the true points"""
    theta = scene.theta
    weights = np.einsum('d,nde,e->n', theta, scene.design.v0, theta)
    xi = scene.design.xi
    return (xi * weights[:, None]).T @ xi


def leading_variance(scene: TrueScene) -> np.ndarray:
    """M^- M' M^-, shared by every algebraic method"""
    p = scene.m_pinv
    return p @ m_prime(scene) @ p


def pi_vector(scene: TrueScene) -> np.ndarray:
    """
    Sum over points of Pi_ij theta, computed without forming Pi_ij

    Uses xi^T theta = 0, so the middle term of Pi_ij theta vanishes.
    """
    theta = scene.theta
    xi = scene.design.xi
    v0 = scene.design.v0
    p = scene.m_pinv
    v0_theta = np.einsum('nde,e->nd', v0, theta)
    quad = np.einsum('nd,de,ne->n', xi, p, xi)
    cross = np.einsum('nd,de,ne->n', xi, p, v0_theta)
    return (quad[:, None] * v0_theta).sum(axis=0) + cross @ xi


def expected_T(scene: TrueScene) -> np.ndarray:
    """Full second-order expectation E[T] / sigma^2"""
    return scene.design.NH


def expected_T_theta(scene: TrueScene) -> np.ndarray:
    """E[T] theta / sigma^2 = N_S theta - pi"""
    return scene.design.NS @ scene.theta - pi_vector(scene)


def trace_term(scene: TrueScene) -> float:
    """tr[M^- M']"""
    return float(np.trace(scene.m_pinv @ m_prime(scene)))


def general_bias(scene: TrueScene, n: np.ndarray) -> np.ndarray:
    """
    Second-order bias / sigma^2 of the estimator with constraint matrix N

    M^- ((theta^T T theta / theta^T N theta) N theta - T theta),
    T = E[T] / sigma^2.

    Raises:
        DegenerateConstraint: theta^T N theta vanishes
    """
    theta = scene.theta
    n_theta = n @ theta
    denom = float(theta @ n_theta)
    if abs(denom) <= 1e-14 * max(np.linalg.norm(n), 1.0):
        raise DegenerateConstraint(f"theta^T N theta = {denom:.3e}")
    t_theta = expected_T_theta(scene)
    return scene.m_pinv @ ((theta @ t_theta) / denom * n_theta - t_theta)


def theoretical_bias(scene: TrueScene, method: Union[Method, str]) -> BiasReport:
    """
    Bias of a method with its anatomy

    The total comes from general_bias with the method's constraint matrix;
    the common and nonessential parts follow closed forms and the method
    specific remainder is essential_diff. Hyper has no second-order bias.

    Raises:
        DegenerateConstraint: theta^T N theta vanishes for the method
    """
    method = Method(method)
    theta = scene.theta
    p_inv = scene.m_pinv
    design = scene.design
    tr = trace_term(scene)

    ol = float(theta @ design.constraint(ConstraintKind.OLEARY).n @ theta)
    nt = float(theta @ design.NT @ theta)
    p = tr / ol if ol != 0 else float('nan')
    q = tr / nt if nt != 0 else float('nan')

    shift = -0.5 * float(np.trace(leading_variance(scene))) * theta

    if method == Method.HYPER:
        zero = np.zeros_like(theta)
        return BiasReport(method, zero, zero, zero.copy(), zero.copy(), shift, p, q)

    total = general_bias(scene, design.constraint(method).n)

    e_theta = float(trace_vector(scene.theta_true.K) @ theta)
    centroid = p_inv @ scene.xi_sum
    common = -e_theta * centroid
    if method == Method.SEMI_HYPER:
        common = q * common
    nonessential = p_inv @ pi_vector(scene)
    diff = total - common - nonessential
    return BiasReport(method, total, common, nonessential, diff, shift, p, q)


def bias_scan(family: ScenarioFamily,
              methods: Optional[Iterable[Union[Method, str]]] = None) -> pd.DataFrame:
    """
    ||bias / sigma^2|| per method at every point of a scenario sweep

    A method whose constraint degenerates at a sweep point gets NaN there.
    """
    methods = resolve_methods(methods)
    rows: List[Dict] = []
    for value, scenario in family.scenarios():
        scene = TrueScene.from_scenario(scenario)
        row = {family.sweep: value}
        for method in methods:
            try:
                row[method.value] = theoretical_bias(scene, method).norm
            except DegenerateConstraint as e:
                logger.warning(f"{family.name} {family.sweep}={value:g} {method.value}: {e}")
                row[method.value] = float('nan')
        rows.append(row)
    logger.info(f"Bias scan {family.name}: {len(rows)} rows")
    return pd.DataFrame(rows, columns=[family.sweep] + [m.value for m in methods])
