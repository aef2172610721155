"""
Hyper and Semi-Hyper Estimators
Both solve N theta = eta M theta and keep the eigenvector of the largest
|eta|, which is the lambda = 1/eta closest to zero. Posing the problem this
way keeps M, which is nearly singular, on the right-hand side.
"""

from typing import Tuple
import logging

import numpy as np

from concentric_fit.design_matrices import Design
from concentric_fit.estimators.base import Estimator, Method
from concentric_fit.exceptions import NumericalFailure
from concentric_fit.pencil import solve_symmetric_pencil

logger = logging.getLogger(__name__)


class _ReciprocalPencilEstimator(Estimator):

    def _solve(self, design: Design) -> Tuple[np.ndarray, float]:
        solution = solve_symmetric_pencil(self.constraint_matrix(design), design.M)
        etas = solution.eigenvalues
        idx = int(np.argmax(np.abs(etas)))
        eta = float(etas[idx])
        if eta == 0:
            raise NumericalFailure(f"{self.name}: all eigenvalues of the pencil vanish")
        if eta < 0:
            logger.debug(f"{self.name}: selected eta is negative ({eta:.3e})")
        return solution.eigenvectors[:, idx], 1.0 / eta


class HyperEstimator(_ReciprocalPencilEstimator):
    """Constraint matrix N_H removes the whole second-order bias"""

    @property
    def method(self) -> Method:
        return Method.HYPER

    @property
    def display_name(self) -> str:
        return "Hyper"

    def constraint_matrix(self, design: Design) -> np.ndarray:
        return design.NH


class SemiHyperEstimator(_ReciprocalPencilEstimator):
    """N_S drops the O(1/n) terms of N_H and needs no pseudoinverse"""

    @property
    def method(self) -> Method:
        return Method.SEMI_HYPER

    @property
    def display_name(self) -> str:
        return "Semi-Hyper"

    def constraint_matrix(self, design: Design) -> np.ndarray:
        return design.NS
