"""
Least Squares Estimator
Minimizes the sum of squared algebraic distances under ||theta|| = 1
"""

from typing import Tuple
import logging

import numpy as np

from concentric_fit.design_matrices import Design
from concentric_fit.estimators.base import Estimator, Method

logger = logging.getLogger(__name__)


class LeastSquaresEstimator(Estimator):
    """Eigenvector of M for its smallest eigenvalue"""

    @property
    def method(self) -> Method:
        return Method.LS

    @property
    def display_name(self) -> str:
        return "Least Squares"

    def constraint_matrix(self, design: Design) -> np.ndarray:
        return np.eye(design.dim)

    def _solve(self, design: Design) -> Tuple[np.ndarray, float]:
        w, u = np.linalg.eigh(design.M)
        if w[0] <= 0:
            logger.debug(f"LS: smallest eigenvalue of M is {w[0]:.3e}")
        return u[:, 0], float(w[0])
