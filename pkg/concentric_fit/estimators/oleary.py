"""
O'Leary Estimator
Imposes AC - B^2 = 1, so every fit with a positive eigenvalue is an ellipse
"""

from typing import Tuple

import numpy as np

from concentric_fit.design_matrices import Design
from concentric_fit.estimators.base import Estimator, Method, smallest_positive
from concentric_fit.pencil import solve_symmetric_pencil


class OLearyEstimator(Estimator):

    @property
    def method(self) -> Method:
        return Method.OLEARY

    @property
    def display_name(self) -> str:
        return "O'Leary"

    def constraint_matrix(self, design: Design) -> np.ndarray:
        return design.constraint(Method.OLEARY).n

    def _solve(self, design: Design) -> Tuple[np.ndarray, float]:
        solution = solve_symmetric_pencil(design.M, self.constraint_matrix(design))
        return smallest_positive(solution, self.name, design.M, self.constraint_matrix(design))
