"""
Taubin Estimator
Normalizes by the summed gradient covariance N_T. N_T vanishes on the F
block, so the F_i are eliminated first and a 5x5 pencil is solved.
"""

from typing import Tuple
import logging

import numpy as np

from concentric_fit.design_matrices import Design
from concentric_fit.estimators.base import Estimator, Method, smallest_positive
from concentric_fit.exceptions import EmptyRing
from concentric_fit.geometry import SHARED
from concentric_fit.pencil import solve_symmetric_pencil

logger = logging.getLogger(__name__)


class TaubinEstimator(Estimator):

    @property
    def method(self) -> Method:
        return Method.TAUBIN

    @property
    def display_name(self) -> str:
        return "Taubin"

    def constraint_matrix(self, design: Design) -> np.ndarray:
        return design.NT

    def _solve(self, design: Design) -> Tuple[np.ndarray, float]:
        m = design.M
        m11 = m[:SHARED, :SHARED]
        m12 = m[:SHARED, SHARED:]
        # M22 = Diag(n_i f0^4)
        m22_diag = np.diag(m[SHARED:, SHARED:])
        if np.any(m22_diag <= 0):
            empty = [i + 1 for i in np.flatnonzero(m22_diag <= 0)]
            raise EmptyRing(f"ring(s) {empty} carry no points")

        coupling = m12 / m22_diag
        reduced_m = m11 - coupling @ m12.T
        reduced_n = design.NT[:SHARED, :SHARED]

        solution = solve_symmetric_pencil(reduced_m, reduced_n)
        shared, lam = smallest_positive(solution, self.name, reduced_m, reduced_n)
        offsets = -coupling.T @ shared
        return np.concatenate([shared, offsets]), lam
