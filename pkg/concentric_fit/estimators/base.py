"""
Base Estimator Interface
Abstract base class for all concentric-ellipse fitting methods
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union
import logging
import time

import numpy as np

from config import settings
from concentric_fit.design_matrices import ConstraintKind, DataSet, Design
from concentric_fit.exceptions import NotConcentricEllipses, NumericalFailure
from concentric_fit.geometry import ConcentricTheta, GeometricParams, theta_to_geo
from concentric_fit.pencil import PencilSolution

logger = logging.getLogger(__name__)

Method = ConstraintKind


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


@dataclass
class FitResult:
    """Result of one fitting method on one data set"""
    method: Method
    theta: Optional[ConcentricTheta]
    eigenvalue: float
    valid: bool
    elapsed: float
    residual: float = 0.0
    geometry: Optional[GeometricParams] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict:
        """Convert to dictionary"""
        return {
            'method': self.method.value,
            'theta': self.theta.to_list() if self.theta is not None else None,
            'eigenvalue': _finite_or_none(self.eigenvalue),
            'valid': self.valid,
            'elapsed': self.elapsed,
            'residual': _finite_or_none(self.residual),
            'geometry': self.geometry.to_dict() if self.geometry is not None else None,
            'error': self.error,
        }

    @classmethod
    def failed(cls, method: Method, error: Exception, elapsed: float = 0.0) -> 'FitResult':
        return cls(method, None, float('nan'), False, elapsed, float('nan'), None, str(error))


class Estimator(ABC):
    """Abstract base class for algebraic estimators"""

    @property
    @abstractmethod
    def method(self) -> Method:
        """Method identifier"""
        pass

    @property
    @abstractmethod
    def display_name(self) -> str:
        """Human-readable name"""
        pass

    @property
    def name(self) -> str:
        return self.method.value

    @abstractmethod
    def constraint_matrix(self, design: Design) -> np.ndarray:
        """The N of the pencil M theta = lambda N theta this method solves"""
        pass

    @abstractmethod
    def _solve(self, design: Design) -> Tuple[np.ndarray, float]:
        """
        Solve the method's eigenproblem

        Args:
            design: cached carriers and matrices of the data

        Returns:
            (unnormalized theta, lambda)
        """
        pass

    def fit(self, data: Union[DataSet, Design]) -> FitResult:
        """
        Fit concentric ellipses

        Args:
            data: points, or a Design shared with other estimators

        Returns:
            FitResult; valid is False when theta does not describe K ellipses

        Raises:
            InsufficientPoints: fewer than 6 + K points
            NumericalFailure: no admissible eigenpair
        """
        design = data if isinstance(data, Design) else Design(data)
        design.data.require_fittable()

        start = time.perf_counter()
        kernel = design.kernel_vector()
        if kernel is not None:
            logger.debug(f"{self.name}: M is singular, returning its kernel")
            vec, lam = kernel, 0.0
        else:
            vec, lam = self._solve(design)
        elapsed = time.perf_counter() - start

        theta = ConcentricTheta(vec, design.data.f0)
        residual = self._pencil_residual(design, theta.theta, lam)

        geometry = None
        try:
            geometry = theta_to_geo(theta)
        except NotConcentricEllipses as e:
            logger.debug(f"{self.name}: fit is not a set of ellipses ({e})")

        return FitResult(
            method=self.method,
            theta=theta,
            eigenvalue=float(lam),
            valid=geometry is not None,
            elapsed=elapsed,
            residual=residual,
            geometry=geometry,
        )

    def _pencil_residual(self, design: Design, theta: np.ndarray, lam: float) -> float:
        n = self.constraint_matrix(design)
        m = design.M
        residual = float(np.linalg.norm(m @ theta - lam * (n @ theta)))
        bound = settings.PENCIL_RESIDUAL_TOL * np.linalg.norm(m)
        if residual > bound:
            logger.warning(
                f"{self.name}: pencil residual {residual:.3e} exceeds {bound:.3e}"
            )
        return residual


def smallest_positive(solution: PencilSolution, label: str,
                      m: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Eigenpair with the smallest eigenvalue above the positivity threshold

    The threshold is POSITIVE_EIG_TOL * ||M||_2 / ||N||_2 of the pencil the
    solution came from.
    """
    values = solution.eigenvalues
    n_norm = np.linalg.norm(n, 2)
    cutoff = settings.POSITIVE_EIG_TOL * np.linalg.norm(m, 2) / n_norm if n_norm > 0 else 0.0
    positive = np.flatnonzero(values > cutoff)
    if positive.size == 0:
        raise NumericalFailure(f"{label}: pencil has no positive eigenvalue")
    idx = positive[0]
    return solution.eigenvectors[:, idx], float(values[idx])
