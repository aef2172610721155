"""
Estimator Registry
Manages estimator registration and discovery
"""

from typing import Dict, Iterable, List, Optional, Union
import logging
import time

from concentric_fit.design_matrices import DataSet, Design
from concentric_fit.estimators.base import Estimator, FitResult, Method
from concentric_fit.exceptions import ConcentricFitError

logger = logging.getLogger(__name__)


class EstimatorRegistry:
    """Manages estimator registration and discovery"""

    def __init__(self):
        self._estimators: Dict[Method, Estimator] = {}

    def register(self, estimator: Estimator) -> None:
        """
        Register an estimator

        Args:
            estimator: Estimator instance to register
        """
        logger.debug(f"Registering estimator: {estimator.name}")
        self._estimators[estimator.method] = estimator

    def get(self, method: Union[Method, str]) -> Optional[Estimator]:
        """
        Get estimator by method

        Args:
            method: Method or its name ('ls', 'oleary', ...)

        Returns:
            Estimator instance or None if not found
        """
        try:
            return self._estimators.get(Method(method))
        except ValueError:
            return None

    def list_available(self) -> List[Dict]:
        """
        List all registered estimators

        Returns:
            List of estimator info dictionaries
        """
        return [
            {
                'name': e.name,
                'display_name': e.display_name,
                'constraint': e.method.value,
            }
            for e in self._estimators.values()
        ]

    def get_available_methods(self) -> List[Method]:
        return list(self._estimators.keys())


# Global registry instance
registry = EstimatorRegistry()


def auto_discover_estimators():
    """
    Register the built-in estimators in canonical order
    """
    from concentric_fit.estimators.hyper import HyperEstimator, SemiHyperEstimator
    from concentric_fit.estimators.ls import LeastSquaresEstimator
    from concentric_fit.estimators.oleary import OLearyEstimator
    from concentric_fit.estimators.taubin import TaubinEstimator

    for estimator_cls in (
        LeastSquaresEstimator,
        OLearyEstimator,
        TaubinEstimator,
        SemiHyperEstimator,
        HyperEstimator,
    ):
        try:
            registry.register(estimator_cls())
        except Exception as e:
            logger.error(f"Error registering estimator {estimator_cls.__name__}: {e}")

    logger.debug(f"Estimator discovery complete: {[m.value for m in registry.get_available_methods()]}")


def resolve_methods(methods: Optional[Iterable[Union[Method, str]]] = None) -> List[Method]:
    """
    Validate method names, keeping caller order

    Raises:
        ValueError: unknown method name
    """
    if methods is None:
        return registry.get_available_methods()
    resolved = []
    for m in methods:
        estimator = registry.get(m)
        if estimator is None:
            raise ValueError(f"unknown method: {m!r}")
        if estimator.method not in resolved:
            resolved.append(estimator.method)
    return resolved


def fit_all(data: Union[DataSet, Design],
            methods: Optional[Iterable[Union[Method, str]]] = None) -> Dict[Method, FitResult]:
    """
    Run several estimators on one data set, sharing the assembled matrices

    Failures are isolated per method and reported in FitResult.error.

    Raises:
        InsufficientPoints: fewer than 6 + K points
    """
    design = data if isinstance(data, Design) else Design(data)
    design.data.require_fittable()
    # assemble shared matrices outside the per-method timing
    _ = design.M, design.NT

    results: Dict[Method, FitResult] = {}
    for method in resolve_methods(methods):
        estimator = registry.get(method)
        start = time.perf_counter()
        try:
            results[method] = estimator.fit(design)
        except ConcentricFitError as e:
            logger.warning(f"{estimator.display_name} failed: {e}")
            results[method] = FitResult.failed(method, e, time.perf_counter() - start)
    return results


auto_discover_estimators()
