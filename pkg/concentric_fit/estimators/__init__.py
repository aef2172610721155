"""
Concentric ellipse estimators

Each estimator solves a generalized eigenproblem M theta = lambda N theta
over the carriers of the data; the methods differ only in N.
"""

from concentric_fit.design_matrices import DataSet
from concentric_fit.estimators.base import Estimator, FitResult, Method
from concentric_fit.estimators.registry import fit_all, registry, resolve_methods


def _fit(method: Method, data: DataSet) -> FitResult:
    return registry.get(method).fit(data)


def fit_ls(data: DataSet) -> FitResult:
    return _fit(Method.LS, data)


def fit_oleary(data: DataSet) -> FitResult:
    return _fit(Method.OLEARY, data)


def fit_taubin(data: DataSet) -> FitResult:
    return _fit(Method.TAUBIN, data)


def fit_semi_hyper(data: DataSet) -> FitResult:
    return _fit(Method.SEMI_HYPER, data)


def fit_hyper(data: DataSet) -> FitResult:
    return _fit(Method.HYPER, data)


__all__ = [
    'Estimator',
    'FitResult',
    'Method',
    'fit_all',
    'fit_hyper',
    'fit_ls',
    'fit_oleary',
    'fit_semi_hyper',
    'fit_taubin',
    'registry',
    'resolve_methods',
]
