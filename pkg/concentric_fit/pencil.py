"""
Generalized eigenproblems M x = lambda N x for symmetric, possibly
indefinite or singular N, solved with the QZ algorithm.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy import linalg

from concentric_fit.exceptions import NumericalFailure
from concentric_fit.geometry import canonical_sign

logger = logging.getLogger(__name__)

# |lambda| beyond this, relative to ||M|| / ||N||, is treated as infinite.
# Must stay above 1 / (kernel tolerance of M) or Hyper loses its eigenpair
# on nearly exact data.
INFINITE_RATIO = 1e15
# allowed imaginary part relative to max(1, |lambda|) after scaling
IMAG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PencilSolution:
    """Finite real eigenpairs, eigenvectors as unit columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self) -> int:
        return self.eigenvalues.size

    def residuals(self, m: np.ndarray, n: np.ndarray) -> np.ndarray:
        """||M x - lambda N x|| for every pair"""
        v = self.eigenvectors
        return np.linalg.norm(m @ v - (n @ v) * self.eigenvalues, axis=0)


def solve_symmetric_pencil(m: np.ndarray, n: np.ndarray) -> PencilSolution:
    """
    All finite real eigenpairs of the pencil (M, N)

    Eigenvectors are unit-norm and sign-canonical. Pairs are sorted by
    eigenvalue, ties broken by lexicographic eigenvector order.

    Raises:
        NumericalFailure: no finite real eigenpair exists
    """
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    if m.shape != n.shape or m.shape[0] != m.shape[1]:
        raise NumericalFailure(f"pencil shapes differ: {m.shape} vs {n.shape}")

    try:
        (alpha, beta), vecs = linalg.eig(m, n, homogeneous_eigvals=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"QZ decomposition failed: {e}") from e

    m_norm = np.linalg.norm(m)
    n_norm = np.linalg.norm(n)
    scale = n_norm / m_norm if m_norm > 0 and n_norm > 0 else 1.0

    with np.errstate(divide='ignore', invalid='ignore'):
        lam = alpha / beta
    scaled = lam * scale
    finite = np.isfinite(lam) & (np.abs(scaled) < INFINITE_RATIO)
    real = np.abs(scaled.imag) <= IMAG_TOL * np.maximum(1.0, np.abs(scaled))
    keep = finite & real

    if not keep.any():
        raise NumericalFailure("pencil has no finite real eigenvalue")

    values = lam[keep].real
    columns = []
    for col in vecs[:, keep].T:
        v = col.real
        if np.linalg.norm(v) == 0:
            v = col.imag
        columns.append(canonical_sign(v / np.linalg.norm(v)))
    vectors = np.column_stack(columns)

    # lexsort uses the last key as primary
    order = np.lexsort(tuple(vectors[::-1]) + (values,))
    logger.debug(f"pencil: {values.size} of {lam.size} eigenpairs finite and real")
    return PencilSolution(values[order], vectors[:, order])
