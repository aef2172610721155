"""
Design Matrices
Carrier vectors, the scatter matrix M, normalized covariances V0 and the
constraint matrices that distinguish the fitting methods.

All assemblies are vectorized over points: carriers are stacked into an
(n, d) array and V0 into an (n, d, d) array with d = 5 + K.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple
import logging

import numpy as np

from config import settings
from concentric_fit.exceptions import DataError, EmptyRing, InsufficientPoints
from concentric_fit.geometry import SHARED, Point

logger = logging.getLogger(__name__)

Carrier = np.ndarray


class ConstraintKind(str, Enum):
    """Constraint matrix family, one per fitting method"""
    LS = 'ls'
    OLEARY = 'oleary'
    TAUBIN = 'taubin'
    SEMI_HYPER = 'semi_hyper'
    HYPER = 'hyper'


@dataclass(frozen=True, eq=False)
class ScatterMatrix:
    m: np.ndarray
    n_total: int


@dataclass(frozen=True, eq=False)
class ConstraintMatrix:
    n: np.ndarray
    kind: ConstraintKind


@dataclass(frozen=True, eq=False)
class DataSet:
    """
    Observed points grouped by ring

    Args:
        rings: one (n_i, 2) array of (x, y) per ring, innermost first
        f0: scale factor for the linear and constant carrier entries
    """
    rings: Tuple[np.ndarray, ...]
    f0: float = 1.0

    def __post_init__(self):
        if self.f0 <= 0:
            raise DataError(f"f0 must be positive, got {self.f0}")
        rings = []
        for i, pts in enumerate(self.rings, 1):
            arr = np.asarray(pts, dtype=float).reshape(-1, 2)
            if arr.shape[0] == 0:
                raise EmptyRing(f"ring {i} has no points")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"ring {i} contains non-finite coordinates")
            arr.setflags(write=False)
            rings.append(arr)
        if not rings:
            raise EmptyRing("data set has no rings")
        object.__setattr__(self, 'rings', tuple(rings))

    @classmethod
    def from_points(cls, rings: Sequence[Iterable[Point]], f0: float = 1.0) -> 'DataSet':
        return cls(tuple(np.array([tuple(p) for p in ring], dtype=float) for ring in rings), f0)

    @classmethod
    def from_labeled(cls, x: Sequence[float], y: Sequence[float],
                     ring: Sequence[int], f0: float = 1.0) -> 'DataSet':
        """Build from flat columns with 1-based ring labels 1..K"""
        labels = np.asarray(ring, dtype=int)
        xy = np.column_stack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
        K = int(labels.max()) if labels.size else 0
        return cls(tuple(xy[labels == k] for k in range(1, K + 1)), f0)

    @property
    def K(self) -> int:
        return len(self.rings)

    @property
    def dim(self) -> int:
        return SHARED + self.K

    @property
    def counts(self) -> Tuple[int, ...]:
        return tuple(r.shape[0] for r in self.rings)

    @property
    def n_total(self) -> int:
        return sum(self.counts)

    @cached_property
    def points(self) -> np.ndarray:
        """All points stacked ring by ring, shape (n, 2)"""
        return np.vstack(self.rings)

    @cached_property
    def ring_index(self) -> np.ndarray:
        """0-based ring of every stacked point"""
        return np.repeat(np.arange(self.K), self.counts)

    def with_points(self, points: np.ndarray) -> 'DataSet':
        """Same ring layout with replacement coordinates"""
        points = np.asarray(points, dtype=float)
        bounds = np.cumsum(self.counts)[:-1]
        return DataSet(tuple(np.split(points, bounds)), self.f0)

    def scaled(self, factor: float) -> 'DataSet':
        """Coordinates and f0 multiplied by factor"""
        return DataSet(tuple(r * factor for r in self.rings), self.f0 * factor)

    def require_fittable(self) -> None:
        """Raise InsufficientPoints unless there are at least 6 + K points"""
        needed = SHARED + 1 + self.K
        if self.n_total < needed:
            raise InsufficientPoints(
                f"insufficient points: {self.n_total} given, {needed} needed for {self.K} ring(s)"
            )


def carrier(p: Sequence[float], ring: int, K: int, f0: float) -> Carrier:
    """Lifted monomial vector of a point on ring (1-based)"""
    if not 1 <= ring <= K:
        raise DataError(f"ring must be in 1..{K}, got {ring}")
    x, y = float(p[0]), float(p[1])
    xi = np.zeros(SHARED + K)
    xi[:SHARED] = (x * x, 2 * x * y, y * y, 2 * f0 * x, 2 * f0 * y)
    xi[SHARED + ring - 1] = f0 * f0
    return xi


def v0_matrix(p: Sequence[float], K: int, f0: float) -> np.ndarray:
    """Normalized covariance of a carrier; zero over the F block"""
    return _v0_stack(np.asarray([p], dtype=float), K, f0)[0]


def carriers(data: DataSet) -> np.ndarray:
    """Carrier of every point, shape (n, d)"""
    x, y = data.points[:, 0], data.points[:, 1]
    f0 = data.f0
    xi = np.zeros((data.n_total, data.dim))
    xi[:, 0] = x * x
    xi[:, 1] = 2 * x * y
    xi[:, 2] = y * y
    xi[:, 3] = 2 * f0 * x
    xi[:, 4] = 2 * f0 * y
    xi[np.arange(data.n_total), SHARED + data.ring_index] = f0 * f0
    return xi


def _v0_stack(points: np.ndarray, K: int, f0: float) -> np.ndarray:
    # V0 = J J^T with J the derivative of the carrier w.r.t. (x, y)
    n = points.shape[0]
    x, y = points[:, 0], points[:, 1]
    jac = np.zeros((n, SHARED + K, 2))
    jac[:, 0, 0] = 2 * x
    jac[:, 1, 0] = 2 * y
    jac[:, 1, 1] = 2 * x
    jac[:, 2, 1] = 2 * y
    jac[:, 3, 0] = 2 * f0
    jac[:, 4, 1] = 2 * f0
    return np.einsum('nik,njk->nij', jac, jac)


def v0_stack(data: DataSet) -> np.ndarray:
    """V0 of every point, shape (n, d, d)"""
    return _v0_stack(data.points, data.K, data.f0)


def assemble_M(data: DataSet) -> ScatterMatrix:
    xi = carriers(data)
    return ScatterMatrix(xi.T @ xi, data.n_total)


def assemble_NT(data: DataSet) -> ConstraintMatrix:
    return ConstraintMatrix(v0_stack(data).sum(axis=0), ConstraintKind.TAUBIN)


def ls_N(K: int) -> ConstraintMatrix:
    return ConstraintMatrix(np.eye(SHARED + K), ConstraintKind.LS)


def oleary_N(K: int) -> ConstraintMatrix:
    """theta^T N theta = AC - B^2"""
    n = np.zeros((SHARED + K, SHARED + K))
    n[0, 2] = n[2, 0] = 0.5
    n[1, 1] = -1.0
    return ConstraintMatrix(n, ConstraintKind.OLEARY)


def trace_vector(K: int) -> np.ndarray:
    """e = (1, 0, 1, 0, ..., 0), picks A + C"""
    e = np.zeros(SHARED + K)
    e[0] = e[2] = 1.0
    return e


def semi_hyper_matrix(nt: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """N_T + xi_c e^T + e xi_c^T with xi_c the sum of carriers"""
    xi_c = xi.sum(axis=0)
    e = trace_vector(xi.shape[1] - SHARED)
    return nt + np.outer(xi_c, e) + np.outer(e, xi_c)


def assemble_NS(data: DataSet) -> ConstraintMatrix:
    ns = semi_hyper_matrix(assemble_NT(data).n, carriers(data))
    return ConstraintMatrix(ns, ConstraintKind.SEMI_HYPER)


def pi_sum(xi: np.ndarray, v0: np.ndarray, m_pinv: np.ndarray) -> np.ndarray:
    """
    Sum over points of (xi^T M^- xi) V0 + V0 M^- xi xi^T + xi xi^T M^- V0

    Args:
        xi: carriers, shape (n, d)
        v0: normalized covariances, shape (n, d, d)
        m_pinv: pseudoinverse of M
    """
    quad = np.einsum('nd,de,ne->n', xi, m_pinv, xi)
    first = np.einsum('n,nde->de', quad, v0)
    w = np.einsum('nde,ef,nf->nd', v0, m_pinv, xi)
    return first + w.T @ xi + xi.T @ w


def trace_weighted_scatter(xi: np.ndarray, v0: np.ndarray, m_pinv: np.ndarray) -> np.ndarray:
    """Sum over points of tr[M^- V0] xi xi^T"""
    traces = np.einsum('de,ned->n', m_pinv, v0)
    return (xi * traces[:, None]).T @ xi


def hyper_matrix(nt: np.ndarray, xi: np.ndarray, v0: np.ndarray,
                 m_pinv: np.ndarray) -> np.ndarray:
    ns = semi_hyper_matrix(nt, xi)
    return ns - trace_weighted_scatter(xi, v0, m_pinv) - pi_sum(xi, v0, m_pinv)


def assemble_NH(data: DataSet, m_pinv: np.ndarray) -> ConstraintMatrix:
    """Hyper constraint matrix with M^- plugged in from the given pseudoinverse"""
    xi = carriers(data)
    v0 = v0_stack(data)
    nh = hyper_matrix(v0.sum(axis=0), xi, v0, np.asarray(m_pinv, dtype=float))
    return ConstraintMatrix(nh, ConstraintKind.HYPER)


def truncated_pinv(m: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
    """
    Pseudoinverse of a symmetric matrix by eigendecomposition

    Eigenvalues at or below threshold * (largest eigenvalue) are zeroed.
    """
    if threshold is None:
        threshold = settings.PINV_THRESHOLD
    m = 0.5 * (m + m.T)
    w, u = np.linalg.eigh(m)
    top = w.max()
    if top <= 0:
        return np.zeros_like(m)
    inv = np.zeros_like(w)
    keep = w > threshold * top
    inv[keep] = 1.0 / w[keep]
    if not keep.all():
        logger.debug(f"truncated_pinv dropped {int((~keep).sum())} eigenvalue(s)")
    return (u * inv) @ u.T


def deflated_pinv(m: np.ndarray, kernel: np.ndarray,
                  threshold: Optional[float] = None) -> np.ndarray:
    """
    Pseudoinverse of a PSD matrix whose kernel is known to be span(kernel)

    The eigenvector most aligned with kernel is dropped; the rest are
    inverted unless negligible relative to the largest eigenvalue. The
    result is projected onto the complement of kernel.
    """
    if threshold is None:
        threshold = settings.DEFLATION_TOL
    m = 0.5 * (m + m.T)
    w, u = np.linalg.eigh(m)
    drop = int(np.argmax(np.abs(u.T @ kernel)))
    keep = w > threshold * w.max()
    keep[drop] = False
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    pinv = (u * inv) @ u.T
    k = kernel / np.linalg.norm(kernel)
    proj = np.eye(k.size) - np.outer(k, k)
    return proj @ pinv @ proj


class Design:
    """
    Per-data-set cache of carriers and matrices shared by all estimators

    Args:
        data: observed points
        m_pinv: pseudoinverse to plug into N_H; truncated_pinv(M) when omitted
    """

    def __init__(self, data: DataSet, m_pinv: Optional[np.ndarray] = None):
        self.data = data
        self._m_pinv = m_pinv

    @property
    def K(self) -> int:
        return self.data.K

    @property
    def dim(self) -> int:
        return self.data.dim

    @cached_property
    def xi(self) -> np.ndarray:
        return carriers(self.data)

    @cached_property
    def v0(self) -> np.ndarray:
        return v0_stack(self.data)

    @cached_property
    def M(self) -> np.ndarray:
        return self.xi.T @ self.xi

    @cached_property
    def m_pinv(self) -> np.ndarray:
        if self._m_pinv is not None:
            return np.asarray(self._m_pinv, dtype=float)
        return truncated_pinv(self.M)

    @cached_property
    def NT(self) -> np.ndarray:
        return self.v0.sum(axis=0)

    @cached_property
    def NS(self) -> np.ndarray:
        return semi_hyper_matrix(self.NT, self.xi)

    @cached_property
    def NH(self) -> np.ndarray:
        return hyper_matrix(self.NT, self.xi, self.v0, self.m_pinv)

    def constraint(self, kind: ConstraintKind) -> ConstraintMatrix:
        if kind == ConstraintKind.LS:
            return ls_N(self.K)
        if kind == ConstraintKind.OLEARY:
            return oleary_N(self.K)
        matrices = {
            ConstraintKind.TAUBIN: lambda: self.NT,
            ConstraintKind.SEMI_HYPER: lambda: self.NS,
            ConstraintKind.HYPER: lambda: self.NH,
        }
        return ConstraintMatrix(matrices[kind](), kind)

    def kernel_tolerance(self) -> float:
        return settings.KERNEL_EPS_MULTIPLE * self.dim * np.finfo(float).eps

    def kernel_vector(self) -> Optional[np.ndarray]:
        """
        Unit kernel vector of M when the points lie exactly on concentric
        ellipses, else None

        M must be singular to rounding level and every point must satisfy
        the kernel equation to rounding level.
        """
        w, u = np.linalg.eigh(self.M)
        tol = self.kernel_tolerance()
        if w[-1] <= 0 or w[0] > tol * w[-1]:
            return None
        vec = u[:, 0]
        scale = np.linalg.norm(self.xi, axis=1)
        if np.any(np.abs(self.xi @ vec) > np.sqrt(tol) * scale):
            logger.debug("M is nearly singular but some point is off the kernel conic")
            return None
        return vec

