"""
Concentric Ellipse Geometry
Geometric and algebraic parameterizations of concentric ellipses and the
conversions between them.

Conics are written A x^2 + 2B xy + C y^2 + 2D x + 2E y + F = 0. A set of K
concentric ellipses sharing center and tilt shares (A, B, C, D, E) and differs
only in F_i, so the whole scene is the vector
theta = (A, B, C, D, E, F_1, ..., F_K). Inside theta the linear and constant
terms are scaled by f0 (D/f0, E/f0, F/f0^2); the single-conic conversions
always work on unscaled coefficients.
"""

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple
import logging
import math

import numpy as np

from config import settings
from concentric_fit.exceptions import (
    GeometryError,
    NotAnEllipse,
    NotConcentricEllipses,
    NotNested,
    NotProportional,
)

logger = logging.getLogger(__name__)

# Number of shared coefficients (A, B, C, D, E)
SHARED = 5


class Point(NamedTuple):
    """Observed point in data units"""
    x: float
    y: float


class Ellipse(NamedTuple):
    """Geometric parameters of a single ellipse"""
    x_c: float
    y_c: float
    a: float
    b: float
    psi: float = 0.0


class SingleConic(NamedTuple):
    """Unscaled coefficients of A x^2 + 2B xy + C y^2 + 2D x + 2E y + F = 0"""
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float


def normalize_psi(psi: float) -> float:
    """Map an axis angle to [-pi/2, pi/2); axes are pi-periodic"""
    wrapped = (psi + math.pi / 2) % math.pi - math.pi / 2
    # float rounding can land exactly on the open end
    if wrapped >= math.pi / 2:
        wrapped -= math.pi
    return wrapped


@dataclass(frozen=True)
class GeometricParams:
    """Center, per-ring (semi-major, semi-minor) pairs and the common tilt"""
    x_c: float
    y_c: float
    rings: Tuple[Tuple[float, float], ...]
    psi: float = 0.0

    def __post_init__(self):
        rings = tuple((float(a), float(b)) for a, b in self.rings)
        if not rings:
            raise GeometryError("at least one ring is required")
        for i, (a, b) in enumerate(rings, 1):
            if not (b > 0 and a >= b):
                raise GeometryError(f"ring {i}: need a >= b > 0, got a={a}, b={b}")
        object.__setattr__(self, 'rings', rings)
        object.__setattr__(self, 'psi', normalize_psi(float(self.psi)))

    @property
    def K(self) -> int:
        return len(self.rings)

    def ring(self, i: int) -> Ellipse:
        """Single-ellipse view of ring i (1-based)"""
        a, b = self.rings[i - 1]
        return Ellipse(self.x_c, self.y_c, a, b, self.psi)

    def check_nested(self) -> None:
        """Raise NotNested unless a_1 < ... < a_K and b_1 < ... < b_K"""
        for i in range(1, self.K):
            (a0, b0), (a1, b1) = self.rings[i - 1], self.rings[i]
            if not (a1 > a0 and b1 > b0):
                raise NotNested(f"ring {i + 1} does not enclose ring {i}")

    def scaled(self, factor: float) -> 'GeometricParams':
        """Same scene with every length multiplied by factor"""
        return GeometricParams(
            self.x_c * factor,
            self.y_c * factor,
            tuple((a * factor, b * factor) for a, b in self.rings),
            self.psi,
        )

    def to_dict(self) -> Dict:
        return {
            'center': [self.x_c, self.y_c],
            'rings': [{'a': a, 'b': b} for a, b in self.rings],
            'psi': self.psi,
        }


@dataclass(frozen=True, eq=False)
class ConcentricTheta:
    """Unit-norm, sign-canonical algebraic vector (A, B, C, D, E, F_1..F_K)"""
    theta: np.ndarray
    f0: float = 1.0

    def __post_init__(self):
        if self.f0 <= 0:
            raise GeometryError(f"f0 must be positive, got {self.f0}")
        vec = np.asarray(self.theta, dtype=float).reshape(-1)
        if vec.size < SHARED + 1:
            raise GeometryError(f"theta needs at least {SHARED + 1} entries, got {vec.size}")
        norm = np.linalg.norm(vec)
        if not np.isfinite(norm) or norm == 0:
            raise GeometryError("theta must be finite and nonzero")
        vec = canonical_sign(vec / norm)
        vec.setflags(write=False)
        object.__setattr__(self, 'theta', vec)

    @property
    def K(self) -> int:
        return self.theta.size - SHARED

    @property
    def dim(self) -> int:
        return self.theta.size

    def conic(self, ring: int) -> SingleConic:
        """Unscaled single conic of ring (1-based)"""
        A, B, C, D, E = self.theta[:SHARED]
        F = self.theta[SHARED + ring - 1]
        return SingleConic(A, B, C, D * self.f0, E * self.f0, F * self.f0 ** 2)

    def to_list(self) -> List[float]:
        return [float(v) for v in self.theta]


def canonical_sign(vec: np.ndarray) -> np.ndarray:
    """Flip so that A > 0, or the first nonzero entry is positive when A = 0"""
    vec = np.array(vec, dtype=float)
    nonzero = np.flatnonzero(vec)
    if nonzero.size and vec[nonzero[0]] < 0:
        vec = -vec
    return vec


def geo_to_alg_single(ellipse: Ellipse) -> SingleConic:
    """Unscaled conic coefficients of a single ellipse"""
    x_c, y_c, a, b, psi = ellipse
    c, s = math.cos(psi), math.sin(psi)
    A = c * c / a ** 2 + s * s / b ** 2
    B = c * s * (1.0 / a ** 2 - 1.0 / b ** 2)
    C = s * s / a ** 2 + c * c / b ** 2
    D = -A * x_c - B * y_c
    E = -C * y_c - B * x_c
    F = A * x_c ** 2 + C * y_c ** 2 + 2 * B * x_c * y_c - 1.0
    return SingleConic(A, B, C, D, E, F)


def alg_to_geo_single(conic: Sequence[float]) -> Ellipse:
    """
    Geometric parameters of the ellipse described by conic coefficients

    Args:
        conic: (A, B, C, D, E, F), any nonzero scale

    Returns:
        Ellipse with a >= b > 0 and psi in [-pi/2, pi/2)

    Raises:
        NotAnEllipse: hyperbola, parabola, or empty locus
    """
    A, B, C, D, E, F = (float(v) for v in conic)
    det = A * C - B * B
    if not det > 0:
        raise NotAnEllipse(f"AC - B^2 = {det:.6g} is not positive")

    # Scale equivalence: make the quadratic form positive definite
    if A + C < 0:
        A, B, C, D, E, F = -A, -B, -C, -D, -E, -F

    x_c = (B * E - C * D) / det
    y_c = (B * D - A * E) / det
    f_center = F + D * x_c + E * y_c

    root = math.hypot(A - C, 2.0 * B)
    mu_large = 0.5 * (A + C + root)
    mu_small = det / mu_large
    if not (f_center < 0 and mu_small > 0):
        raise NotAnEllipse("conic has no real points")

    a = math.sqrt(-f_center / mu_small)
    b = math.sqrt(-f_center / mu_large)

    if B == 0:
        psi = 0.0 if A <= C else -math.pi / 2
    else:
        psi = normalize_psi(0.5 * math.atan2(-2.0 * B, C - A))

    return Ellipse(x_c, y_c, a, b, psi)


def assemble_concentric_theta(phi: GeometricParams, f0: float = 1.0) -> ConcentricTheta:
    """
    Algebraic vector of a concentric scene

    Args:
        phi: nested rings sharing center and tilt, axes in a common ratio
        f0: scale factor applied to the linear and constant terms

    Raises:
        NotNested: rings out of order
        NotProportional: b_i/b_1 differs from a_i/a_1
    """
    phi.check_nested()
    a1, b1 = phi.rings[0]
    ratios = []
    for i, (a, b) in enumerate(phi.rings, 1):
        ratio = a / a1
        if abs(b / b1 - ratio) > settings.PROPORTIONAL_TOL * ratio:
            raise NotProportional(
                f"ring {i}: a ratio {ratio:.12g} differs from b ratio {b / b1:.12g}"
            )
        ratios.append(ratio)

    A, B, C, D, E, F1 = geo_to_alg_single(phi.ring(1))
    # ring i is (z-c)^T Q (z-c) = r_i^2 with Q from ring 1
    offsets = [F1 + 1.0 - r * r for r in ratios]

    vec = np.array([A, B, C, D / f0, E / f0] + [F / f0 ** 2 for F in offsets])
    return ConcentricTheta(vec, f0)


def theta_to_geo(theta: ConcentricTheta) -> GeometricParams:
    """
    Geometric parameters of every ring; this is the concentric-ellipse validity test

    Raises:
        NotConcentricEllipses: some ring is not a real ellipse
    """
    ellipses = []
    for i in range(1, theta.K + 1):
        try:
            ellipses.append(alg_to_geo_single(theta.conic(i)))
        except NotAnEllipse as e:
            raise NotConcentricEllipses(f"ring {i}: {e}") from e

    first = ellipses[0]
    return GeometricParams(
        first.x_c,
        first.y_c,
        tuple((e.a, e.b) for e in ellipses),
        first.psi,
    )


def is_concentric_ellipses(theta: ConcentricTheta) -> bool:
    """True when every ring of theta is a real ellipse"""
    try:
        theta_to_geo(theta)
    except NotConcentricEllipses:
        return False
    return True


def residual(theta: ConcentricTheta, p: Sequence[float], ring: int) -> float:
    """Algebraic distance of point p from ring (1-based)"""
    if not 1 <= ring <= theta.K:
        raise GeometryError(f"ring must be in 1..{theta.K}, got {ring}")
    x, y = float(p[0]), float(p[1])
    A, B, C, D, E = theta.theta[:SHARED]
    F = theta.theta[SHARED + ring - 1]
    f0 = theta.f0
    return float(
        A * x * x + 2 * B * x * y + C * y * y
        + 2 * f0 * D * x + 2 * f0 * E * y + f0 * f0 * F
    )


def ring_points(ellipse: Ellipse, t: np.ndarray) -> np.ndarray:
    """Points of an ellipse at eccentric-anomaly parameters t, shape (len(t), 2)"""
    x_c, y_c, a, b, psi = ellipse
    t = np.asarray(t, dtype=float)
    c, s = math.cos(psi), math.sin(psi)
    x = x_c + a * np.cos(t) * c - b * np.sin(t) * s
    y = y_c + a * np.cos(t) * s + b * np.sin(t) * c
    return np.column_stack([x, y])
