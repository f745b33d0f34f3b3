"""Screw-axis kinematics: numeric rigid transforms and their polynomial form.

A control is a screw axis (omega_hat, v_hat) traversed by a fixed displacement
``theta_step`` per control period.  With the displacement fixed, the resulting
rotation and translation are polynomials in the axis components: the rotation
entries are quadratic and the translation entries cubic (the cubic comes from
the [omega]^2 v term).  ``symbolic_pose`` builds those 12 polynomials once per
scenario; the controller then optimizes over the axis components.

Planar controls use three variables (w, vx, vy) meaning omega_hat = (0, 0, w)
and v_hat = (vx, vy, 0); spatial controls use all six.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .polyalg import Polynomial

UNIT_TOL = 1e-8


def skew(w: Sequence[float]) -> np.ndarray:
    """Skew-symmetric matrix [w] with [w] @ a == cross(w, a)."""
    x, y, z = (float(v) for v in w)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


@dataclass(frozen=True)
class ScrewControl:
    """A normalized screw axis: rotation part zero or unit, translation bounded.

    omega_hat and v_hat are stored as tuples so the value is hashable and
    immutable; use ``.omega`` / ``.v`` for numpy views.
    """

    omega_hat: tuple
    v_hat: tuple
    planar: bool = False

    def __post_init__(self):
        om = tuple(float(v) for v in self.omega_hat)
        vh = tuple(float(v) for v in self.v_hat)
        if len(om) != 3 or len(vh) != 3:
            raise ValueError("omega_hat and v_hat must be 3-vectors")
        n = math.sqrt(sum(v * v for v in om))
        if not (n <= UNIT_TOL or abs(n - 1.0) <= UNIT_TOL):
            raise ValueError(f"omega_hat must be zero or a unit vector, got norm {n}")
        if self.planar and (abs(om[0]) > UNIT_TOL or abs(om[1]) > UNIT_TOL or abs(vh[2]) > UNIT_TOL):
            raise ValueError("planar control requires omega_hat=(0,0,w), v_hat=(vx,vy,0)")
        object.__setattr__(self, "omega_hat", om)
        object.__setattr__(self, "v_hat", vh)

    @classmethod
    def from_planar(cls, w: float, vx: float, vy: float) -> "ScrewControl":
        return cls((0.0, 0.0, w), (vx, vy, 0.0), planar=True)

    @property
    def omega(self) -> np.ndarray:
        return np.array(self.omega_hat)

    @property
    def v(self) -> np.ndarray:
        return np.array(self.v_hat)

    def as_vector(self) -> np.ndarray:
        """Control coordinates: (w, vx, vy) when planar, else (omega, v)."""
        if self.planar:
            return np.array([self.omega_hat[2], self.v_hat[0], self.v_hat[1]])
        return np.concatenate([self.omega, self.v])

    def is_rotating(self) -> bool:
        return np.linalg.norm(self.omega) > 0.5


@dataclass(frozen=True)
class Pose:
    """Rigid transform (R, p); R is checked to be a rotation on construction."""

    R: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float).reshape(3, 3)
        p = np.asarray(self.p, dtype=float).reshape(3)
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-9:
            raise ValueError("R is not orthogonal within 1e-9")
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("det(R) != +1 within 1e-9")
        R.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "p", p)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def planar(cls, x: float, y: float, yaw: float) -> "Pose":
        c, s = math.cos(yaw), math.sin(yaw)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return cls(R, np.array([x, y, 0.0]))

    @property
    def yaw(self) -> float:
        return math.atan2(self.R[1, 0], self.R[0, 0])

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return np.array_equal(self.R, other.R) and np.array_equal(self.p, other.p)


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.R @ b.R, a.R @ b.p + a.p)


def invert(a: Pose) -> Pose:
    return Pose(a.R.T, -(a.R.T @ a.p))


def exp_map(u: ScrewControl, theta_step: float) -> Pose:
    """Pose reached by traveling theta_step along the screw axis u.

    R = I + sin(t)[w] + (1-cos(t))[w]^2 and
    p = (I t + (1-cos t)[w] + (t - sin t)[w]^2) v; with w = 0 this reduces
    exactly to (I, t*v).
    """
    t = float(theta_step)
    K = skew(u.omega_hat)
    K2 = K @ K
    R = np.eye(3) + math.sin(t) * K + (1.0 - math.cos(t)) * K2
    G = np.eye(3) * t + (1.0 - math.cos(t)) * K + (t - math.sin(t)) * K2
    return Pose(R, G @ u.v)


@dataclass(frozen=True)
class SymbolicPose:
    """The 12 pose entries as polynomials in the control variables.

    rotation[i][j] has degree <= 2 and position[i] degree <= 3.  Evaluating at
    a valid control (rotation part zero or unit norm) reproduces ``exp_map``;
    off that constraint surface the entries are still polynomials but no
    longer describe a rotation.
    """

    theta_step: float
    planar: bool
    rotation: tuple  # 3x3 nested tuple of Polynomial
    position: tuple  # 3 Polynomials
    num_control_vars: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "num_control_vars", 3 if self.planar else 6)

    def evaluate(self, u: ScrewControl) -> Pose:
        """Numeric pose at a control; u must satisfy the norm constraint."""
        vec = self._control_coords(u)
        R = np.array([[self.rotation[i][j].evaluate(vec) for j in range(3)] for i in range(3)])
        p = np.array([self.position[i].evaluate(vec) for i in range(3)])
        return Pose(R, p)

    def _control_coords(self, u: ScrewControl) -> np.ndarray:
        if self.planar:
            if not u.planar:
                raise ValueError("planar symbolic pose evaluated at a spatial control")
            return u.as_vector()
        return np.concatenate([u.omega, u.v])

    def rotation_vec_polys(self) -> List[Polynomial]:
        """Column-wise vectorization of the rotation entries (9 polynomials)."""
        return [self.rotation[i][j] for j in range(3) for i in range(3)]


def _skew_polys(omega: List[Polynomial]) -> List[List[Polynomial]]:
    n = omega[0].num_vars
    zero = Polynomial.zero(n)
    x, y, z = omega
    return [[zero, -z, y], [z, zero, -x], [-y, x, zero]]


def _mat_mul(A, B):
    n = A[0][0].num_vars
    return [[sum((A[i][k] * B[k][j] for k in range(3)), Polynomial.zero(n))
             for j in range(3)] for i in range(3)]


def symbolic_pose(theta_step: float, planar: bool = True) -> SymbolicPose:
    """Expand the fixed-displacement exponential map into pose polynomials.

    With t = theta_step fixed, sin(t) and cos(t) are scalars, so
    R = I + sin(t)[w] + (1-cos(t))[w]^2 is quadratic in the axis and
    p = (I t + (1-cos t)[w] + (t-sin t)[w]^2) v is cubic.
    """
    t = float(theta_step)
    if t <= 0:
        raise ValueError("theta_step must be positive")
    n = 3 if planar else 6
    zero = Polynomial.zero(n)
    one = Polynomial.constant(n, 1.0)
    if planar:
        w = Polynomial.variable(n, 0)
        omega = [zero, zero, w]
        v = [Polynomial.variable(n, 1), Polynomial.variable(n, 2), zero]
    else:
        omega = [Polynomial.variable(n, i) for i in range(3)]
        v = [Polynomial.variable(n, i) for i in range(3, 6)]

    K = _skew_polys(omega)
    K2 = _mat_mul(K, K)
    st, ct = math.sin(t), math.cos(t)

    eye = [[one if i == j else zero for j in range(3)] for i in range(3)]
    R = [[eye[i][j] + st * K[i][j] + (1.0 - ct) * K2[i][j] for j in range(3)]
         for i in range(3)]
    G = [[t * eye[i][j] + (1.0 - ct) * K[i][j] + (t - st) * K2[i][j] for j in range(3)]
         for i in range(3)]
    p = [sum((G[i][k] * v[k] for k in range(3)), zero) for i in range(3)]

    return SymbolicPose(
        theta_step=t,
        planar=planar,
        rotation=tuple(tuple(row) for row in R),
        position=tuple(p),
    )
