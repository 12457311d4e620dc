"""Lie-group math on SO(3)/SE(3).

Conventions used across the whole package:
  * twists are ordered translation-first, xi = [v; w] in R^6
  * homogeneous transforms are 4x4 with rotation R and translation p
  * Adjoint of g = (R, p) is [[R, hat(p) R], [0, R]]
  * quaternions are wxyz, scalar first, canonicalized to w >= 0
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# below this rotation magnitude the closed forms switch to their Taylor series
EPS_ANGLE = 1e-6

# relative skew-symmetry tolerance accepted by vee3 / vee6
SKEW_TOL = 1e-6


def hat3(w):
    """3-vector -> skew matrix, hat3(w) @ u == cross(w, u)."""
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def vee3(W):
    """Skew matrix -> 3-vector. Raises ValueError if W is not skew within tolerance."""
    dev = np.abs(W + W.T).max()
    if dev > SKEW_TOL * max(1.0, np.abs(W).max()):
        raise ValueError(f"matrix is not skew-symmetric (deviation {dev:.3e})")
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def hat6(xi):
    """Twist [v; w] -> 4x4 se(3) matrix [[hat3(w), v], [0, 0]]."""
    X = np.zeros((4, 4))
    X[:3, :3] = hat3(xi[3:])
    X[:3, 3] = xi[:3]
    return X


def vee6(X):
    """4x4 se(3) matrix -> twist [v; w]."""
    w = vee3(X[:3, :3])
    return np.array([X[0, 3], X[1, 3], X[2, 3], w[0], w[1], w[2]])


def exp_so3(w):
    """Rodrigues formula for exp of hat3(w).

    Falls back to the quadratic Taylor expansion below EPS_ANGLE, which is
    exact to double precision there.
    """
    th = np.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    W = hat3(w)
    if th < EPS_ANGLE:
        return np.eye(3) + W + 0.5 * (W @ W)
    a = np.sin(th) / th
    b = (1.0 - np.cos(th)) / (th * th)
    return np.eye(3) + a * W + b * (W @ W)


def exp_se3(xi):
    """Exponential of a twist: closed form R = exp(hat w), p = V(w) v.

    V(w) = I + (1-cos th)/th^2 hat(w) + (th - sin th)/th^3 hat(w)^2.
    """
    v, w = xi[:3], xi[3:]
    th = np.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    W = hat3(w)
    W2 = W @ W
    g = np.eye(4)
    if th < EPS_ANGLE:
        g[:3, :3] = np.eye(3) + W + 0.5 * W2
        V = np.eye(3) + 0.5 * W + W2 / 6.0
    else:
        s, c = np.sin(th), np.cos(th)
        g[:3, :3] = np.eye(3) + (s / th) * W + ((1.0 - c) / (th * th)) * W2
        V = np.eye(3) + ((1.0 - c) / (th * th)) * W + ((th - s) / (th ** 3)) * W2
    g[:3, 3] = V @ v
    return g


def log_so3(R):
    """Rotation matrix -> rotation vector. Diagnostics-grade, handles the pi branch.

    At exactly pi the axis sign is inherently ambiguous; either choice
    satisfies exp(log(R)) = R.
    """
    tr = np.trace(R)
    th = np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))
    if th < EPS_ANGLE:
        # theta/sin(theta) ~ 1 + th^2/6; antisymmetric part is exact enough here
        A = 0.5 * (R - R.T)
        return np.array([A[2, 1], A[0, 2], A[1, 0]]) * (1.0 + th * th / 6.0)
    if np.pi - th < 1e-4:
        # near pi the antisymmetric part vanishes; recover axis from R + I
        B = 0.5 * (R + np.eye(3))  # = axis axis^T + O(pi - th)
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / np.sqrt(B[k, k])
        axis = axis / np.linalg.norm(axis)
        # fix the sign from the largest antisymmetric component if any survives
        A = 0.5 * (R - R.T)
        a = np.array([A[2, 1], A[0, 2], A[1, 0]])
        if np.dot(a, axis) < 0.0:
            axis = -axis
        return th * axis
    A = 0.5 * (R - R.T)
    return (th / np.sin(th)) * np.array([A[2, 1], A[0, 2], A[1, 0]])


def log_se3(g):
    """Homogeneous transform -> twist [v; w] with exp_se3(log_se3(g)) = g."""
    R, p = g[:3, :3], g[:3, 3]
    w = log_so3(R)
    th = np.linalg.norm(w)
    W = hat3(w)
    if th < EPS_ANGLE:
        Vinv = np.eye(3) - 0.5 * W + (W @ W) / 12.0
    else:
        # closed-form inverse of the exp_se3 V matrix
        coef = (1.0 / (th * th)) - (1.0 + np.cos(th)) / (2.0 * th * np.sin(th))
        Vinv = np.eye(3) - 0.5 * W + coef * (W @ W)
    v = Vinv @ p
    return np.concatenate([v, w])


def adjoint(g):
    """6x6 Adjoint of a 4x4 transform: [[R, hat(p) R], [0, R]]."""
    R, p = g[:3, :3], g[:3, 3]
    A = np.zeros((6, 6))
    A[:3, :3] = R
    A[:3, 3:] = hat3(p) @ R
    A[3:, 3:] = R
    return A


def ad(xi):
    """6x6 adjoint of a twist: ad_xi = [[hat w, hat v], [0, hat w]].

    Satisfies ad(x) @ y == vee6([hat6 x, hat6 y]).
    """
    v, w = xi[:3], xi[3:]
    A = np.zeros((6, 6))
    A[:3, :3] = hat3(w)
    A[:3, 3:] = hat3(v)
    A[3:, 3:] = hat3(w)
    return A


def quat_from_rot(R):
    """Rotation matrix -> unit quaternion wxyz with w >= 0 (Shepperd's method)."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] >= R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    q = q / np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return q


def rot_from_quat(q):
    """Unit quaternion wxyz -> rotation matrix."""
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


@dataclass(frozen=True)
class Pose:
    """Rigid transform (R, p). Arrays are copied in and marked read-only."""

    R: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        p = np.array(self.p, dtype=float)
        if R.shape != (3, 3) or p.shape != (3,):
            raise ValueError(f"bad shapes R{R.shape} p{p.shape}")
        R.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "p", p)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, g) -> "Pose":
        g = np.asarray(g, dtype=float)
        if g.shape != (4, 4):
            raise ValueError(f"expected 4x4 matrix, got {g.shape}")
        return cls(g[:3, :3], g[:3, 3])

    @classmethod
    def exp(cls, xi) -> "Pose":
        return cls.from_matrix(exp_se3(np.asarray(xi, dtype=float)))

    def log(self) -> np.ndarray:
        return log_se3(self.matrix())

    def matrix(self) -> np.ndarray:
        g = np.eye(4)
        g[:3, :3] = self.R
        g[:3, 3] = self.p
        return g

    def inverse(self) -> "Pose":
        return Pose(self.R.T, -self.R.T @ self.p)

    def adjoint(self) -> np.ndarray:
        return adjoint(self.matrix())

    def __matmul__(self, other: "Pose") -> "Pose":
        return Pose(self.R @ other.R, self.R @ other.p + self.p)
