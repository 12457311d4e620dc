"""Product-of-exponentials kinematics for open chains.

A robot is a list of joint twists in the space frame at the zero
configuration plus the zero-configuration tool and link-COM frames:

    g(q) = exp(hat xi_1 q_1) ... exp(hat xi_n q_n) g(0)

Body Jacobian columns are Ad_{D_i^-1} xi_i with D_i the partial product from
joint i outward; its time derivative follows from the chain's bracket
structure without finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .se3 import Pose, ad, adjoint

_core = _backend.get_backend()


def _frozen(a, shape):
    a = np.ascontiguousarray(a, dtype=float)
    if a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RobotModel:
    """Kinematic and inertial description of an open chain.

    xi:      (n, 6) joint twists [v; w], space frame, zero configuration
    g0:      (4, 4) tool frame at q = 0
    com0:    (n, 4, 4) link COM frames at q = 0; link i moves with joints <= i+1
    mass:    (n,) link masses
    inertia: (n, 3, 3) rotational inertia about each COM, COM axes
    gravity: (3,) gravitational acceleration in the space frame
    """

    name: str
    xi: np.ndarray
    g0: np.ndarray
    com0: np.ndarray
    mass: np.ndarray
    inertia: np.ndarray
    gravity: np.ndarray
    description: str = ""

    def __post_init__(self):
        n = np.asarray(self.xi).shape[0]
        object.__setattr__(self, "xi", _frozen(self.xi, (n, 6)))
        object.__setattr__(self, "g0", _frozen(self.g0, (4, 4)))
        object.__setattr__(self, "com0", _frozen(self.com0, (n, 4, 4)))
        object.__setattr__(self, "mass", _frozen(self.mass, (n,)))
        object.__setattr__(self, "inertia", _frozen(self.inertia, (n, 3, 3)))
        object.__setattr__(self, "gravity", _frozen(self.gravity, (3,)))
        if np.any(np.asarray(self.mass) < 0.0):
            raise ValueError("negative link mass")

    @property
    def n(self) -> int:
        return self.xi.shape[0]


def fk(model: RobotModel, q) -> Pose:
    """Tool pose at configuration q."""
    return Pose.from_matrix(_core.fk(model.xi, model.g0, np.asarray(q, dtype=float)))


def fk_matrix(model: RobotModel, q) -> np.ndarray:
    """Tool pose as a raw 4x4 matrix (hot-path variant of fk)."""
    return _core.fk(model.xi, model.g0, np.asarray(q, dtype=float))


def link_com_poses(model: RobotModel, q) -> np.ndarray:
    """(n, 4, 4) poses of all link COM frames."""
    return _core.link_com_fk(model.xi, model.com0, np.asarray(q, dtype=float))


def body_jacobian(model: RobotModel, q) -> np.ndarray:
    """(6, n) body Jacobian of the tool frame: V^b = J_b(q) qdot."""
    return _core.body_jacobian(model.xi, model.g0, np.asarray(q, dtype=float))


def body_jacobian_dot(model: RobotModel, q, qdot) -> np.ndarray:
    """(6, n) time derivative of the body Jacobian."""
    return _core.body_jacobian_dot(model.xi, model.g0,
                                   np.asarray(q, dtype=float),
                                   np.asarray(qdot, dtype=float))


def spatial_jacobian(model: RobotModel, q) -> np.ndarray:
    """(6, n) spatial Jacobian: J_s = Ad_{g(q)} J_b."""
    q = np.asarray(q, dtype=float)
    return adjoint(_core.fk(model.xi, model.g0, q)) @ _core.body_jacobian(model.xi, model.g0, q)


def spatial_jacobian_dot(model: RobotModel, q, qdot) -> np.ndarray:
    """(6, n) time derivative of the spatial Jacobian.

    From J_s = Ad_g J_b and d/dt Ad_g = Ad_g ad_{V^b}:
    J_s_dot = Ad_g (ad_{V^b} J_b + J_b_dot).
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    Jb = _core.body_jacobian(model.xi, model.g0, q)
    Jbd = _core.body_jacobian_dot(model.xi, model.g0, q, qdot)
    Vb = Jb @ qdot
    return adjoint(_core.fk(model.xi, model.g0, q)) @ (ad(Vb) @ Jb + Jbd)


def body_twist(model: RobotModel, q, qdot) -> np.ndarray:
    """(6,) body twist of the tool frame."""
    return body_jacobian(model, q) @ np.asarray(qdot, dtype=float)


def spatial_twist(model: RobotModel, q, qdot) -> np.ndarray:
    """(6,) spatial twist of the tool frame."""
    return spatial_jacobian(model, q) @ np.asarray(qdot, dtype=float)


def poe_from_standard_dh(d, a, alpha, theta_offset=None):
    """Convert a standard DH table to PoE data: (xi, g0).

    Row i is the transform Rz(theta_i + offset_i) Tz(d_i) Tx(a_i) Rx(alpha_i).
    Joint i rotates about the z axis of frame i-1 through its origin, so
    xi_i = [-w x o; w] with w, o taken from the chained zero-configuration
    frames.
    """
    d = np.asarray(d, dtype=float)
    a = np.asarray(a, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    n = len(d)
    off = np.zeros(n) if theta_offset is None else np.asarray(theta_offset, dtype=float)
    xi = np.zeros((n, 6))
    g = np.eye(4)
    for i in range(n):
        w = g[:3, 2]
        o = g[:3, 3]
        xi[i, :3] = -np.cross(w, o)
        xi[i, 3:] = w
        ct, st = np.cos(off[i]), np.sin(off[i])
        ca, sa = np.cos(alpha[i]), np.sin(alpha[i])
        A = np.array([
            [ct, -st * ca, st * sa, a[i] * ct],
            [st, ct * ca, -ct * sa, a[i] * st],
            [0.0, sa, ca, d[i]],
            [0.0, 0.0, 0.0, 1.0],
        ])
        g = g @ A
    return xi, g
