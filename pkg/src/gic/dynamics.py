"""Joint-space and task-space manipulator dynamics.

Joint-space model: M(q) qdd + C(q, qdot) qdot + G(q) = tau + tau_ext, with M
assembled from link-COM body Jacobians, C from finite-difference Christoffel
symbols (so Mdot - 2C is skew-symmetric), and G from the analytic gradient of
the gravitational potential.

Task-space model (for a 6-DOF tool frame; body, spatial, or world):

    M_t = Jp^T M Jp,  C_t = Jp^T (C - M Jp J_dot) Jp,  G_t = Jp^T G

with Jp the pseudoinverse of the chosen Jacobian (the plain inverse when the
chain has exactly six joints). "body" and "spatial" pair with the twist
conventions in the kinematics module; "world" pairs tool-point translational
velocity with angular velocity, both resolved along the fixed-frame axes
(the coordinates conventional Cartesian impedance laws are written in). A
conditioning guard rejects states where the Jacobian is numerically singular
rather than returning garbage.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .kinematics import RobotModel
from .se3 import ad, adjoint, hat3

_core = _backend.get_backend()

# 2-norm condition number of the Jacobian above which task-space dynamics refuse to evaluate
COND_LIMIT = 1e8


class NearSingularJacobian(RuntimeError):
    """Raised when the task Jacobian is too ill-conditioned to invert."""


@dataclass(frozen=True)
class JointDynamics:
    """One fused evaluation of the joint-space terms at (q, qdot)."""

    M: np.ndarray       # (n, n)
    C: np.ndarray       # (n, n)
    G: np.ndarray       # (n,)
    J: np.ndarray       # (6, n) body Jacobian
    J_dot: np.ndarray   # (6, n)


@dataclass(frozen=True)
class TaskDynamics:
    """Task-space terms in the chosen frame ('body', 'spatial', or 'world')."""

    M: np.ndarray       # (6, 6)
    C: np.ndarray       # (6, 6)
    G: np.ndarray       # (6,)
    J: np.ndarray       # (6, n)
    J_dot: np.ndarray   # (6, n)
    J_pinv: np.ndarray  # (n, 6)
    frame: str


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    return _core.mass_matrix(model.xi, model.com0, model.mass, model.inertia,
                             np.asarray(q, dtype=float))


def coriolis_matrix(model: RobotModel, q, qdot) -> np.ndarray:
    return _core.coriolis_matrix(model.xi, model.com0, model.mass, model.inertia,
                                 np.asarray(q, dtype=float), np.asarray(qdot, dtype=float))


def gravity_vector(model: RobotModel, q) -> np.ndarray:
    return _core.gravity_vector(model.xi, model.com0, model.mass, model.gravity,
                                np.asarray(q, dtype=float))


def potential_energy(model: RobotModel, q) -> float:
    return _core.potential_energy(model.xi, model.com0, model.mass, model.gravity,
                                  np.asarray(q, dtype=float))


def kinetic_energy(model: RobotModel, q, qdot) -> float:
    qdot = np.asarray(qdot, dtype=float)
    return 0.5 * float(qdot @ mass_matrix(model, q) @ qdot)


def joint_dynamics(model: RobotModel, q, qdot) -> JointDynamics:
    """Fused evaluation of (M, C, G, J_b, J_b_dot); the simulator hot path."""
    M, C, G, J, Jd = _core.joint_dynamics(model.xi, model.g0, model.com0, model.mass,
                                          model.inertia, model.gravity,
                                          np.asarray(q, dtype=float),
                                          np.asarray(qdot, dtype=float))
    return JointDynamics(M, C, G, J, Jd)


def task_dynamics(model: RobotModel, q, qdot, frame: str = "body",
                  joint: JointDynamics | None = None) -> TaskDynamics:
    """Task-space mass/Coriolis/gravity for the tool frame.

    Passing a precomputed JointDynamics avoids re-evaluating the joint terms.
    Raises NearSingularJacobian when cond(J) exceeds COND_LIMIT.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    if joint is None:
        joint = joint_dynamics(model, q, qdot)
    if frame == "body":
        J, J_dot = joint.J, joint.J_dot
    elif frame == "spatial":
        Ad_g = adjoint(_core.fk(model.xi, model.g0, q))
        J = Ad_g @ joint.J
        J_dot = Ad_g @ (ad(joint.J @ qdot) @ joint.J + joint.J_dot)
    elif frame == "world":
        # block-orthogonal axis change: [pdot; omega_world] = Q J_b qdot,
        # Qdot = Q blkdiag(what_b, what_b) since Rdot = R what_b
        R = _core.fk(model.xi, model.g0, q)[:3, :3]
        Q = np.zeros((6, 6))
        Q[:3, :3] = R
        Q[3:, 3:] = R
        wb_hat = hat3(joint.J[3:] @ qdot)
        spin = np.zeros((6, 6))
        spin[:3, :3] = wb_hat
        spin[3:, 3:] = wb_hat
        J = Q @ joint.J
        J_dot = Q @ (spin @ joint.J + joint.J_dot)
    else:
        raise ValueError(f"frame must be 'body', 'spatial', or 'world', got {frame!r}")

    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    cond = np.inf if s[-1] == 0.0 else s[0] / s[-1]
    if cond > COND_LIMIT:
        raise NearSingularJacobian(
            f"{frame} Jacobian condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    J_pinv = (Vt.T / s) @ U.T

    Mt = J_pinv.T @ joint.M @ J_pinv
    Ct = J_pinv.T @ (joint.C - joint.M @ (J_pinv @ J_dot)) @ J_pinv
    Gt = J_pinv.T @ joint.G
    return TaskDynamics(Mt, Ct, Gt, J, J_dot, J_pinv, frame)


def forward_dynamics(model: RobotModel, q, qdot, tau, external_wrench=None,
                     joint: JointDynamics | None = None) -> np.ndarray:
    """Joint accelerations from applied torques and an optional body-frame tool wrench."""
    qdot = np.asarray(qdot, dtype=float)
    if joint is None:
        joint = joint_dynamics(model, q, qdot)
    rhs = np.asarray(tau, dtype=float) - joint.C @ qdot - joint.G
    if external_wrench is not None:
        rhs = rhs + joint.J.T @ np.asarray(external_wrench, dtype=float)
    return np.linalg.solve(joint.M, rhs)


def inverse_dynamics(model: RobotModel, q, qdot, qdd) -> np.ndarray:
    """Torques that realize qdd at (q, qdot): M qdd + C qdot + G."""
    qdot = np.asarray(qdot, dtype=float)
    jd = joint_dynamics(model, q, qdot)
    return jd.M @ np.asarray(qdd, dtype=float) + jd.C @ qdot + jd.G
