"""Task-space impedance controllers.

All controllers take the same arguments and return joint torques plus the
6-vector wrench they commanded in their working frame:

    controller(model, q, qdot, des, gains, joint=None, with_diag=False)

`des` is a DesiredState, `joint` an optional precomputed JointDynamics (the
simulator evaluates it once per integration stage and shares it), and
`with_diag=True` additionally fills a diagnostics dict with the body-frame
error metrics used by every recorder, so traces from different controllers
are directly comparable.

Controllers
-----------
gic1        model-matching law on the transported desired twist, with the
            left-invariant elastic wrench as the spring term.
gic2        gic1 plus an elastic shift of the velocity reference by
            lambda_g * f_g; reduces to gic1 exactly when lambda_g = 0.
intuitive   same structure as gic1 but the spring is the constant gain map
            K e_g; coincides with gic1 only for isotropic gains.
benchmark   fixed-frame law with spatial-twist dynamics, the cross-product
            orientation error, and desired rates [pd_dot; omega_d]; the
            classical non-invariant design.
pd          spring-damper wrench only, no model matching, no gravity term.
"""
from __future__ import annotations

import numpy as np

from . import geometry_errors as ge
from .dynamics import JointDynamics, TaskDynamics, joint_dynamics, task_dynamics
from .geometry_errors import DesiredState, Gains
from .kinematics import RobotModel, fk
from .se3 import Pose


class ControlOutput:
    """Torque command plus the task wrench and optional diagnostics."""

    __slots__ = ("tau", "wrench", "diag")

    def __init__(self, tau: np.ndarray, wrench: np.ndarray, diag: dict | None = None):
        self.tau = tau
        self.wrench = wrench
        self.diag = diag


def _model_matching_wrench(Mt, Ct, Gt, accel, vel, spring, Kd, ev):
    # single assembly point shared by every model-matching law, so that
    # algebraically identical parameter choices give identical floats
    return Mt @ accel + Ct @ vel + Gt - spring - Kd @ ev


def _task_state(model, q, qdot, joint, frame="body"):
    jd = joint if joint is not None else joint_dynamics(model, q, qdot)
    td = task_dynamics(model, q, qdot, frame=frame, joint=jd)
    g = fk(model, q)
    Vb = jd.J @ qdot
    return jd, td, g, Vb


def _body_diagnostics(model, q, qdot, des, gains, jd, g, Vb,
                      task: TaskDynamics | None = None) -> dict:
    """Body-frame error metrics shared by all controllers' recorders."""
    td = task if task is not None and task.frame == "body" else \
        task_dynamics(model, q, qdot, frame="body", joint=jd)
    gd = des.pose
    eg = ge.error_vector(g, gd)
    Vstar = ge.transported_desired_twist(g, gd, des.body_twist)
    eV = Vb - Vstar
    fg = ge.elastic_wrench(g, gd, gains)
    Psi = ge.error_function(g, gd)
    P = ge.potential(g, gd, gains)
    K = 0.5 * eV @ td.M @ eV
    ebar = eV + gains.lambda_g * fg
    return {
        "Psi": Psi,
        "Phi": Psi + eV @ eV,
        "P": P,
        "K": K,
        "V": P + K,
        "W": P + 0.5 * ebar @ td.M @ ebar,
        "e_g": eg,
        "e_V": eV,
        "f_g": fg,
    }


def gic1(model: RobotModel, q, qdot, des: DesiredState, gains: Gains,
         joint: JointDynamics | None = None, with_diag: bool = False) -> ControlOutput:
    """Left-invariant impedance law in the body frame.

    Matches the task model along the transported desired motion and closes
    the loop with the elastic wrench f_g and damping on e_V:

        F = Mt Vdot_d* + Ct V_d* + Gt - f_g - Kd e_V,   tau = J_b^T F
    """
    jd, td, g, Vb = _task_state(model, q, qdot, joint)
    gd = des.pose
    Vstar = ge.transported_desired_twist(g, gd, des.body_twist)
    Vstar_dot = ge.transported_desired_twist_rate(g, gd, Vb, des.body_twist, des.body_accel)
    fg = ge.elastic_wrench(g, gd, gains)
    eV = Vb - Vstar
    wrench = _model_matching_wrench(td.M, td.C, td.G, Vstar_dot, Vstar, fg, gains.Kd, eV)
    tau = td.J.T @ wrench
    diag = _body_diagnostics(model, q, qdot, des, gains, jd, g, Vb, td) if with_diag else None
    return ControlOutput(tau, wrench, diag)


def gic2(model: RobotModel, q, qdot, des: DesiredState, gains: Gains,
         joint: JointDynamics | None = None, with_diag: bool = False) -> ControlOutput:
    """gic1 with the velocity reference shifted along the elastic wrench.

    The reference twist becomes Vbar_d = V_d* - lambda_g f_g, its consistent
    rate uses d/dt f_g = B_K e_V, and damping acts on ebar = e_V + lambda_g f_g.
    The extra term strictly increases the dissipation rate by
    lambda_g |f_g|^2; with lambda_g = 0 every intermediate equals gic1's.
    """
    jd, td, g, Vb = _task_state(model, q, qdot, joint)
    gd = des.pose
    lam = gains.lambda_g
    Vstar = ge.transported_desired_twist(g, gd, des.body_twist)
    Vstar_dot = ge.transported_desired_twist_rate(g, gd, Vb, des.body_twist, des.body_accel)
    fg = ge.elastic_wrench(g, gd, gains)
    eV = Vb - Vstar
    BK = ge.stiffness_jacobian(g, gd, gains)
    Vbar = Vstar - lam * fg
    Vbar_dot = Vstar_dot - lam * (BK @ eV)
    ebar = eV + lam * fg
    wrench = _model_matching_wrench(td.M, td.C, td.G, Vbar_dot, Vbar, fg, gains.Kd, ebar)
    tau = td.J.T @ wrench
    diag = _body_diagnostics(model, q, qdot, des, gains, jd, g, Vb, td) if with_diag else None
    return ControlOutput(tau, wrench, diag)


def intuitive(model: RobotModel, q, qdot, des: DesiredState, gains: Gains,
              joint: JointDynamics | None = None, with_diag: bool = False) -> ControlOutput:
    """Constant-gain variant: spring K e_g instead of the elastic wrench."""
    jd, td, g, Vb = _task_state(model, q, qdot, joint)
    gd = des.pose
    Vstar = ge.transported_desired_twist(g, gd, des.body_twist)
    Vstar_dot = ge.transported_desired_twist_rate(g, gd, Vb, des.body_twist, des.body_accel)
    spring = gains.K_block @ ge.error_vector(g, gd)
    eV = Vb - Vstar
    wrench = _model_matching_wrench(td.M, td.C, td.G, Vstar_dot, Vstar, spring, gains.Kd, eV)
    tau = td.J.T @ wrench
    diag = _body_diagnostics(model, q, qdot, des, gains, jd, g, Vb, td) if with_diag else None
    return ControlOutput(tau, wrench, diag)


def benchmark(model: RobotModel, q, qdot, des: DesiredState, gains: Gains,
              joint: JointDynamics | None = None, with_diag: bool = False) -> ControlOutput:
    """Fixed-frame impedance law; deliberately not left-invariant.

    The dynamics model, commanded wrench, and damping all live in the fixed
    frame (spatial twists), while the spring acts on the tool-point errors:
    position difference and the column cross-product rotational error. The
    desired rates are the hybrid pair [pd_dot; omega_d], so the damped
    quantity mixes frames by construction; the closed loop depends on where
    the fixed frame sits. Serves as the comparison baseline.
    """
    jd, td, g, Vb = _task_state(model, q, qdot, joint, frame="spatial")
    Vs = td.J @ qdot
    es, eVs = ge.spatial_errors(g, des.pose, Vs, des.hybrid_twist)
    wrench = _model_matching_wrench(td.M, td.C, td.G, des.hybrid_accel, Vs,
                                    gains.K_block @ es, gains.Kd, eVs)
    tau = td.J.T @ wrench
    diag = _body_diagnostics(model, q, qdot, des, gains, jd, g, Vb) if with_diag else None
    return ControlOutput(tau, wrench, diag)


def pd(model: RobotModel, q, qdot, des: DesiredState, gains: Gains,
       joint: JointDynamics | None = None, with_diag: bool = False) -> ControlOutput:
    """Spring-damper wrench only; no model matching, no gravity term."""
    jd = joint if joint is not None else joint_dynamics(model, q, qdot)
    g = fk(model, q)
    Vb = jd.J @ qdot
    gd = des.pose
    eV = Vb - ge.transported_desired_twist(g, gd, des.body_twist)
    wrench = -(gains.K_block @ ge.error_vector(g, gd)) - gains.Kd @ eV
    tau = jd.J.T @ wrench
    diag = _body_diagnostics(model, q, qdot, des, gains, jd, g, Vb) if with_diag else None
    return ControlOutput(tau, wrench, diag)


CONTROLLERS = {
    "gic1": gic1,
    "gic2": gic2,
    "intuitive": intuitive,
    "benchmark": benchmark,
    "pd": pd,
}


def get_controller(name: str):
    try:
        return CONTROLLERS[name]
    except KeyError:
        raise ValueError(f"unknown controller {name!r}; choose from {sorted(CONTROLLERS)}") from None
