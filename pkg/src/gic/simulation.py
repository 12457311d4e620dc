"""Deterministic closed-loop simulation.

Fixed-step classical RK4 on the joint state (q, qdot); the controller is
re-evaluated at every integration stage. All task-space quantities are
recomputed from q at each record, so poses never drift off the group. Runs
are seed-free and bit-reproducible.

Also houses the numerical verification instruments used by the test suite
and the `verify` CLI command:

* lyapunov_residuals: central micro-step time derivative of the recorded
  Lyapunov candidates along the closed-loop flow, compared against the
  closed-form decay rates -e_V^T Kd e_V (and the shifted variant).
* rate_identity_residuals: frozen-velocity geodesic-flow derivatives of the
  potential and the elastic wrench, compared against f_g . e_V and B_K e_V.

Both instruments differentiate at the recorded states with step h ~ 1e-6,
far below the integrator step, so their truncation error (~1e-9) does not
mask implementation errors at the tolerances under test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import controllers as _ctl
from . import geometry_errors as ge
from .controllers import get_controller
from .dynamics import NearSingularJacobian, forward_dynamics, joint_dynamics
from .geometry_errors import DesiredState, Gains
from .kinematics import RobotModel, fk
from .se3 import Pose, quat_from_rot

# slack when mapping continuous time onto step indices, well under any dt in use
_TIME_EPS = 1e-9


class JointState(NamedTuple):
    q: np.ndarray
    qdot: np.ndarray


class RegulationWaypoints:
    """Piecewise-constant desired poses, zero desired rates throughout.

    Waypoint i is active on [t_i, t_{i+1}); the last one holds forever.
    """

    piecewise_constant = True

    def __init__(self, times, poses):
        times = [float(t) for t in times]
        poses = list(poses)
        if len(times) != len(poses) or not times:
            raise ValueError("need one start time per waypoint")
        if times[0] != 0.0:
            raise ValueError("first waypoint must start at t = 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("waypoint start times must be strictly increasing")
        self.times = tuple(times)
        self.poses = tuple(poses)

    @property
    def switch_times(self):
        return self.times[1:]

    def desired(self, t: float) -> DesiredState:
        if t < -_TIME_EPS:
            raise ValueError(f"t = {t} out of range")
        i = 0
        for j, tj in enumerate(self.times):
            if t >= tj - _TIME_EPS:
                i = j
        return DesiredState.rest(self.poses[i])


class SinusoidTrack:
    """Closed-form sinusoidal position track with a constant orientation.

    p_d(t) = offset + amplitude * sin(omega t + phase), elementwise, with
    analytic first and second derivatives; R_d(t) = R0.
    """

    piecewise_constant = False
    switch_times = ()

    def __init__(self, offset, amplitude, omega, phase, rotation):
        self.offset = np.asarray(offset, float).reshape(3)
        self.amplitude = np.asarray(amplitude, float).reshape(3)
        self.omega = np.asarray(omega, float).reshape(3)
        self.phase = np.asarray(phase, float).reshape(3)
        self.rotation = np.asarray(rotation, float).reshape(3, 3)

    def position(self, t: float) -> np.ndarray:
        return self.offset + self.amplitude * np.sin(self.omega * t + self.phase)

    def velocity(self, t: float) -> np.ndarray:
        return self.amplitude * self.omega * np.cos(self.omega * t + self.phase)

    def acceleration(self, t: float) -> np.ndarray:
        return -self.amplitude * self.omega ** 2 * np.sin(self.omega * t + self.phase)

    def desired(self, t: float) -> DesiredState:
        if t < -_TIME_EPS:
            raise ValueError(f"t = {t} out of range")
        R0 = self.rotation
        pd_dot = self.velocity(t)
        pd_ddot = self.acceleration(t)
        zero = np.zeros(3)
        # constant R_d: the body twist is [R0^T pd_dot; 0]
        Vd = np.concatenate([R0.T @ pd_dot, zero])
        Ad = np.concatenate([R0.T @ pd_ddot, zero])
        hyb = np.concatenate([pd_dot, zero])
        hyb_dot = np.concatenate([pd_ddot, zero])
        return DesiredState(Pose(R0, self.position(t)), Vd, Ad, hyb, hyb_dot)


class _FrozenTrajectory:
    """Holds one DesiredState for all t; used by the residual instruments to
    differentiate inside a waypoint segment without crossing a switch."""

    piecewise_constant = True
    switch_times = ()

    def __init__(self, des: DesiredState):
        self._des = des

    def desired(self, t: float) -> DesiredState:
        return self._des


def desired_state_at(trajectory, t: float) -> DesiredState:
    if t < -_TIME_EPS:
        raise ValueError(f"t = {t} out of range")
    return trajectory.desired(t)


@dataclass(frozen=True)
class Scenario:
    name: str
    model: RobotModel
    trajectory: object
    gains: Gains
    q0: np.ndarray
    qdot0: np.ndarray = None
    duration: float = 10.0
    dt: float = 1e-3
    controller: str = "gic1"
    external_wrench: np.ndarray = None

    def __post_init__(self):
        n = self.model.n
        q0 = np.asarray(self.q0, float).reshape(n)
        qd0 = (np.zeros(n) if self.qdot0 is None
               else np.asarray(self.qdot0, float).reshape(n))
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "qdot0", qd0)
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must cover at least one step")
        if self.external_wrench is not None:
            W = np.asarray(self.external_wrench, float).reshape(6)
            object.__setattr__(self, "external_wrench", None if not W.any() else W)

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)


@dataclass
class Trace:
    """Per-step records of one closed-loop run."""

    scenario: Scenario
    t: np.ndarray        # (N,)
    q: np.ndarray        # (N, n)
    qdot: np.ndarray     # (N, n)
    p: np.ndarray        # (N, 3) tool position
    quat: np.ndarray     # (N, 4) tool orientation, unit quaternion wxyz
    p_d: np.ndarray      # (N, 3) desired position (for the RMS summary)
    Psi: np.ndarray      # (N,)
    Phi: np.ndarray      # (N,)  Psi + |e_V|^2
    P: np.ndarray        # (N,)
    K: np.ndarray        # (N,)
    V_lyap: np.ndarray   # (N,)
    W_lyap: np.ndarray   # (N,)
    e_g: np.ndarray      # (N, 6)
    e_V: np.ndarray      # (N, 6)
    f_g: np.ndarray      # (N, 6)
    tau: np.ndarray      # (N, n)

    def __len__(self):
        return self.t.shape[0]

    def summary(self) -> dict:
        """RMS metrics per Cartesian axis plus RMS(Psi) and, for runs against
        a time-varying trajectory, RMS(Phi)."""
        err = self.p - self.p_d
        out = {
            "x": rms(err[:, 0]),
            "y": rms(err[:, 1]),
            "z": rms(err[:, 2]),
            "Psi": rms(self.Psi),
        }
        if not self.scenario.trajectory.piecewise_constant:
            out["Phi"] = rms(self.Phi)
        return out


def rms(series) -> float:
    a = np.asarray(series, float)
    if a.size == 0:
        raise ValueError("rms of empty series")
    return float(np.sqrt(np.mean(a * a)))


def _deriv(model, scenario, controller_fn, t, q, qd, joint=None, tau=None):
    jd = joint if joint is not None else joint_dynamics(model, q, qd)
    if tau is None:
        des = desired_state_at(scenario.trajectory, t)
        tau = controller_fn(model, q, qd, des, scenario.gains, joint=jd).tau
    qdd = forward_dynamics(model, q, qd, tau,
                           external_wrench=scenario.external_wrench, joint=jd)
    return qd, qdd


def rk4_step(model, state, controller, scenario, t, dt, _stage1=None) -> JointState:
    """One classical RK4 step of the closed loop from (q, qdot) at time t.

    The controller runs at every stage state. `_stage1` optionally carries a
    precomputed (JointDynamics, tau) for the first stage so callers that just
    evaluated the controller at (t, q, qdot) do not pay for it twice.
    """
    q, qd = state
    jd1, tau1 = _stage1 if _stage1 is not None else (None, None)
    k1q, k1v = _deriv(model, scenario, controller, t, q, qd, joint=jd1, tau=tau1)
    h2 = 0.5 * dt
    k2q, k2v = _deriv(model, scenario, controller, t + h2, q + h2 * k1q, qd + h2 * k1v)
    k3q, k3v = _deriv(model, scenario, controller, t + h2, q + h2 * k2q, qd + h2 * k2v)
    k4q, k4v = _deriv(model, scenario, controller, t + dt, q + dt * k3q, qd + dt * k3v)
    s = dt / 6.0
    return JointState(q + s * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
                      qd + s * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))


def run_scenario(scenario: Scenario) -> Trace:
    """Integrate the scenario and record every step (floor(T/dt) + 1 rows)."""
    model = scenario.model
    controller = get_controller(scenario.controller)
    n = model.n
    dt = scenario.dt
    nsteps = int(math.floor(scenario.duration / dt + _TIME_EPS))
    N = nsteps + 1

    rec = {name: np.empty(shape) for name, shape in [
        ("t", (N,)), ("q", (N, n)), ("qdot", (N, n)), ("p", (N, 3)),
        ("quat", (N, 4)), ("p_d", (N, 3)), ("Psi", (N,)), ("Phi", (N,)),
        ("P", (N,)), ("K", (N,)), ("V_lyap", (N,)), ("W_lyap", (N,)),
        ("e_g", (N, 6)), ("e_V", (N, 6)), ("f_g", (N, 6)), ("tau", (N, n)),
    ]}

    q = scenario.q0.copy()
    qd = scenario.qdot0.copy()
    for k in range(N):
        t = k * dt
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            raise RuntimeError(f"non-finite state at step {k} (t = {t:.6f} s)")
        des = desired_state_at(scenario.trajectory, t)
        try:
            jd = joint_dynamics(model, q, qd)
            out = controller(model, q, qd, des, scenario.gains, joint=jd, with_diag=True)
        except NearSingularJacobian as e:
            raise NearSingularJacobian(
                f"{e} at step {k} (t = {t:.6f} s) of scenario {scenario.name!r}") from e
        g = fk(model, q)
        d = out.diag
        rec["t"][k] = t
        rec["q"][k] = q
        rec["qdot"][k] = qd
        rec["p"][k] = g.p
        rec["quat"][k] = quat_from_rot(g.R)
        rec["p_d"][k] = des.pose.p
        for name in ("Psi", "Phi", "P", "K"):
            rec[name][k] = d[name]
        rec["V_lyap"][k] = d["V"]
        rec["W_lyap"][k] = d["W"]
        rec["e_g"][k] = d["e_g"]
        rec["e_V"][k] = d["e_V"]
        rec["f_g"][k] = d["f_g"]
        rec["tau"][k] = out.tau
        if k == nsteps:
            break
        q, qd = rk4_step(model, JointState(q, qd), controller, scenario, t, dt,
                         _stage1=(jd, out.tau))
    return Trace(scenario=scenario, **rec)


# ---------------------------------------------------------------------------
# verification instruments
# ---------------------------------------------------------------------------

def _candidate_values(model, q, qd, des, gains):
    jd = joint_dynamics(model, q, qd)
    g = fk(model, q)
    d = _ctl._body_diagnostics(model, q, qd, des, gains, jd, g, jd.J @ qd)
    return d["V"], d["W"]


def lyapunov_residuals(trace: Trace, h: float = 2e-6, stride: int = 1) -> dict:
    """Max residuals of the closed-loop decay identities along a recorded run.

        V_dot = -e_V^T Kd e_V
        W_dot = -ebar^T Kd ebar - lambda_g |f_g|^2,  ebar = e_V + lambda_g f_g

    V_dot and W_dot come from a fourth-order five-point stencil over RK4
    micro-steps of size +-h and +-2h from each recorded state. A plain
    central difference cannot serve both kinds of hard sample at once:
    post-switch transients are stiff (large V''', wants small h) while
    transients that pass close to a kinematic singularity inflate the task
    mass matrix (top eigenvalue ~ 1/sigma_min(J)^2), turning V into a
    cancellation-prone sum whose roundoff grows as h shrinks. The high-order
    stencil at h ~ 2e-6 holds both families near 1e-5. For piecewise-constant trajectories the desired pose
    is held at its recorded value so no window straddles a waypoint switch
    (inside a segment that is the exact flow).
    """
    sc = trace.scenario
    model = sc.model
    controller = get_controller(sc.controller)
    gains = sc.gains
    Kd, lam = gains.Kd, gains.lambda_g
    res_v = 0.0
    res_w = 0.0
    for k in range(0, len(trace), stride):
        t = float(trace.t[k])
        q = trace.q[k]
        qd = trace.qdot[k]
        if sc.trajectory.piecewise_constant:
            micro_sc = sc.with_overrides(
                trajectory=_FrozenTrajectory(desired_state_at(sc.trajectory, t)))
        else:
            micro_sc = sc
        state = JointState(q, qd)

        def value_at(s):
            qs, qds = rk4_step(model, state, controller, micro_sc, t, s)
            return _candidate_values(model, qs, qds,
                                     desired_state_at(micro_sc.trajectory, t + s), gains)

        if t - 2 * h >= 0.0:
            (v1, w1), (v2, w2) = value_at(h), value_at(2 * h)
            (vm1, wm1), (vm2, wm2) = value_at(-h), value_at(-2 * h)
            v_dot = (-v2 + 8 * v1 - 8 * vm1 + vm2) / (12 * h)
            w_dot = (-w2 + 8 * w1 - 8 * wm1 + wm2) / (12 * h)
        else:
            # lower edge: fourth-order forward stencil, anchored on the
            # recorded values at t
            vals = [value_at(i * h) for i in (1, 2, 3, 4)]
            v_dot = (-25 * trace.V_lyap[k] + 48 * vals[0][0] - 36 * vals[1][0]
                     + 16 * vals[2][0] - 3 * vals[3][0]) / (12 * h)
            w_dot = (-25 * trace.W_lyap[k] + 48 * vals[0][1] - 36 * vals[1][1]
                     + 16 * vals[2][1] - 3 * vals[3][1]) / (12 * h)
        eV = trace.e_V[k]
        fg = trace.f_g[k]
        ebar = eV + lam * fg
        res_v = max(res_v, abs(v_dot + eV @ Kd @ eV))
        res_w = max(res_w, abs(w_dot + ebar @ Kd @ ebar + lam * (fg @ fg)))
    return {"V": res_v, "W": res_w}


def rate_identity_residuals(trace: Trace, h: float = 1e-6, stride: int = 1) -> dict:
    """Max residuals of dP/dt = f_g . e_V and d(f_g)/dt = B_K e_V along a run.

    Derivatives are taken along the frozen-velocity geodesic flow
    g exp(h Vb^), g_d exp(h Vd^), which shares the instantaneous velocities
    of the true flow, so the comparison is exact up to O(h^2).
    """
    sc = trace.scenario
    model = sc.model
    gains = sc.gains
    res_p = 0.0
    res_f = 0.0
    for k in range(0, len(trace), stride):
        t = float(trace.t[k])
        q = trace.q[k]
        qd = trace.qdot[k]
        des = desired_state_at(sc.trajectory, t)
        g = fk(model, q)
        Vb = joint_dynamics(model, q, qd).J @ qd
        gd, Vd = des.pose, des.body_twist

        def pots(s):
            gs = g @ Pose.exp(Vb * s)
            gds = gd @ Pose.exp(Vd * s)
            return (ge.potential(gs, gds, gains), ge.elastic_wrench(gs, gds, gains))

        Pp, fp = pots(h)
        Pm, fm = pots(-h)
        eV = ge.velocity_error(g, gd, Vb, Vd)
        fg = ge.elastic_wrench(g, gd, gains)
        BK = ge.stiffness_jacobian(g, gd, gains)
        res_p = max(res_p, abs((Pp - Pm) / (2 * h) - fg @ eV))
        res_f = max(res_f, np.abs((fp - fm) / (2 * h) - BK @ eV).max())
    return {"dP": res_p, "df_g": res_f}
