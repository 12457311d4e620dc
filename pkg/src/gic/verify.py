"""Numerical verification suite for the installed build.

Each check exercises one structural identity of the toolkit end to end:
frame invariance of the error function, gradient consistency of the spring
terms, passivity of the task-space dynamics, and the closed-loop energy
decay identities along full simulated runs. All randomness is seeded, so a
verification run is deterministic for a given build.

The suite backs the `gic verify` command; each check returns a named result
with the measured residual and its tolerance so failures point at the
violated identity rather than at a test file.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import dynamics as dyn
from . import geometry_errors as ge
from .config import load_scenario
from .kinematics import body_jacobian
from .se3 import Pose
from .simulation import lyapunov_residuals, rate_identity_residuals, run_scenario


class CheckResult(NamedTuple):
    name: str
    ok: bool
    measured: float
    tolerance: float
    note: str = ""

    def line(self) -> str:
        flag = "ok  " if self.ok else "FAIL"
        note = f"  ({self.note})" if self.note else ""
        return f"{flag}  {self.name:<28s} {self.measured:.3e} < {self.tolerance:.0e}{note}"


def _random_pose(rng, rot_scale=1.5, pos_scale=0.8) -> Pose:
    xi = np.concatenate([rng.uniform(-pos_scale, pos_scale, 3),
                         rng.uniform(-rot_scale, rot_scale, 3)])
    return Pose.exp(xi)


def check_left_invariance(samples: int = 1000) -> list[CheckResult]:
    """Error function unchanged by a common left transform; a common right
    transform is not a symmetry and must move the value for the witness pair."""
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(samples):
        g, gd, gl = (_random_pose(rng) for _ in range(3))
        worst = max(worst, abs(ge.error_function(gl @ g, gl @ gd)
                               - ge.error_function(g, gd)))
    gr = Pose.exp(np.array([0.3, -0.2, 0.4, 0.5, 0.2, -0.3]))
    g = Pose.exp(np.array([0.2, 0.1, -0.3, 0.8, -0.4, 0.2]))
    gd = Pose.exp(np.array([-0.4, 0.3, 0.1, -0.2, 0.6, 0.5]))
    moved = abs(ge.error_function(g @ gr, gd @ gr) - ge.error_function(g, gd))
    return [
        CheckResult("left-invariance", worst < 1e-12, worst, 1e-12),
        CheckResult("right-shift-witness", moved > 1e-3, moved, 1e-3,
                    "must exceed, not undercut"),
    ]


def check_error_gradients(samples: int = 500, eps: float = 1e-6) -> list[CheckResult]:
    """Directional derivatives of the error function and the weighted
    potential match e_g and f_g pairings with body-frame perturbations."""
    rng = np.random.default_rng(77)
    gains = ge.Gains.from_scalars(4.0, 2.5, 1.0)
    worst_psi = 0.0
    worst_pot = 0.0
    for _ in range(samples):
        g, gd = _random_pose(rng), _random_pose(rng)
        eta = rng.normal(size=6)
        eta /= np.linalg.norm(eta)
        gp, gm = g @ Pose.exp(eps * eta), g @ Pose.exp(-eps * eta)
        d_psi = (ge.error_function(gp, gd) - ge.error_function(gm, gd)) / (2 * eps)
        d_pot = (ge.potential(gp, gd, gains) - ge.potential(gm, gd, gains)) / (2 * eps)
        worst_psi = max(worst_psi, abs(d_psi - ge.error_vector(g, gd) @ eta))
        worst_pot = max(worst_pot, abs(d_pot - ge.elastic_wrench(g, gd, gains) @ eta))
    return [
        CheckResult("error-vector-gradient", worst_psi < 1e-6, worst_psi, 1e-6),
        CheckResult("spring-wrench-gradient", worst_pot < 1e-6, worst_pot, 1e-6),
    ]


def check_task_passivity(samples: int = 500) -> list[CheckResult]:
    """FD rate of the task mass matrix minus twice the task Coriolis matrix is
    skew-symmetric at well-conditioned random states."""
    model = load_scenario("regulation").model
    rng = np.random.default_rng(11)
    worst = 0.0
    done = 0
    while done < samples:
        q = rng.uniform(-np.pi, np.pi, model.n)
        qd = rng.normal(scale=1.5, size=model.n)
        if np.linalg.cond(body_jacobian(model, q)) > 50.0:
            continue
        done += 1

        def central(hh):
            tp = dyn.task_dynamics(model, q + hh * qd, qd)
            tm = dyn.task_dynamics(model, q - hh * qd, qd)
            return (tp.M - tm.M) / (2 * hh)

        Md = (4.0 * central(1.5e-6) - central(3e-6)) / 3.0
        S = Md - 2.0 * dyn.task_dynamics(model, q, qd).C
        worst = max(worst, np.abs(S + S.T).max())
    return [CheckResult("task-passivity", worst < 1e-5, worst, 1e-5)]


def _monotonicity_violation(trace) -> float:
    """Largest per-step increase of V between waypoint switches."""
    sc = trace.scenario
    switches = np.asarray(sc.trajectory.switch_times, float)
    dV = np.diff(trace.V_lyap)
    t_hi = trace.t[1:]
    if switches.size:
        # a step whose right endpoint lands on/just after a switch may jump
        crosses = ((t_hi[:, None] > switches - 1e-9)
                   & (trace.t[:-1][:, None] < switches + 1e-9)).any(axis=1)
        dV = dV[~crosses]
    return float(dV.max(initial=-np.inf))


def check_closed_loop_decay(stride: int = 10, progress=None) -> list[CheckResult]:
    """Energy decay identities along full runs.

    Invariant-error law on the regulation scenario: V decays at exactly the
    damping rate and never increases between waypoint switches. Shifted-error
    law (small positive spring-rate weight) on the tracking scenario: W decays
    at the shifted rate.
    """
    def say(msg):
        if progress:
            progress(msg)

    out = []
    say("running regulation scenario (invariant-error law) ...")
    reg = run_scenario(load_scenario("regulation", controller="gic1"))
    say("differentiating V along the run ...")
    res_v = lyapunov_residuals(reg, stride=stride)["V"]
    out.append(CheckResult("regulation-decay-rate", res_v < 1e-4, res_v, 1e-4))
    rise = _monotonicity_violation(reg)
    out.append(CheckResult("regulation-monotonicity", rise < 1e-8, rise, 1e-8,
                           "max per-step rise of V between switches"))

    say("running tracking scenario (gic1) for the spring-rate identities ...")
    trk = run_scenario(load_scenario("tracking", controller="gic1"))
    say("differentiating the potential and spring wrench ...")
    rates = rate_identity_residuals(trk, stride=stride)
    out.append(CheckResult("potential-rate", rates["dP"] < 1e-5, rates["dP"], 1e-5))
    out.append(CheckResult("spring-wrench-rate", rates["df_g"] < 1e-4,
                           rates["df_g"], 1e-4))

    say("running tracking scenario (shifted-error law) ...")
    trk2 = run_scenario(load_scenario("tracking", controller="gic2", lambda_g=0.02))
    say("differentiating W along the run ...")
    res_w = lyapunov_residuals(trk2, stride=stride)["W"]
    out.append(CheckResult("tracking-decay-rate", res_w < 1e-4, res_w, 1e-4))
    return out


def run_all(stride: int = 10, samples: int = 500, progress=None) -> list[CheckResult]:
    """Run every check; `stride` subsamples the along-run differentiations
    (1 checks every recorded step and is several times slower)."""
    results = []
    results += check_left_invariance(max(samples, 1000))
    results += check_error_gradients(samples)
    results += check_task_passivity(samples)
    results += check_closed_loop_decay(stride=stride, progress=progress)
    return results
