"""Geometrically consistent pose errors, potentials, and elastic wrenches.

Everything here is left-invariant: premultiplying both the current and the
desired pose by the same rigid transform changes nothing. The configuration
error lives in the body frame of the current pose, ordered translation-first
like every twist in the package.

Core objects, for current pose g = (R, p) and desired g_d = (R_d, p_d):

  error function   Psi  = tr(I - R_d^T R) + 1/2 |p - p_d|^2
  error vector     e_g  = [R^T (p - p_d); (R_d^T R - R^T R_d)^vee]
  error transform  g_ed = g^-1 g_d
  velocity error   e_V  = V^b - Ad_{g_ed} V_d^b
  potential        P    = tr(K_R (I - R_d^T R))
                          + 1/2 (p - p_d)^T R_d K_p R_d^T (p - p_d)
  elastic wrench   f_g  = [R^T R_d K_p R_d^T (p - p_d);
                           (K_R R_d^T R - R^T R_d K_R)^vee]

The directional derivative of Psi along a body twist is e_g . eta, that of P
is f_g . eta, and d/dt f_g = B_K e_V with B_K the stiffness Jacobian below.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .se3 import Pose, adjoint, hat3

_EYE6 = np.eye(6)


def _frozen_sq(K, size, name):
    K = np.asarray(K, dtype=float)
    if K.shape == (size,):
        K = np.diag(K)
    if K.shape != (size, size):
        raise ValueError(f"{name} must be {size}x{size} or a length-{size} diagonal")
    if not np.allclose(K, K.T, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    K = np.ascontiguousarray(K)
    K.setflags(write=False)
    return K


@dataclass(frozen=True)
class Gains:
    """Impedance gains: translational/rotational stiffness, damping, shaping weight.

    Kp, KR are 3x3 symmetric stiffness blocks acting in the desired frame;
    Kd is the 6x6 damping applied to the velocity error; lambda_g scales the
    elastic-force shaping of the second control law (0 disables it).
    """

    Kp: np.ndarray
    KR: np.ndarray
    Kd: np.ndarray
    lambda_g: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "Kp", _frozen_sq(self.Kp, 3, "Kp"))
        object.__setattr__(self, "KR", _frozen_sq(self.KR, 3, "KR"))
        object.__setattr__(self, "Kd", _frozen_sq(self.Kd, 6, "Kd"))
        object.__setattr__(self, "lambda_g", float(self.lambda_g))

    @classmethod
    def from_scalars(cls, kp: float, ko: float, kd: float, lambda_g: float = 0.0) -> "Gains":
        return cls(kp * np.eye(3), ko * np.eye(3), kd * np.eye(6), lambda_g)

    @property
    def K_block(self) -> np.ndarray:
        """blkdiag(Kp, KR): the naive constant stiffness map on e_g."""
        K = np.zeros((6, 6))
        K[:3, :3] = self.Kp
        K[3:, 3:] = self.KR
        return K


@dataclass(frozen=True)
class DesiredState:
    """Desired pose plus its rates in the two conventions the controllers use.

    body_twist / body_accel:     V_d^b and its time derivative (body frame of g_d)
    hybrid_twist / hybrid_accel: [pd_dot; omega_d^s] and derivative, i.e. the
                                 translational rate taken directly and the
                                 rotational rate as a spatial angular velocity
    """

    pose: Pose
    body_twist: np.ndarray
    body_accel: np.ndarray
    hybrid_twist: np.ndarray
    hybrid_accel: np.ndarray

    @classmethod
    def rest(cls, pose: Pose) -> "DesiredState":
        z = np.zeros(6)
        return cls(pose, z, z, z, z)


# ---------------------------------------------------------------------------
# configuration errors
# ---------------------------------------------------------------------------

def error_function(g: Pose, gd: Pose) -> float:
    """Left-invariant scalar pose error Psi >= 0, zero iff g == gd."""
    dp = g.p - gd.p
    return float(3.0 - np.trace(gd.R.T @ g.R) + 0.5 * (dp @ dp))


def error_vector(g: Pose, gd: Pose) -> np.ndarray:
    """Body-frame configuration error e_g with dPsi = e_g . eta."""
    Q = gd.R.T @ g.R
    S = Q - Q.T  # = R_d^T R - R^T R_d
    return np.array([
        *(g.R.T @ (g.p - gd.p)),
        S[2, 1], S[0, 2], S[1, 0],
    ])


def error_pose(g: Pose, gd: Pose) -> Pose:
    """Relative transform g_ed = g^-1 g_d carrying desired-frame quantities to the body."""
    return g.inverse() @ gd


def transported_desired_twist(g: Pose, gd: Pose, body_twist_d) -> np.ndarray:
    """V_d^* = Ad_{g_ed} V_d^b: the desired body twist seen from the current body frame."""
    return error_pose(g, gd).adjoint() @ np.asarray(body_twist_d, dtype=float)


def velocity_error(g: Pose, gd: Pose, body_twist, body_twist_d) -> np.ndarray:
    """e_V = V^b - V_d^*."""
    return np.asarray(body_twist, dtype=float) - transported_desired_twist(g, gd, body_twist_d)


def transported_desired_twist_rate(g: Pose, gd: Pose, body_twist,
                                   body_twist_d, body_accel_d) -> np.ndarray:
    """d/dt V_d^* by the product rule: (d/dt Ad_{g_ed}) V_d^b + Ad_{g_ed} dV_d^b/dt.

    With R_ed = R^T R_d, p_ed = -R^T (p - p_d) and current body twist [v; w]:

      R_ed_dot = -hat(w) R_ed + R_ed hat(w_d)
      p_ed_dot = hat(w) R^T (p - p_d) - v + R_ed v_d

    which assembles d/dt Ad_{g_ed} block-wise.
    """
    Vb = np.asarray(body_twist, dtype=float)
    Vd = np.asarray(body_twist_d, dtype=float)
    Ad_dot = _ad_ged_dot(g, gd, Vb, Vd)
    return Ad_dot @ Vd + error_pose(g, gd).adjoint() @ np.asarray(body_accel_d, dtype=float)


def _ad_ged_dot(g: Pose, gd: Pose, Vb, Vd):
    v, w = Vb[:3], Vb[3:]
    vd, wd = Vd[:3], Vd[3:]
    Red = g.R.T @ gd.R
    dp_body = g.R.T @ (g.p - gd.p)
    ped = -dp_body
    Red_dot = -hat3(w) @ Red + Red @ hat3(wd)
    ped_dot = hat3(w) @ dp_body - v + Red @ vd
    A = np.zeros((6, 6))
    A[:3, :3] = Red_dot
    A[:3, 3:] = hat3(ped_dot) @ Red + hat3(ped) @ Red_dot
    A[3:, 3:] = Red_dot
    return A


# ---------------------------------------------------------------------------
# gain-weighted potential and elastic wrench
# ---------------------------------------------------------------------------

def potential(g: Pose, gd: Pose, gains: Gains) -> float:
    """Gain-weighted left-invariant potential P(g, g_d) >= 0."""
    dp = g.p - gd.p
    rot = np.trace(gains.KR @ (np.eye(3) - gd.R.T @ g.R))
    trans = 0.5 * dp @ gd.R @ gains.Kp @ gd.R.T @ dp
    return float(rot + trans)


def potential_trace_form(g: Pose, gd: Pose, gains: Gains) -> float:
    """P rewritten as 1/2 tr(psi^T psi) over a stacked error block; equal to potential().

    psi = [sqrt(KR) (I - R_d^T R), -sqrt(Kp) R_d^T (p - p_d)]. Used as an
    independent cross-check of the potential's algebra.
    """
    psi = np.zeros((3, 4))
    psi[:, :3] = _sqrtm_spd(gains.KR) @ (np.eye(3) - gd.R.T @ g.R)
    psi[:, 3] = -(_sqrtm_spd(gains.Kp) @ (gd.R.T @ (g.p - gd.p)))
    return float(0.5 * np.trace(psi.T @ psi))


def _sqrtm_spd(K):
    w, V = np.linalg.eigh(K)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def elastic_wrench(g: Pose, gd: Pose, gains: Gains) -> np.ndarray:
    """f_g with dP = f_g . eta; reduces to k e_g for isotropic gains kI."""
    Q = g.R.T @ gd.R  # = R^T R_d
    fp = Q @ gains.Kp @ gd.R.T @ (g.p - gd.p)
    S = gains.KR @ Q.T - Q @ gains.KR
    return np.array([fp[0], fp[1], fp[2], S[2, 1], S[0, 2], S[1, 0]])


def stiffness_jacobian(g: Pose, gd: Pose, gains: Gains) -> np.ndarray:
    """B_K with d/dt f_g = B_K e_V.

    Block structure: [[R^T R_d Kp R_d^T R, hat(f_p)],
                      [0, tr(R^T R_d KR) I - R^T R_d KR]]
    """
    Q = g.R.T @ gd.R
    fp = Q @ gains.Kp @ gd.R.T @ (g.p - gd.p)
    B = np.zeros((6, 6))
    B[:3, :3] = Q @ gains.Kp @ Q.T
    B[:3, 3:] = hat3(fp)
    A = Q @ gains.KR
    B[3:, 3:] = np.trace(A) * np.eye(3) - A
    return B


# ---------------------------------------------------------------------------
# frame-inconsistent spatial errors (benchmark comparison law)
# ---------------------------------------------------------------------------

def spatial_error_vector(g: Pose, gd: Pose) -> np.ndarray:
    """Spatial-frame error [p - p_d; sum_i r_d_i x r_i] over the rotation columns.

    The rotational part is the classic small-angle axis sum (about 2 theta
    near identity); unlike error_vector it is not left-invariant.
    """
    eR = np.zeros(3)
    for i in range(3):
        eR += np.cross(gd.R[:, i], g.R[:, i])
    return np.concatenate([g.p - gd.p, eR])


def spatial_errors(g: Pose, gd: Pose, V_s, Vd_s) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-frame error pair (e_g_s, e_V_s) for the benchmark law.

    e_V_s subtracts the desired hybrid rates [pd_dot; omega_d] from the
    spatial twist, so its linear block damps pdot - omega x p against pd_dot.
    """
    return spatial_error_vector(g, gd), np.asarray(V_s, float) - np.asarray(Vd_s, float)
