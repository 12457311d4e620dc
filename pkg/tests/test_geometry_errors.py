"""Error-geometry tests: FD directional derivatives, invariance, rate identities."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gic import geometry_errors as ge
from gic import se3
from gic.se3 import Pose

# ---------------------------------------------------------------------------
# Oracles (frozen): every differential identity is checked against central
# finite differences along group flows, g -> g exp(h eta).
# ---------------------------------------------------------------------------

def flow(g: Pose, V, h: float) -> Pose:
    return g @ Pose.exp(np.asarray(V) * h)


def directional_fd(fun, g: Pose, eta, h=1e-6):
    return (fun(flow(g, eta, h)) - fun(flow(g, eta, -h))) / (2 * h)


def pair_rate_fd(fun, g: Pose, gd: Pose, Vb, Vd, h=1e-6):
    # frozen-velocity geodesic flow of both frames
    return (fun(flow(g, Vb, h), flow(gd, Vd, h))
            - fun(flow(g, Vb, -h), flow(gd, Vd, -h))) / (2 * h)


def rand_pose(rng) -> Pose:
    return Pose(se3.exp_so3(rng.uniform(-np.pi, np.pi, 3) * 0.9), rng.uniform(-1.5, 1.5, 3))


def rand_gains(rng, isotropic=False) -> ge.Gains:
    if isotropic:
        return ge.Gains.from_scalars(rng.uniform(0.5, 5), rng.uniform(0.5, 5), 1.0)
    return ge.Gains(np.diag(rng.uniform(0.5, 5, 3)), np.diag(rng.uniform(0.5, 5, 3)), np.eye(6))


# ---------------------------------------------------------------------------
# scalar error function
# ---------------------------------------------------------------------------

def test_error_function_zero_iff_equal():
    rng = np.random.default_rng(40)
    g = rand_pose(rng)
    assert ge.error_function(g, g) == pytest.approx(0.0, abs=1e-14)
    assert ge.error_function(g, rand_pose(rng)) > 1e-3


def test_error_function_directional_derivative():
    rng = np.random.default_rng(41)
    worst = 0.0
    for _ in range(200):
        g, gd = rand_pose(rng), rand_pose(rng)
        eta = rng.normal(size=6)
        d_fd = directional_fd(lambda x: ge.error_function(x, gd), g, eta)
        worst = max(worst, abs(d_fd - ge.error_vector(g, gd) @ eta))
    assert worst < 1e-7


def test_left_invariance_and_right_witness():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(200):
        g, gd, gl = rand_pose(rng), rand_pose(rng), rand_pose(rng)
        worst = max(worst, abs(ge.error_function(gl @ g, gl @ gd) - ge.error_function(g, gd)))
        worst = max(worst, np.abs(ge.error_vector(gl @ g, gl @ gd) - ge.error_vector(g, gd)).max())
    assert worst < 1e-12
    # right translation moves the value: not a bi-invariant metric
    g, gd, gr = (Pose(se3.exp_so3([0.3, -0.2, 0.5]), np.array([0.4, 0.1, -0.2])),
                 Pose(se3.exp_so3([-0.6, 0.1, 0.2]), np.array([-0.3, 0.2, 0.5])),
                 Pose(se3.exp_so3([0.2, 0.7, -0.4]), np.array([0.6, -0.5, 0.3])))
    assert abs(ge.error_function(g @ gr, gd @ gr) - ge.error_function(g, gd)) > 1e-3


# ---------------------------------------------------------------------------
# potential and elastic wrench
# ---------------------------------------------------------------------------

def test_potential_directional_derivative():
    rng = np.random.default_rng(43)
    worst = 0.0
    for _ in range(200):
        g, gd = rand_pose(rng), rand_pose(rng)
        gains = rand_gains(rng)
        eta = rng.normal(size=6)
        d_fd = directional_fd(lambda x: ge.potential(x, gd, gains), g, eta)
        worst = max(worst, abs(d_fd - ge.elastic_wrench(g, gd, gains) @ eta))
    assert worst < 1e-7


def test_potential_trace_form_equal():
    rng = np.random.default_rng(44)
    for _ in range(100):
        g, gd = rand_pose(rng), rand_pose(rng)
        gains = rand_gains(rng)
        assert ge.potential(g, gd, gains) == pytest.approx(
            ge.potential_trace_form(g, gd, gains), abs=1e-12)


def test_potential_left_invariant():
    rng = np.random.default_rng(45)
    for _ in range(100):
        g, gd, gl = rand_pose(rng), rand_pose(rng), rand_pose(rng)
        gains = rand_gains(rng)
        assert ge.potential(gl @ g, gl @ gd, gains) == pytest.approx(
            ge.potential(g, gd, gains), abs=1e-12)
        np.testing.assert_allclose(ge.elastic_wrench(gl @ g, gl @ gd, gains),
                                   ge.elastic_wrench(g, gd, gains), atol=1e-12)


def test_potential_rate_is_wrench_dot_velocity_error():
    # dP/dt = f_g . e_V with both poses moving
    rng = np.random.default_rng(46)
    worst = 0.0
    for _ in range(200):
        g, gd = rand_pose(rng), rand_pose(rng)
        gains = rand_gains(rng)
        Vb, Vd = rng.normal(size=6), rng.normal(size=6)
        dP = pair_rate_fd(lambda a, b: ge.potential(a, b, gains), g, gd, Vb, Vd)
        eV = ge.velocity_error(g, gd, Vb, Vd)
        worst = max(worst, abs(dP - ge.elastic_wrench(g, gd, gains) @ eV))
    assert worst < 1e-7


def test_elastic_wrench_rate_is_stiffness_jacobian():
    # d/dt f_g = B_K e_V
    rng = np.random.default_rng(47)
    worst = 0.0
    for _ in range(200):
        g, gd = rand_pose(rng), rand_pose(rng)
        gains = rand_gains(rng)
        Vb, Vd = rng.normal(size=6), rng.normal(size=6)
        df = pair_rate_fd(lambda a, b: ge.elastic_wrench(a, b, gains), g, gd, Vb, Vd)
        eV = ge.velocity_error(g, gd, Vb, Vd)
        worst = max(worst, np.abs(df - ge.stiffness_jacobian(g, gd, gains) @ eV).max())
    assert worst < 1e-7


@given(st.floats(0.1, 50.0))
@settings(max_examples=30)
def test_isotropic_wrench_reduces_to_error_vector(k):
    rng = np.random.default_rng(48)
    gains = ge.Gains.from_scalars(k, k, 1.0)
    for _ in range(5):
        g, gd = rand_pose(rng), rand_pose(rng)
        np.testing.assert_allclose(ge.elastic_wrench(g, gd, gains),
                                   k * ge.error_vector(g, gd), atol=1e-11 * max(1.0, k))


def test_desired_frame_stiffness_transport():
    # translational stiffness acts in the desired frame: for pure translation
    # offsets, f_p = R^T R_d Kp R_d^T (p - p_d)
    rng = np.random.default_rng(49)
    g, gd = rand_pose(rng), rand_pose(rng)
    gains = rand_gains(rng)
    fp = ge.elastic_wrench(g, gd, gains)[:3]
    expect = g.R.T @ gd.R @ gains.Kp @ gd.R.T @ (g.p - gd.p)
    np.testing.assert_allclose(fp, expect, atol=1e-13)


# ---------------------------------------------------------------------------
# velocity transport
# ---------------------------------------------------------------------------

def test_transported_twist_rate_matches_fd():
    rng = np.random.default_rng(50)
    worst = 0.0
    for _ in range(200):
        g, gd = rand_pose(rng), rand_pose(rng)
        Vb, Vd, Vd_dot = rng.normal(size=6), rng.normal(size=6), rng.normal(size=6)
        h = 1e-6

        def vstar(s):
            return ge.transported_desired_twist(flow(g, Vb, s), flow(gd, Vd, s), Vd + s * Vd_dot)

        v_fd = (vstar(h) - vstar(-h)) / (2 * h)
        v_an = ge.transported_desired_twist_rate(g, gd, Vb, Vd, Vd_dot)
        worst = max(worst, np.abs(v_fd - v_an).max())
    assert worst < 1e-7


def test_transported_twist_rate_bracket_form():
    # equivalent closed form: Ad_{g_ed} (ad_{V_ed} V_d + V_d_dot),
    # V_ed = V_d - Ad_{g_ed}^-1 V^b
    rng = np.random.default_rng(51)
    for _ in range(100):
        g, gd = rand_pose(rng), rand_pose(rng)
        Vb, Vd, Vd_dot = rng.normal(size=6), rng.normal(size=6), rng.normal(size=6)
        ged = ge.error_pose(g, gd)
        Ved = Vd - ged.inverse().adjoint() @ Vb
        alt = ged.adjoint() @ (se3.ad(Ved) @ Vd + Vd_dot)
        np.testing.assert_allclose(
            ge.transported_desired_twist_rate(g, gd, Vb, Vd, Vd_dot), alt, atol=1e-12)


def test_velocity_error_zero_when_tracking():
    # g moves with exactly the transported desired twist -> e_V = 0
    rng = np.random.default_rng(52)
    g, gd = rand_pose(rng), rand_pose(rng)
    Vd = rng.normal(size=6)
    Vb = ge.transported_desired_twist(g, gd, Vd)
    np.testing.assert_allclose(ge.velocity_error(g, gd, Vb, Vd), np.zeros(6), atol=1e-14)


# ---------------------------------------------------------------------------
# spatial (frame-inconsistent) errors
# ---------------------------------------------------------------------------

def test_spatial_error_small_angle_axis():
    for th in [0.05, 0.3, 1.0]:
        R = se3.exp_so3(np.array([0.0, 0.0, th]))
        e = ge.spatial_error_vector(Pose(R, np.zeros(3)), Pose.identity())
        np.testing.assert_allclose(e[3:], [0.0, 0.0, 2.0 * np.sin(th)], atol=1e-12)


def test_spatial_error_not_left_invariant():
    g = Pose(se3.exp_so3([0.4, -0.1, 0.3]), np.array([0.5, 0.0, -0.2]))
    gd = Pose(se3.exp_so3([-0.2, 0.3, 0.1]), np.array([-0.1, 0.4, 0.3]))
    gl = Pose(se3.exp_so3([0.7, 0.2, -0.5]), np.array([0.3, -0.6, 0.2]))
    d = ge.spatial_error_vector(gl @ g, gl @ gd) - ge.spatial_error_vector(g, gd)
    assert np.abs(d).max() > 1e-3


# ---------------------------------------------------------------------------
# legacy constant-gain rate identity (kept for the record: exact only for
# isotropic gains; the anisotropic version has a measurable gap)
# ---------------------------------------------------------------------------

def legacy_gain_map(kt, ko_diag):
    K = np.zeros((6, 6))
    K[:3, :3] = kt * np.eye(3)
    o1, o2, o3 = ko_diag
    K[3:, 3:] = np.diag([(o2 + o3) / 2.0, (o1 + o3) / 2.0, (o1 + o2) / 2.0])
    return K


def test_legacy_rate_identity_isotropic_exact():
    rng = np.random.default_rng(53)
    worst = 0.0
    for _ in range(100):
        g, gd = rand_pose(rng), rand_pose(rng)
        kt, ko = rng.uniform(0.5, 5), rng.uniform(0.5, 5)
        gains = ge.Gains.from_scalars(kt, ko, 1.0)
        Vb, Vd = rng.normal(size=6), rng.normal(size=6)
        dP = pair_rate_fd(lambda a, b: ge.potential(a, b, gains), g, gd, Vb, Vd)
        eV = ge.velocity_error(g, gd, Vb, Vd)
        eg = ge.error_vector(g, gd)
        worst = max(worst, abs(dP - eV @ legacy_gain_map(kt, [ko, ko, ko]) @ eg))
    assert worst < 1e-7


def test_legacy_rate_identity_anisotropic_gap():
    # deterministic example: anisotropic rotational gains break the constant-
    # gain form while the exact wrench identity still holds
    g = Pose(se3.exp_so3([0.7, -0.5, 0.9]), np.array([0.3, -0.2, 0.4]))
    gd = Pose(se3.exp_so3([-0.1, 0.4, -0.3]), np.array([-0.2, 0.5, 0.1]))
    gains = ge.Gains(np.eye(3), np.diag([1.0, 2.0, 4.0]), np.eye(6))
    Vb = np.array([0.3, -0.5, 0.2, 0.8, -0.1, 0.4])
    Vd = np.array([-0.2, 0.1, 0.6, -0.3, 0.5, 0.2])
    dP = pair_rate_fd(lambda a, b: ge.potential(a, b, gains), g, gd, Vb, Vd)
    eV = ge.velocity_error(g, gd, Vb, Vd)
    eg = ge.error_vector(g, gd)
    # exact identity holds for any symmetric gains
    assert abs(dP - ge.elastic_wrench(g, gd, gains) @ eV) < 1e-7
    # constant-gain approximation does not
    assert abs(dP - eV @ legacy_gain_map(1.0, [1.0, 2.0, 4.0]) @ eg) > 1e-3


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

def test_gains_validation():
    with pytest.raises(ValueError):
        ge.Gains(np.ones((3, 3)) + np.triu(np.ones((3, 3))), np.eye(3), np.eye(6))
    with pytest.raises(ValueError):
        ge.Gains(np.eye(4), np.eye(3), np.eye(6))
    g = ge.Gains([1.0, 2.0, 3.0], np.eye(3), np.eye(6))  # diagonals accepted
    np.testing.assert_array_equal(g.Kp, np.diag([1.0, 2.0, 3.0]))


def test_gains_block_map():
    g = ge.Gains.from_scalars(10.0, 20.0, 5.0)
    K = g.K_block
    np.testing.assert_array_equal(K[:3, :3], 10.0 * np.eye(3))
    np.testing.assert_array_equal(K[3:, 3:], 20.0 * np.eye(3))


def test_desired_state_rest():
    d = ge.DesiredState.rest(Pose.identity())
    np.testing.assert_array_equal(d.body_twist, np.zeros(6))
    np.testing.assert_array_equal(d.hybrid_accel, np.zeros(6))
