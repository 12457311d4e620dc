"""Controller algebra: reductions, equilibria, and diagnostic bookkeeping."""
import numpy as np
import pytest

from gic import controllers as ctl
from gic import dynamics, geometry_errors as ge, kinematics
from gic.config import load_model

MODEL = load_model("ur5e_approx")
Q_REF = np.array([0.1721, -1.0447, 1.6729, -0.6282, 0.1721, 0.0])


def rand_state(rng, scale=0.4):
    q = Q_REF + rng.uniform(-scale, scale, 6)
    qdot = rng.uniform(-1.0, 1.0, 6)
    return q, qdot


def rand_desired(rng):
    gd = kinematics.fk(MODEL, Q_REF + rng.uniform(-0.3, 0.3, 6))
    Vd = rng.uniform(-0.5, 0.5, 6)
    Ad = rng.uniform(-0.5, 0.5, 6)
    # hybrid rates only matter for the benchmark; give them consistent shapes
    return ge.DesiredState(gd, Vd, Ad, rng.uniform(-0.5, 0.5, 6), rng.uniform(-0.5, 0.5, 6))


def test_gic2_with_zero_shift_is_gic1():
    rng = np.random.default_rng(60)
    gains = ge.Gains.from_scalars(100.0, 100.0, 50.0, lambda_g=0.0)
    for _ in range(25):
        q, qdot = rand_state(rng)
        des = rand_desired(rng)
        a = ctl.gic1(MODEL, q, qdot, des, gains)
        b = ctl.gic2(MODEL, q, qdot, des, gains)
        assert np.array_equal(a.tau, b.tau)
        assert np.array_equal(a.wrench, b.wrench)


def test_intuitive_matches_gic1_for_isotropic_gains():
    rng = np.random.default_rng(61)
    gains = ge.Gains.from_scalars(100.0, 100.0, 50.0)
    worst = 0.0
    for _ in range(25):
        q, qdot = rand_state(rng)
        des = rand_desired(rng)
        a = ctl.gic1(MODEL, q, qdot, des, gains)
        b = ctl.intuitive(MODEL, q, qdot, des, gains)
        worst = max(worst, np.abs(a.tau - b.tau).max())
    assert worst <= 1e-12


def test_intuitive_differs_for_anisotropic_gains():
    rng = np.random.default_rng(62)
    gains = ge.Gains(100.0 * np.eye(3), np.diag([50.0, 100.0, 200.0]), 50.0 * np.eye(6))
    q, qdot = rand_state(rng)
    des = rand_desired(rng)
    a = ctl.gic1(MODEL, q, qdot, des, gains)
    b = ctl.intuitive(MODEL, q, qdot, des, gains)
    assert np.abs(a.tau - b.tau).max() > 1e-3


def test_equilibrium_torque_is_gravity():
    # at the desired pose with zero rates, model-matching laws reduce to
    # gravity compensation (J^T maps the task gravity back exactly for n = 6)
    q = Q_REF.copy()
    qdot = np.zeros(6)
    des = ge.DesiredState.rest(kinematics.fk(MODEL, q))
    G = dynamics.gravity_vector(MODEL, q)
    gains = ge.Gains.from_scalars(100.0, 100.0, 50.0, lambda_g=0.5)
    for name in ("gic1", "gic2", "intuitive", "benchmark"):
        out = ctl.CONTROLLERS[name](MODEL, q, qdot, des, gains)
        np.testing.assert_allclose(out.tau, G, atol=1e-9, err_msg=name)
    out = ctl.pd(MODEL, q, qdot, des, gains)
    np.testing.assert_allclose(out.tau, np.zeros(6), atol=1e-12)


def test_pd_is_literal_spring_damper():
    rng = np.random.default_rng(63)
    gains = ge.Gains.from_scalars(100.0, 100.0, 50.0)
    q, qdot = rand_state(rng)
    des = rand_desired(rng)
    out = ctl.pd(MODEL, q, qdot, des, gains)
    g = kinematics.fk(MODEL, q)
    J = kinematics.body_jacobian(MODEL, q)
    eV = J @ qdot - ge.transported_desired_twist(g, des.pose, des.body_twist)
    expect = J.T @ (-(gains.K_block @ ge.error_vector(g, des.pose)) - gains.Kd @ eV)
    np.testing.assert_array_equal(out.tau, expect)


def test_precomputed_joint_dynamics_identical():
    rng = np.random.default_rng(64)
    gains = ge.Gains.from_scalars(100.0, 100.0, 50.0, lambda_g=0.1)
    q, qdot = rand_state(rng)
    des = rand_desired(rng)
    jd = dynamics.joint_dynamics(MODEL, q, qdot)
    for name, fn in ctl.CONTROLLERS.items():
        a = fn(MODEL, q, qdot, des, gains)
        b = fn(MODEL, q, qdot, des, gains, joint=jd)
        assert np.array_equal(a.tau, b.tau), name


def test_diagnostics_contents():
    rng = np.random.default_rng(65)
    gains = ge.Gains.from_scalars(100.0, 100.0, 50.0, lambda_g=0.1)
    q, qdot = rand_state(rng)
    des = rand_desired(rng)
    out = ctl.gic1(MODEL, q, qdot, des, gains, with_diag=True)
    d = out.diag
    assert set(d) == {"Psi", "Phi", "P", "K", "V", "W", "e_g", "e_V", "f_g"}
    assert d["Phi"] == pytest.approx(d["Psi"] + d["e_V"] @ d["e_V"], rel=1e-12)
    assert d["V"] == pytest.approx(d["P"] + d["K"], rel=1e-12)
    # W uses the shifted error; strictly larger than V here since f_g != 0
    ebar = d["e_V"] + gains.lambda_g * d["f_g"]
    Mt = dynamics.task_dynamics(MODEL, q, qdot).M
    assert d["W"] == pytest.approx(d["P"] + 0.5 * ebar @ Mt @ ebar, rel=1e-10)
    assert ctl.gic1(MODEL, q, qdot, des, gains).diag is None
    # every controller reports the same body-frame metrics for the same state
    for name, fn in ctl.CONTROLLERS.items():
        d2 = fn(MODEL, q, qdot, des, gains, with_diag=True).diag
        assert d2["Psi"] == pytest.approx(d["Psi"], rel=1e-12), name


def test_registry_lookup():
    assert set(ctl.CONTROLLERS) == {"gic1", "gic2", "intuitive", "benchmark", "pd"}
    assert ctl.get_controller("gic1") is ctl.gic1
    with pytest.raises(ValueError):
        ctl.get_controller("nope")
