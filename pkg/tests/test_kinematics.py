"""Kinematics tests: series-FK and finite-difference Jacobian oracles, closed forms."""
import numpy as np
import pytest

from gic import kinematics as kin
from gic import se3
from gic.config import load_model

# ---------------------------------------------------------------------------
# Oracles (frozen): FK through the truncated matrix-exponential series and
# Jacobians through finite differences of the chain itself.
# ---------------------------------------------------------------------------

def exp_series(A, nterms=30):
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, nterms + 1):
        term = term @ A / k
        out = out + term
    return out


def fk_series(model, q):
    g = np.eye(4)
    for i in range(model.n):
        g = g @ exp_series(se3.hat6(model.xi[i] * q[i]))
    return g @ model.g0


def se3_project(M):
    # extract [v; w] from an almost-se(3) matrix without skewness checks
    A = M[:3, :3]
    w = 0.5 * np.array([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]])
    return np.concatenate([M[:3, 3], w])


def body_jacobian_fd(model, q, h=1e-5):
    g = kin.fk_matrix(model, q)
    ginv = np.linalg.inv(g)
    J = np.zeros((6, model.n))
    for i in range(model.n):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        dg = (kin.fk_matrix(model, qp) - kin.fk_matrix(model, qm)) / (2 * h)
        J[:, i] = se3_project(ginv @ dg)
    return J


def spatial_jacobian_by_prefix(model, q):
    # independent construction: column i is Ad of the prefix product applied to xi_i
    J = np.zeros((6, model.n))
    g = np.eye(4)
    for i in range(model.n):
        J[:, i] = se3.adjoint(g) @ model.xi[i]
        g = g @ se3.exp_se3(model.xi[i] * q[i])
    return J


@pytest.fixture(scope="module")
def ur5e():
    return load_model("ur5e_approx")


@pytest.fixture(scope="module")
def pendulum():
    return load_model("pendulum1")


def rand_q(model, seed, n):
    rng = np.random.default_rng(seed)
    return rng.uniform(-np.pi, np.pi, size=(n, model.n))


# ---------------------------------------------------------------------------
# forward kinematics
# ---------------------------------------------------------------------------

def test_fk_matches_series(ur5e):
    for q in rand_q(ur5e, 1, 50):
        np.testing.assert_allclose(kin.fk_matrix(ur5e, q), fk_series(ur5e, q), atol=1e-10)


def test_fk_zero_config_is_home(ur5e):
    np.testing.assert_allclose(kin.fk_matrix(ur5e, np.zeros(6)), ur5e.g0, atol=0)


def test_fk_reference_configuration(ur5e):
    # reached pose of the reference joint vector, used by the regulation scenario
    q0 = np.array([0.1721, -1.0447, 1.6729, -0.6282, 0.1721, 0.0])
    g = kin.fk(ur5e, q0)
    np.testing.assert_allclose(g.p, [-0.5, -0.3, 0.2], atol=1e-3)
    R0 = np.array([[1.0, 0, 0], [0, 0, -1], [0, 1, 0]])
    np.testing.assert_allclose(g.R, R0, atol=1e-3)


def test_pendulum_fk_closed_form(pendulum):
    for q in np.linspace(-3, 3, 13):
        g = kin.fk(pendulum, [q])
        np.testing.assert_allclose(g.p, [np.cos(q), 0.0, -np.sin(q)], atol=1e-14)


def test_link_com_poses_pendulum(pendulum):
    q = 0.7
    gc = kin.link_com_poses(pendulum, [q])
    np.testing.assert_allclose(gc[0, :3, 3], [np.cos(q), 0.0, -np.sin(q)], atol=1e-14)


# ---------------------------------------------------------------------------
# jacobians vs finite differences
# ---------------------------------------------------------------------------

def test_body_jacobian_matches_fd(ur5e):
    worst = 0.0
    for q in rand_q(ur5e, 2, 30):
        worst = max(worst, np.abs(kin.body_jacobian(ur5e, q) - body_jacobian_fd(ur5e, q)).max())
    assert worst < 1e-8


def test_body_twist_consistency(ur5e):
    rng = np.random.default_rng(3)
    for q in rand_q(ur5e, 4, 10):
        qd = rng.normal(size=6)
        h = 1e-6
        gp = kin.fk_matrix(ur5e, q + h * qd)
        gm = kin.fk_matrix(ur5e, q - h * qd)
        V_fd = se3_project(np.linalg.inv(kin.fk_matrix(ur5e, q)) @ (gp - gm) / (2 * h))
        np.testing.assert_allclose(kin.body_twist(ur5e, q, qd), V_fd, atol=1e-7)


def test_spatial_jacobian_two_constructions(ur5e):
    for q in rand_q(ur5e, 5, 30):
        np.testing.assert_allclose(kin.spatial_jacobian(ur5e, q),
                                   spatial_jacobian_by_prefix(ur5e, q), atol=1e-12)


def test_spatial_twist_adjoint_relation(ur5e):
    rng = np.random.default_rng(6)
    for q in rand_q(ur5e, 7, 10):
        qd = rng.normal(size=6)
        Vb = kin.body_twist(ur5e, q, qd)
        Vs = kin.spatial_twist(ur5e, q, qd)
        np.testing.assert_allclose(Vs, kin.fk(ur5e, q).adjoint() @ Vb, atol=1e-12)


def test_body_jacobian_dot_matches_fd(ur5e):
    rng = np.random.default_rng(8)
    worst = 0.0
    for q in rand_q(ur5e, 9, 20):
        qd = rng.normal(size=6)
        h = 1e-6
        J_fd = (kin.body_jacobian(ur5e, q + h * qd) - kin.body_jacobian(ur5e, q - h * qd)) / (2 * h)
        worst = max(worst, np.abs(kin.body_jacobian_dot(ur5e, q, qd) - J_fd).max())
    assert worst < 1e-7


def test_spatial_jacobian_dot_matches_fd(ur5e):
    rng = np.random.default_rng(10)
    worst = 0.0
    for q in rand_q(ur5e, 11, 20):
        qd = rng.normal(size=6)
        h = 1e-6
        J_fd = (kin.spatial_jacobian(ur5e, q + h * qd) - kin.spatial_jacobian(ur5e, q - h * qd)) / (2 * h)
        worst = max(worst, np.abs(kin.spatial_jacobian_dot(ur5e, q, qd) - J_fd).max())
    assert worst < 1e-6


# ---------------------------------------------------------------------------
# DH conversion and model validation
# ---------------------------------------------------------------------------

def test_bundled_ur5e_matches_dh_table(ur5e):
    d = [0.1625, 0.0, 0.0, 0.1333, 0.0997, 0.0778]
    a = [0.0, -0.425, -0.3922, 0.0, 0.0, 0.0]
    alpha = [np.pi / 2, 0.0, 0.0, np.pi / 2, -np.pi / 2, 0.0]
    xi, g0 = kin.poe_from_standard_dh(d, a, alpha)
    np.testing.assert_allclose(ur5e.xi, xi, atol=1e-12)
    np.testing.assert_allclose(ur5e.g0, g0, atol=1e-12)


def test_poe_from_dh_single_z_joint():
    xi, g0 = kin.poe_from_standard_dh([0.5], [0.0], [0.0])
    np.testing.assert_allclose(xi[0], [0, 0, 0, 0, 0, 1], atol=0)
    np.testing.assert_allclose(g0[:3, 3], [0, 0, 0.5], atol=0)


def test_model_validation():
    with pytest.raises(ValueError):
        kin.RobotModel("bad", np.zeros((2, 5)), np.eye(4), np.tile(np.eye(4), (2, 1, 1)),
                       np.ones(2), np.zeros((2, 3, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        kin.RobotModel("bad", np.zeros((1, 6)), np.eye(4), np.tile(np.eye(4), (1, 1, 1)),
                       -np.ones(1), np.zeros((1, 3, 3)), np.zeros(3))


def test_model_arrays_readonly(ur5e):
    with pytest.raises(ValueError):
        ur5e.xi[0, 0] = 1.0
