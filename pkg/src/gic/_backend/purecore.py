"""Pure-numpy kinematics/dynamics kernels.

Reference implementation of the hot kernels; the compiled backend in
fastcore.pyx mirrors these signatures exactly. All chains are products of
exponentials: g(q) = exp(hat xi_1 q_1) ... exp(hat xi_n q_n) g(0), with every
twist given in the space frame at the zero configuration, translation-first.

Mass matrices come from summing link-COM body Jacobians against the spatial
inertia blocks; Coriolis matrices from Christoffel symbols of the first kind
with central finite differences of M(q); gravity from the analytic gradient
of the potential.
"""
import numpy as np

from ..se3 import ad, exp_se3, hat3

BACKEND_NAME = "python"

# step scale for dM/dq central differences inside coriolis_matrix
FD_REL_STEP = 1e-6


def _adj_inv_apply(T, xi):
    # Ad_{T^-1} xi without forming the 6x6
    R = T[:3, :3]
    p = T[:3, 3]
    w = R.T @ xi[3:]
    v = R.T @ xi[:3] - np.cross(R.T @ p, w)
    return np.concatenate([v, w])


def fk(xi, g0, q):
    """Forward kinematics of the full chain: 4x4 pose of the tool frame."""
    g = np.eye(4)
    for i in range(len(q)):
        g = g @ exp_se3(xi[i] * q[i])
    return g @ g0


def link_com_fk(xi, com, q):
    """Pose of every link COM frame: (n, 4, 4). Link i moves with joints 1..i+1."""
    n = len(q)
    out = np.empty((n, 4, 4))
    g = np.eye(4)
    for i in range(n):
        g = g @ exp_se3(xi[i] * q[i])
        out[i] = g @ com[i]
    return out


def _body_jacobian_chain(xi, tail, q, nj):
    # columns Ad_{D_i^-1} xi_i with D_i = exp(hat xi_i q_i) ... exp(hat xi_nj q_nj) tail
    J = np.zeros((6, nj))
    T = tail.copy()
    for i in range(nj - 1, -1, -1):
        T = exp_se3(xi[i] * q[i]) @ T
        J[:, i] = _adj_inv_apply(T, xi[i])
    return J


def body_jacobian(xi, g0, q):
    """Body Jacobian of the tool frame: (6, n), V^b = J_b qdot."""
    return _body_jacobian_chain(xi, g0, q, len(q))


def body_jacobian_dot(xi, g0, q, qdot):
    """Time derivative of the body Jacobian: dJ_i = -ad_{W_i} J_i.

    W_i = sum_{j>i} J_j qdot_j is the body twist contributed by the joints
    distal to joint i (the self term drops since ad_x x = 0).
    """
    J = body_jacobian(xi, g0, q)
    dJ = np.zeros_like(J)
    W = np.zeros(6)
    for i in range(len(q) - 1, -1, -1):
        dJ[:, i] = -(ad(W) @ J[:, i])
        W = W + J[:, i] * qdot[i]
    return dJ


def mass_matrix(xi, com, mass, inertia, q):
    """Joint-space mass matrix (n, n), symmetric positive definite."""
    n = len(q)
    M = np.zeros((n, n))
    for i in range(n):
        Ji = _body_jacobian_chain(xi, com[i], q, i + 1)
        GJ = np.empty_like(Ji)
        GJ[:3] = mass[i] * Ji[:3]
        GJ[3:] = inertia[i] @ Ji[3:]
        M[: i + 1, : i + 1] += Ji.T @ GJ
    return M


def gravity_vector(xi, com, mass, gravity, q):
    """Gravity torque G(q) = dU/dq via the analytic link-Jacobian form."""
    n = len(q)
    G = np.zeros(n)
    for i in range(n):
        gci = np.eye(4)
        for j in range(i + 1):
            gci = gci @ exp_se3(xi[j] * q[j])
        gci = gci @ com[i]
        Ji = _body_jacobian_chain(xi, com[i], q, i + 1)
        G[: i + 1] -= mass[i] * ((gci[:3, :3].T @ gravity) @ Ji[:3, :])
    return G


def potential_energy(xi, com, mass, gravity, q):
    """Gravitational potential U(q) = -sum_i m_i gravity . p_com_i(q)."""
    U = 0.0
    for i, gci in enumerate(link_com_fk(xi, com, q)):
        U -= mass[i] * np.dot(gravity, gci[:3, 3])
    return U


def coriolis_matrix(xi, com, mass, inertia, q, qdot):
    """Coriolis matrix from Christoffel symbols of the first kind.

    C[r, s] = 1/2 sum_t (dM_rs/dq_t + dM_tr/dq_s - dM_ts/dq_r) qdot_t, with
    dM/dq_t by central differences, step FD_REL_STEP * (1 + |q_t|).
    Satisfies the passivity condition: Mdot - 2C is skew-symmetric.
    """
    n = len(q)
    dM = np.empty((n, n, n))  # dM[t] = dM/dq_t
    for t in range(n):
        h = FD_REL_STEP * (1.0 + abs(q[t]))
        qp = q.copy()
        qp[t] += h
        qm = q.copy()
        qm[t] -= h
        dM[t] = (mass_matrix(xi, com, mass, inertia, qp)
                 - mass_matrix(xi, com, mass, inertia, qm)) / (2.0 * h)
    C = np.empty((n, n))
    for r in range(n):
        for s in range(n):
            C[r, s] = 0.5 * np.dot(dM[:, r, s] + dM[s, r, :] - dM[r, :, s], qdot)
    return C


def joint_dynamics(xi, g0, com, mass, inertia, gravity, q, qdot):
    """Fused per-stage evaluation: (M, C, G, Jb, Jb_dot)."""
    M = mass_matrix(xi, com, mass, inertia, q)
    C = coriolis_matrix(xi, com, mass, inertia, q, qdot)
    G = gravity_vector(xi, com, mass, gravity, q)
    J = body_jacobian(xi, g0, q)
    Jd = body_jacobian_dot(xi, g0, q, qdot)
    return M, C, G, J, Jd
