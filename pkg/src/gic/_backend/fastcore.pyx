# cython: language_level=3
"""Compiled kinematics/dynamics kernels.

C port of purecore.py with identical signatures and the same arithmetic
(products of exponentials, link-COM Jacobian mass matrix, FD-Christoffel
Coriolis, analytic gravity). Numerical agreement with the pure backend is
asserted to 1e-12 by the backend-equivalence tests.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt
from libc.string cimport memcpy, memset

cnp.import_array()

BACKEND_NAME = "compiled"

cdef enum:
    MAXJ = 16

cdef double EPS_ANGLE = 1e-6
cdef double FD_REL_STEP = 1e-6


# ---------------------------------------------------------------------------
# small fixed-size helpers, all row-major
# ---------------------------------------------------------------------------

cdef inline void _cross(const double* a, const double* b, double* o) noexcept:
    o[0] = a[1] * b[2] - a[2] * b[1]
    o[1] = a[2] * b[0] - a[0] * b[2]
    o[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void _mat4_mul(const double* A, const double* B, double* C) noexcept:
    # C must not alias A or B
    cdef int i, j
    for i in range(4):
        for j in range(4):
            C[4 * i + j] = (A[4 * i] * B[j] + A[4 * i + 1] * B[4 + j]
                            + A[4 * i + 2] * B[8 + j] + A[4 * i + 3] * B[12 + j])


cdef inline void _exp_xi_q(const double* xi, double q, double* T) noexcept:
    # T = exp(hat(xi * q)), xi = [v; w]
    cdef double v0 = xi[0] * q, v1 = xi[1] * q, v2 = xi[2] * q
    cdef double w0 = xi[3] * q, w1 = xi[4] * q, w2 = xi[5] * q
    cdef double th = sqrt(w0 * w0 + w1 * w1 + w2 * w2)
    cdef double W[9]
    cdef double W2[9]
    cdef double aR, bR, bV, cV, s, c
    cdef int i, j
    W[0] = 0.0;  W[1] = -w2; W[2] = w1
    W[3] = w2;   W[4] = 0.0; W[5] = -w0
    W[6] = -w1;  W[7] = w0;  W[8] = 0.0
    for i in range(3):
        for j in range(3):
            W2[3 * i + j] = W[3 * i] * W[j] + W[3 * i + 1] * W[3 + j] + W[3 * i + 2] * W[6 + j]
    if th < EPS_ANGLE:
        aR = 1.0
        bR = 0.5
        bV = 0.5
        cV = 1.0 / 6.0
    else:
        s = sin(th)
        c = cos(th)
        aR = s / th
        bR = (1.0 - c) / (th * th)
        bV = bR
        cV = (th - s) / (th * th * th)
    for i in range(3):
        for j in range(3):
            T[4 * i + j] = aR * W[3 * i + j] + bR * W2[3 * i + j]
        T[4 * i + i] += 1.0
    # p = V @ v with V = I + bV W + cV W2
    T[3] = v0 + bV * (W[0] * v0 + W[1] * v1 + W[2] * v2) + cV * (W2[0] * v0 + W2[1] * v1 + W2[2] * v2)
    T[7] = v1 + bV * (W[3] * v0 + W[4] * v1 + W[5] * v2) + cV * (W2[3] * v0 + W2[4] * v1 + W2[5] * v2)
    T[11] = v2 + bV * (W[6] * v0 + W[7] * v1 + W[8] * v2) + cV * (W2[6] * v0 + W2[7] * v1 + W2[8] * v2)
    T[12] = 0.0
    T[13] = 0.0
    T[14] = 0.0
    T[15] = 1.0


cdef inline void _adj_inv_apply(const double* T, const double* xi, double* out) noexcept:
    # out = Ad_{T^-1} xi: [R^T v - (R^T p) x (R^T w); R^T w]
    cdef double rw[3]
    cdef double rv[3]
    cdef double rp[3]
    cdef double cx[3]
    cdef int i
    for i in range(3):
        rw[i] = T[i] * xi[3] + T[4 + i] * xi[4] + T[8 + i] * xi[5]
        rv[i] = T[i] * xi[0] + T[4 + i] * xi[1] + T[8 + i] * xi[2]
        rp[i] = T[i] * T[3] + T[4 + i] * T[7] + T[8 + i] * T[11]
    _cross(rp, rw, cx)
    for i in range(3):
        out[i] = rv[i] - cx[i]
        out[3 + i] = rw[i]


cdef inline void _ad_apply(const double* x, const double* y, double* out) noexcept:
    # out = ad_x y with x = [v; w]: [w x yv + v x yw; w x yw]
    cdef double a[3]
    cdef double b[3]
    cdef double c[3]
    _cross(x + 3, y, a)
    _cross(x, y + 3, b)
    _cross(x + 3, y + 3, c)
    out[0] = a[0] + b[0]
    out[1] = a[1] + b[1]
    out[2] = a[2] + b[2]
    out[3] = c[0]
    out[4] = c[1]
    out[5] = c[2]


cdef void _chain_jacobian(const double[:, ::1] xi, const double* tail,
                          const double* q, int nj, double* J) noexcept:
    # J row-major (6, nj): columns Ad_{D_i^-1} xi_i, D_i = E_i ... E_nj tail
    cdef double T[16]
    cdef double E[16]
    cdef double tmp[16]
    cdef double col[6]
    cdef int i, k
    memcpy(T, tail, 16 * sizeof(double))
    for i in range(nj - 1, -1, -1):
        _exp_xi_q(&xi[i, 0], q[i], E)
        _mat4_mul(E, T, tmp)
        memcpy(T, tmp, 16 * sizeof(double))
        _adj_inv_apply(T, &xi[i, 0], col)
        for k in range(6):
            J[k * nj + i] = col[k]


cdef void _fk(const double[:, ::1] xi, const double* tail, const double* q,
              int n, double* g) noexcept:
    cdef double E[16]
    cdef double tmp[16]
    cdef int i
    cdef double acc[16]
    memset(acc, 0, 16 * sizeof(double))
    acc[0] = 1.0
    acc[5] = 1.0
    acc[10] = 1.0
    acc[15] = 1.0
    for i in range(n):
        _exp_xi_q(&xi[i, 0], q[i], E)
        _mat4_mul(acc, E, tmp)
        memcpy(acc, tmp, 16 * sizeof(double))
    _mat4_mul(acc, tail, g)


cdef void _mass(const double[:, ::1] xi, const double[:, :, ::1] com,
                const double[::1] mass, const double[:, :, ::1] inertia,
                const double* q, int n, double* M) noexcept:
    cdef double J[6 * MAXJ]
    cdef double GJ[6 * MAXJ]
    cdef int i, r, s, k, nj
    cdef double m, acc
    memset(M, 0, n * n * sizeof(double))
    for i in range(n):
        nj = i + 1
        _chain_jacobian(xi, &com[i, 0, 0], q, nj, J)
        m = mass[i]
        for s in range(nj):
            for k in range(3):
                GJ[k * nj + s] = m * J[k * nj + s]
            for k in range(3):
                GJ[(3 + k) * nj + s] = (inertia[i, k, 0] * J[3 * nj + s]
                                        + inertia[i, k, 1] * J[4 * nj + s]
                                        + inertia[i, k, 2] * J[5 * nj + s])
        for r in range(nj):
            for s in range(nj):
                acc = 0.0
                for k in range(6):
                    acc += J[k * nj + r] * GJ[k * nj + s]
                M[r * n + s] += acc


cdef void _gravity(const double[:, ::1] xi, const double[:, :, ::1] com,
                   const double[::1] mass, const double* grav,
                   const double* q, int n, double* G) noexcept:
    cdef double J[6 * MAXJ]
    cdef double P[16]
    cdef double E[16]
    cdef double tmp[16]
    cdef double gc[16]
    cdef double rg[3]
    cdef int i, j, k, nj
    cdef double m
    memset(G, 0, n * sizeof(double))
    memset(P, 0, 16 * sizeof(double))
    P[0] = 1.0
    P[5] = 1.0
    P[10] = 1.0
    P[15] = 1.0
    for i in range(n):
        nj = i + 1
        _exp_xi_q(&xi[i, 0], q[i], E)
        _mat4_mul(P, E, tmp)
        memcpy(P, tmp, 16 * sizeof(double))
        _mat4_mul(P, &com[i, 0, 0], gc)
        for k in range(3):
            rg[k] = gc[k] * grav[0] + gc[4 + k] * grav[1] + gc[8 + k] * grav[2]
        _chain_jacobian(xi, &com[i, 0, 0], q, nj, J)
        m = mass[i]
        for j in range(nj):
            G[j] -= m * (rg[0] * J[j] + rg[1] * J[nj + j] + rg[2] * J[2 * nj + j])


cdef void _coriolis(const double[:, ::1] xi, const double[:, :, ::1] com,
                    const double[::1] mass, const double[:, :, ::1] inertia,
                    const double* q, const double* qdot, int n, double* C) noexcept:
    cdef double dM[MAXJ * MAXJ * MAXJ]
    cdef double Mp[MAXJ * MAXJ]
    cdef double Mm[MAXJ * MAXJ]
    cdef double qb[MAXJ]
    cdef int t, r, s, k
    cdef double h, acc
    for k in range(n):
        qb[k] = q[k]
    for t in range(n):
        h = FD_REL_STEP * (1.0 + fabs(q[t]))
        qb[t] = q[t] + h
        _mass(xi, com, mass, inertia, qb, n, Mp)
        qb[t] = q[t] - h
        _mass(xi, com, mass, inertia, qb, n, Mm)
        qb[t] = q[t]
        for k in range(n * n):
            dM[t * n * n + k] = (Mp[k] - Mm[k]) / (2.0 * h)
    for r in range(n):
        for s in range(n):
            acc = 0.0
            for t in range(n):
                acc += (dM[(t * n + r) * n + s] + dM[(s * n + r) * n + t]
                        - dM[(r * n + t) * n + s]) * qdot[t]
            C[r * n + s] = 0.5 * acc


cdef void _body_jac_dot(const double[:, ::1] xi, const double* g0,
                        const double* q, const double* qdot, int n,
                        double* J, double* dJ) noexcept:
    cdef double W[6]
    cdef double col[6]
    cdef double out[6]
    cdef int i, k
    _chain_jacobian(xi, g0, q, n, J)
    memset(W, 0, 6 * sizeof(double))
    for i in range(n - 1, -1, -1):
        for k in range(6):
            col[k] = J[k * n + i]
        _ad_apply(W, col, out)
        for k in range(6):
            dJ[k * n + i] = -out[k]
            W[k] += col[k] * qdot[i]


# ---------------------------------------------------------------------------
# python-visible wrappers, signatures identical to purecore
# ---------------------------------------------------------------------------

def _as_c(a, shape=None):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if shape is not None and a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    return a


def _check_n(int n):
    if n > MAXJ:
        raise ValueError(f"compiled backend supports at most {MAXJ} joints, got {n}")


def fk(xi, g0, q):
    """Forward kinematics of the full chain: 4x4 pose of the tool frame."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, ::1] g0v = _as_c(g0, (4, 4))
    cdef const double[::1] qv = _as_c(q)
    cdef int n = qv.shape[0]
    _check_n(n)
    out = np.empty((4, 4))
    cdef double[:, ::1] ov = out
    _fk(xiv, &g0v[0, 0], &qv[0], n, &ov[0, 0])
    return out


def link_com_fk(xi, com, q):
    """Pose of every link COM frame: (n, 4, 4)."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, :, ::1] comv = _as_c(com)
    cdef const double[::1] qv = _as_c(q)
    cdef int n = qv.shape[0]
    cdef int i
    _check_n(n)
    out = np.empty((n, 4, 4))
    cdef double[:, :, ::1] ov = out
    cdef double P[16]
    cdef double E[16]
    cdef double tmp[16]
    memset(P, 0, 16 * sizeof(double))
    P[0] = 1.0
    P[5] = 1.0
    P[10] = 1.0
    P[15] = 1.0
    for i in range(n):
        _exp_xi_q(&xiv[i, 0], qv[i], E)
        _mat4_mul(P, E, tmp)
        memcpy(P, tmp, 16 * sizeof(double))
        _mat4_mul(P, &comv[i, 0, 0], &ov[i, 0, 0])
    return out


def body_jacobian(xi, g0, q):
    """Body Jacobian of the tool frame: (6, n)."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, ::1] g0v = _as_c(g0, (4, 4))
    cdef const double[::1] qv = _as_c(q)
    cdef int n = qv.shape[0]
    _check_n(n)
    out = np.empty((6, n))
    cdef double[:, ::1] ov = out
    _chain_jacobian(xiv, &g0v[0, 0], &qv[0], n, &ov[0, 0])
    return out


def body_jacobian_dot(xi, g0, q, qdot):
    """Time derivative of the body Jacobian: (6, n)."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, ::1] g0v = _as_c(g0, (4, 4))
    cdef const double[::1] qv = _as_c(q)
    cdef const double[::1] qdv = _as_c(qdot)
    cdef int n = qv.shape[0]
    _check_n(n)
    J = np.empty((6, n))
    dJ = np.empty((6, n))
    cdef double[:, ::1] jv = J
    cdef double[:, ::1] dv = dJ
    _body_jac_dot(xiv, &g0v[0, 0], &qv[0], &qdv[0], n, &jv[0, 0], &dv[0, 0])
    return dJ


def mass_matrix(xi, com, mass, inertia, q):
    """Joint-space mass matrix (n, n)."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, :, ::1] comv = _as_c(com)
    cdef const double[::1] mv = _as_c(mass)
    cdef const double[:, :, ::1] iv = _as_c(inertia)
    cdef const double[::1] qv = _as_c(q)
    cdef int n = qv.shape[0]
    _check_n(n)
    out = np.empty((n, n))
    cdef double[:, ::1] ov = out
    _mass(xiv, comv, mv, iv, &qv[0], n, &ov[0, 0])
    return out


def gravity_vector(xi, com, mass, gravity, q):
    """Gravity torque G(q)."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, :, ::1] comv = _as_c(com)
    cdef const double[::1] mv = _as_c(mass)
    cdef const double[::1] gv = _as_c(gravity, (3,))
    cdef const double[::1] qv = _as_c(q)
    cdef int n = qv.shape[0]
    _check_n(n)
    out = np.empty(n)
    cdef double[::1] ov = out
    _gravity(xiv, comv, mv, &gv[0], &qv[0], n, &ov[0])
    return out


def potential_energy(xi, com, mass, gravity, q):
    """Gravitational potential U(q)."""
    gcs = link_com_fk(xi, com, q)
    mass = _as_c(mass)
    gravity = _as_c(gravity, (3,))
    U = 0.0
    for i in range(gcs.shape[0]):
        U -= mass[i] * (gravity[0] * gcs[i, 0, 3] + gravity[1] * gcs[i, 1, 3]
                        + gravity[2] * gcs[i, 2, 3])
    return U


def coriolis_matrix(xi, com, mass, inertia, q, qdot):
    """Coriolis matrix via FD Christoffel symbols."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, :, ::1] comv = _as_c(com)
    cdef const double[::1] mv = _as_c(mass)
    cdef const double[:, :, ::1] iv = _as_c(inertia)
    cdef const double[::1] qv = _as_c(q)
    cdef const double[::1] qdv = _as_c(qdot)
    cdef int n = qv.shape[0]
    _check_n(n)
    out = np.empty((n, n))
    cdef double[:, ::1] ov = out
    _coriolis(xiv, comv, mv, iv, &qv[0], &qdv[0], n, &ov[0, 0])
    return out


def joint_dynamics(xi, g0, com, mass, inertia, gravity, q, qdot):
    """Fused per-stage evaluation: (M, C, G, Jb, Jb_dot)."""
    cdef const double[:, ::1] xiv = _as_c(xi)
    cdef const double[:, ::1] g0v = _as_c(g0, (4, 4))
    cdef const double[:, :, ::1] comv = _as_c(com)
    cdef const double[::1] mv = _as_c(mass)
    cdef const double[:, :, ::1] iv = _as_c(inertia)
    cdef const double[::1] gv = _as_c(gravity, (3,))
    cdef const double[::1] qv = _as_c(q)
    cdef const double[::1] qdv = _as_c(qdot)
    cdef int n = qv.shape[0]
    _check_n(n)
    M = np.empty((n, n))
    C = np.empty((n, n))
    G = np.empty(n)
    J = np.empty((6, n))
    dJ = np.empty((6, n))
    cdef double[:, ::1] Mv = M
    cdef double[:, ::1] Cv = C
    cdef double[::1] Gv = G
    cdef double[:, ::1] Jv = J
    cdef double[:, ::1] dJv = dJ
    _mass(xiv, comv, mv, iv, &qv[0], n, &Mv[0, 0])
    _coriolis(xiv, comv, mv, iv, &qv[0], &qdv[0], n, &Cv[0, 0])
    _gravity(xiv, comv, mv, &gv[0], &qv[0], n, &Gv[0])
    _body_jac_dot(xiv, &g0v[0, 0], &qv[0], &qdv[0], n, &Jv[0, 0], &dJv[0, 0])
    return M, C, G, J, dJ
