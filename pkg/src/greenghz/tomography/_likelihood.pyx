# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled likelihood kernels; same contract as ``_likelihood_py``.

Complex arrays are processed as interleaved (re, im) doubles. The gradient is
formed as ``T @ (R - N/t I)`` with ``R = sum_j (n_j/q_j) v_j v_j^dag``, of
which only the upper triangle is accumulated. ``T`` must be lower triangular.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY

cnp.import_array()


cdef double _loglik_R(const double[:, ::1] T, const double[:, ::1] V, const double[::1] n,
                      double[:, ::1] R, double* N_out) noexcept nogil:
    """Fill the upper triangle of R; return sum n_j log q_j, or -inf."""
    cdef Py_ssize_t d = T.shape[0]
    cdef Py_ssize_t m = V.shape[0]
    cdef Py_ssize_t j, a, b
    cdef double N = 0.0, L = 0.0, q, c, wr, wi, tr, ti, vr, vi, ar, ai
    for j in range(m):
        if n[j] == 0.0:
            continue
        N += n[j]
        q = 0.0
        for a in range(d):
            wr = 0.0
            wi = 0.0
            for b in range(a + 1):
                tr = T[a, 2 * b]
                ti = T[a, 2 * b + 1]
                vr = V[j, 2 * b]
                vi = V[j, 2 * b + 1]
                wr = wr + tr * vr - ti * vi
                wi = wi + tr * vi + ti * vr
            q = q + wr * wr + wi * wi
        if q <= 0.0:
            return -INFINITY
        L = L + n[j] * log(q)
        c = n[j] / q
        for a in range(d):
            ar = c * V[j, 2 * a]
            ai = c * V[j, 2 * a + 1]
            for b in range(a, d):
                # c v_a conj(v_b)
                vr = V[j, 2 * b]
                vi = V[j, 2 * b + 1]
                R[a, 2 * b] += ar * vr + ai * vi
                R[a, 2 * b + 1] += ai * vr - ar * vi
    N_out[0] = N
    return L


cdef void _grad(const double[:, ::1] T, double[:, ::1] R, double shift, double[:, ::1] G) noexcept nogil:
    """G = T @ (R - shift I), R Hermitian with only its upper triangle filled."""
    cdef Py_ssize_t d = T.shape[0]
    cdef Py_ssize_t a, b, k
    cdef double gr, gi, tr, ti, rr, ri
    for a in range(d):
        R[a, 2 * a] -= shift
        R[a, 2 * a + 1] = 0.0
        for b in range(a):
            R[a, 2 * b] = R[b, 2 * a]
            R[a, 2 * b + 1] = -R[b, 2 * a + 1]
    for a in range(d):
        for b in range(d):
            gr = 0.0
            gi = 0.0
            for k in range(a + 1):
                tr = T[a, 2 * k]
                ti = T[a, 2 * k + 1]
                rr = R[k, 2 * b]
                ri = R[k, 2 * b + 1]
                gr = gr + tr * rr - ti * ri
                gi = gi + tr * ri + ti * rr
            G[a, 2 * b] = gr
            G[a, 2 * b + 1] = gi


def loglik_grad(T, V, n):
    cdef const double[:, ::1] Tv = np.ascontiguousarray(T, dtype=np.complex128).view(np.float64)
    cdef const double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.complex128).view(np.float64)
    cdef const double[::1] nv = np.ascontiguousarray(n, dtype=np.float64)
    cdef Py_ssize_t d = Tv.shape[0]
    cdef Py_ssize_t a, b
    cdef double t = 0.0, N = 0.0, L = 0.0
    cdef bint lower = True
    Garr = np.zeros((d, d), dtype=np.complex128)
    cdef double[:, ::1] G = Garr.view(np.float64)
    cdef double[:, ::1] R = np.zeros((d, 2 * d))
    with nogil:
        for a in range(d):
            for b in range(2 * d):
                t += Tv[a, b] * Tv[a, b]
                if b >= 2 * (a + 1) and Tv[a, b] != 0.0:
                    lower = False
        if lower and t > 0.0:
            L = _loglik_R(Tv, Vv, nv, R, &N)
            if L != -INFINITY:
                L -= N * log(t)
                _grad(Tv, R, N / t, G)
    if not lower:
        raise ValueError("compiled kernel expects a lower-triangular factor")
    if t <= 0.0 or L == -INFINITY:
        return -INFINITY, np.zeros((d, d), dtype=np.complex128)
    return L, Garr


def projector_probs(rho, V):
    cdef const double[:, ::1] rv = np.ascontiguousarray(rho, dtype=np.complex128).view(np.float64)
    cdef const double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t d = rv.shape[0]
    cdef Py_ssize_t m = Vv.shape[0]
    cdef Py_ssize_t j, a, b
    cdef double sr, si, rr, ri, vr, vi, acc
    out = np.empty(m)
    cdef double[::1] p = out
    with nogil:
        for j in range(m):
            acc = 0.0
            for a in range(d):
                sr = 0.0
                si = 0.0
                for b in range(d):
                    rr = rv[a, 2 * b]
                    ri = rv[a, 2 * b + 1]
                    vr = Vv[j, 2 * b]
                    vi = Vv[j, 2 * b + 1]
                    sr = sr + rr * vr - ri * vi
                    si = si + rr * vi + ri * vr
                acc = acc + Vv[j, 2 * a] * sr + Vv[j, 2 * a + 1] * si
            p[j] = acc
    return out
