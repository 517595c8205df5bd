# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels; same semantics and signatures as `_kernels_py`."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY

cnp.import_array()

BACKEND = "cython"


def project_box(cnp.float64_t[::1] y, cnp.float64_t[::1] lo, cnp.float64_t[::1] hi):
    cdef Py_ssize_t n = y.shape[0], i
    out = np.empty(n)
    cdef cnp.float64_t[::1] o = out
    cdef double v
    for i in range(n):
        v = y[i]
        if v < lo[i]:
            v = lo[i]
        elif v > hi[i]:
            v = hi[i]
        o[i] = v
    return out


def project_ball(cnp.float64_t[::1] y, cnp.float64_t[::1] center, double radius):
    cdef Py_ssize_t n = y.shape[0], i
    out = np.empty(n)
    cdef cnp.float64_t[::1] o = out
    cdef double r2 = 0.0, r, scale
    for i in range(n):
        o[i] = y[i] - center[i]
        r2 += o[i] * o[i]
    r = sqrt(r2)
    if r <= radius:
        for i in range(n):
            o[i] = y[i]
        return out
    scale = radius / r
    for i in range(n):
        o[i] = center[i] + o[i] * scale
    return out


def project_simplex(cnp.float64_t[::1] y):
    cdef Py_ssize_t n = y.shape[0], i, k
    s_arr = np.sort(np.asarray(y))[::-1].copy()
    cdef cnp.float64_t[::1] s = s_arr
    cdef double css = 0.0, tau = 0.0
    k = 0
    for i in range(n):
        css += s[i]
        if s[i] > (css - 1.0) / (i + 1):
            k = i + 1
            tau = (css - 1.0) / (i + 1)
    out = np.empty(n)
    cdef cnp.float64_t[::1] o = out
    cdef double v
    for i in range(n):
        v = y[i] - tau
        o[i] = v if v > 0.0 else 0.0
    return out


def qp_box(cnp.float64_t[::1] anchor, cnp.float64_t[::1] grad, double eta,
           cnp.float64_t[:, ::1] A, cnp.float64_t[::1] lo, cnp.float64_t[::1] hi,
           cnp.float64_t[::1] x0, double tol, int max_sweeps):
    cdef Py_ssize_t d = anchor.shape[0], k, j
    x_arr = np.asarray(x0).copy()
    cdef cnp.float64_t[::1] x = x_arr
    cdef double delta = INFINITY, acc, xk, move
    cdef int sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        delta = 0.0
        for k in range(d):
            acc = 0.0
            for j in range(d):
                if j != k:
                    acc += A[k, j] * (x[j] - anchor[j])
            xk = anchor[k] - (grad[k] + eta * acc) / (eta * A[k, k])
            if xk < lo[k]:
                xk = lo[k]
            elif xk > hi[k]:
                xk = hi[k]
            move = fabs(xk - x[k])
            if move > delta:
                delta = move
            x[k] = xk
        if delta <= tol:
            break
    return x_arr, sweeps, delta


cdef void _qp_grad(cnp.float64_t[::1] anchor, cnp.float64_t[::1] grad, double eta,
                   cnp.float64_t[:, ::1] A, cnp.float64_t[::1] x,
                   cnp.float64_t[::1] out) noexcept:
    cdef Py_ssize_t d = x.shape[0], i, j
    cdef double acc
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc += A[i, j] * (x[j] - anchor[j])
        out[i] = grad[i] + eta * acc


cdef double _absorb(cnp.float64_t[::1] x_new, cnp.float64_t[::1] x):
    # copy x_new into x, returning the max absolute move
    cdef Py_ssize_t i, d = x.shape[0]
    cdef double r = 0.0, diff
    for i in range(d):
        diff = fabs(x_new[i] - x[i])
        if diff > r:
            r = diff
        x[i] = x_new[i]
    return r


def qp_pgd_simplex(cnp.float64_t[::1] anchor, cnp.float64_t[::1] grad, double eta,
                   cnp.float64_t[:, ::1] A, cnp.float64_t[::1] x0,
                   double step, double tol, int max_iters):
    cdef Py_ssize_t d = anchor.shape[0], i
    x_arr = np.asarray(x0).copy()
    cdef cnp.float64_t[::1] x = x_arr
    g_arr = np.empty(d)
    cdef cnp.float64_t[::1] g = g_arr
    y_arr = np.empty(d)
    cdef cnp.float64_t[::1] y = y_arr
    cdef double resid = INFINITY
    cdef int it = 0
    while it < max_iters:
        it += 1
        _qp_grad(anchor, grad, eta, A, x, g)
        for i in range(d):
            y[i] = x[i] - step * g[i]
        resid = _absorb(project_simplex(y), x)
        if resid <= tol:
            break
    return x_arr, it, resid


def qp_pgd_ball(cnp.float64_t[::1] anchor, cnp.float64_t[::1] grad, double eta,
                cnp.float64_t[:, ::1] A, cnp.float64_t[::1] center, double radius,
                cnp.float64_t[::1] x0, double step, double tol, int max_iters):
    cdef Py_ssize_t d = anchor.shape[0], i
    x_arr = np.asarray(x0).copy()
    cdef cnp.float64_t[::1] x = x_arr
    g_arr = np.empty(d)
    cdef cnp.float64_t[::1] g = g_arr
    y_arr = np.empty(d)
    cdef cnp.float64_t[::1] y = y_arr
    cdef double resid = INFINITY
    cdef int it = 0
    while it < max_iters:
        it += 1
        _qp_grad(anchor, grad, eta, A, x, g)
        for i in range(d):
            y[i] = x[i] - step * g[i]
        resid = _absorb(project_ball(y, center, radius), x)
        if resid <= tol:
            break
    return x_arr, it, resid


def rank_one_update(cnp.float64_t[:, ::1] A, cnp.float64_t[:, ::1] A_inv,
                    cnp.float64_t[::1] g):
    cdef Py_ssize_t d = g.shape[0], i, j
    cdef double gsq = 0.0, u = 0.0, scale
    for i in range(d):
        gsq += g[i] * g[i]
    if gsq == 0.0:
        return 0.0, 0.0
    w_arr = np.empty(d)
    cdef cnp.float64_t[::1] w = w_arr
    for i in range(d):
        for j in range(d):
            A[i, j] += g[i] * g[j]
    for i in range(d):
        w[i] = 0.0
        for j in range(d):
            w[i] += A_inv[i, j] * g[j]
    for i in range(d):
        u += g[i] * w[i]
    scale = 1.0 / (1.0 + u)
    for i in range(d):
        for j in range(d):
            A_inv[i, j] -= w[i] * w[j] * scale
    return u * scale, gsq
