"""Pure numpy implementations of the hot numeric kernels.

These are the reference semantics; `_kernels_cy` mirrors them in C. Both
backends expose the exact same signatures and are selected in `kernels`.

All inputs are 1-d / 2-d float64 arrays. Projections return fresh arrays;
`rank_one_update` mutates its matrix arguments in place.
"""

import numpy as np

BACKEND = "python"


def project_box(y, lo, hi):
    return np.minimum(np.maximum(y, lo), hi)


def project_ball(y, center, radius):
    d = y - center
    r = float(np.sqrt(d @ d))
    if r <= radius:
        return y.copy()
    return center + d * (radius / r)


def project_simplex(y):
    """Euclidean projection onto {x >= 0, sum(x) = 1} by sort and threshold."""
    n = y.shape[0]
    s = np.sort(y)[::-1]
    css = np.cumsum(s)
    # largest k with s[k-1] > (css[k-1] - 1) / k
    ks = np.arange(1, n + 1)
    cond = s > (css - 1.0) / ks
    k = int(np.nonzero(cond)[0][-1]) + 1
    tau = (css[k - 1] - 1.0) / k
    return np.maximum(y - tau, 0.0)


def qp_box(anchor, grad, eta, A, lo, hi, x0, tol, max_sweeps):
    """Minimize (x-anchor).g + eta/2 (x-anchor)' A (x-anchor) over a box.

    Cyclic coordinate descent; exact per-coordinate minimization with clamping.
    Valid because the box is coordinate-separable and A is positive definite
    (A >= I throughout this package). Returns (x, sweeps, last_max_move).
    """
    d = anchor.shape[0]
    x = x0.copy()
    delta = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        delta = 0.0
        for k in range(d):
            # partial derivative without the A_kk (x_k - anchor_k) term
            off = grad[k] + eta * (A[k] @ (x - anchor) - A[k, k] * (x[k] - anchor[k]))
            xk = anchor[k] - off / (eta * A[k, k])
            if xk < lo[k]:
                xk = lo[k]
            elif xk > hi[k]:
                xk = hi[k]
            move = abs(xk - x[k])
            if move > delta:
                delta = move
            x[k] = xk
        if delta <= tol:
            break
    return x, sweeps, delta


def _pgd(anchor, grad, eta, A, project, x0, step, tol, max_iters):
    x = x0.copy()
    resid = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        g = grad + eta * (A @ (x - anchor))
        x_new = project(x - step * g)
        resid = float(np.max(np.abs(x_new - x)))
        x = x_new
        if resid <= tol:
            break
    return x, it, resid


def qp_pgd_simplex(anchor, grad, eta, A, x0, step, tol, max_iters):
    """Projected gradient descent for the quadratic prox objective over the simplex."""
    return _pgd(anchor, grad, eta, A, project_simplex, x0, step, tol, max_iters)


def qp_pgd_ball(anchor, grad, eta, A, center, radius, x0, step, tol, max_iters):
    """Projected gradient descent for the quadratic prox objective over a ball."""
    return _pgd(
        anchor, grad, eta, A, lambda y: project_ball(y, center, radius),
        x0, step, tol, max_iters,
    )


def rank_one_update(A, A_inv, g):
    """In-place A += g g' with Sherman-Morrison update of A_inv.

    Returns (qf, gsq) where qf = g' (A + gg')^{-1} g and gsq = g.g.
    For u = g' A^{-1} g the post-update quadratic form is u / (1 + u).
    """
    gsq = float(g @ g)
    if gsq == 0.0:
        return 0.0, 0.0
    A += np.outer(g, g)
    w = A_inv @ g
    u = float(g @ w)
    A_inv -= np.outer(w, w) / (1.0 + u)
    return u / (1.0 + u), gsq
