"""Feasible sets (box, ball, simplex, products), projections and diameters.

Euclidean projections have closed forms per variant. The quadratic prox
problem

    argmin_{x in set}  (x - anchor).g + eta/2 (x - anchor)' A (x - anchor)

is solved by cyclic coordinate descent for boxes, an exact active-set KKT
solve for the simplex, and projected gradient descent for balls with a
non-scalar A and for product sets.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractViolation, SolverError

TOL_QP = 1e-10
MAX_QP_ITERS = 10_000
FEAS_TOL = 1e-12


def _vec(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _vec(self.lower))
        object.__setattr__(self, "upper", _vec(self.upper))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ContractViolation("box bounds must be 1-d vectors of equal length")
        if not np.all(np.isfinite(self.lower)) or not np.all(np.isfinite(self.upper)):
            raise ContractViolation("box bounds must be finite")
        if np.any(self.lower > self.upper):
            raise ContractViolation("box requires lower <= upper componentwise")

    @property
    def dim(self):
        return self.lower.shape[0]

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, tol=FEAS_TOL):
        x = _vec(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, y):
        return kernels.project_box(_vec(y), self.lower, self.upper)

    def canonical_point(self):
        return 0.5 * (self.lower + self.upper)

    def sample(self, rng):
        return self.lower + rng.random(self.dim) * (self.upper - self.lower)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if self.center.ndim != 1:
            raise ContractViolation("ball center must be a 1-d vector")
        if not self.radius > 0:
            raise ContractViolation("ball radius must be positive")

    @property
    def dim(self):
        return self.center.shape[0]

    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x, tol=FEAS_TOL):
        x = _vec(x)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def project(self, y):
        return kernels.project_ball(_vec(y), self.center, self.radius)

    def canonical_point(self):
        return self.center.copy()

    def sample(self, rng):
        # uniform over the ball: random direction, radius ~ U^(1/d)
        z = rng.standard_normal(self.dim)
        z /= np.linalg.norm(z)
        r = self.radius * rng.random() ** (1.0 / self.dim)
        return self.center + r * z


@dataclass(frozen=True)
class Simplex:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ContractViolation("simplex dimension must be >= 1")

    def diameter(self):
        # distance between two vertices e_i, e_j; the 1-d simplex is a point
        return float(np.sqrt(2.0)) if self.dim >= 2 else 0.0

    def contains(self, x, tol=FEAS_TOL):
        x = _vec(x)
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol * self.dim)

    def project(self, y):
        return kernels.project_simplex(_vec(y))

    def canonical_point(self):
        return np.full(self.dim, 1.0 / self.dim)

    def sample(self, rng):
        return rng.dirichlet(np.ones(self.dim))


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ContractViolation("product set needs at least one factor")

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    def slices(self):
        out, off = [], 0
        for f in self.factors:
            out.append(slice(off, off + f.dim))
            off += f.dim
        return out

    def diameter(self):
        return float(np.sqrt(sum(f.diameter() ** 2 for f in self.factors)))

    def contains(self, x, tol=FEAS_TOL):
        x = _vec(x)
        if x.shape[0] != self.dim:
            return False
        return all(f.contains(x[s], tol) for f, s in zip(self.factors, self.slices()))

    def project(self, y):
        y = _vec(y)
        out = np.empty(self.dim)
        for f, s in zip(self.factors, self.slices()):
            out[s] = f.project(y[s])
        return out

    def canonical_point(self):
        return np.concatenate([f.canonical_point() for f in self.factors])

    def sample(self, rng):
        return np.concatenate([f.sample(rng) for f in self.factors])


def diameter(feasible_set):
    return feasible_set.diameter()


def project_euclidean(feasible_set, y):
    y = _vec(y)
    if y.shape[0] != feasible_set.dim:
        raise ContractViolation(
            f"point dimension {y.shape[0]} != set dimension {feasible_set.dim}"
        )
    return feasible_set.project(y)


def _is_scalar_matrix(A):
    d = A.shape[0]
    if d == 1:
        return True
    a = A[0, 0]
    return bool(np.all(A == a * np.eye(d)))


def _simplex_qp_exact(simplex, anchor, grad, eta, A, newton):
    """Exact KKT solve of the prox objective over the simplex.

    Primal active-set iteration on the support, with full support
    enumeration as a finite fallback. A >= I makes every reduced system
    nonsingular.
    """
    d = simplex.dim
    b = eta * (A @ anchor) - grad

    def solve_support(S):
        AS = eta * A[np.ix_(S, S)]
        rhs = np.stack([b[S], np.ones(len(S))], axis=1)
        sol = np.linalg.solve(AS, rhs)
        mb, m1 = sol[:, 0], sol[:, 1]
        lam = (float(np.sum(mb)) - 1.0) / float(np.sum(m1))
        xS = mb - lam * m1
        return xS, lam

    def duals_ok(S, x, lam):
        mask = np.ones(d, dtype=bool)
        mask[S] = False
        if not np.any(mask):
            return True, None
        mu = eta * (A[mask] @ (x - anchor)) + grad[mask] + lam
        j = int(np.argmin(mu))
        if mu[j] >= -1e-10 * (1.0 + abs(lam)):
            return True, None
        return False, np.nonzero(mask)[0][j]

    warm = kernels.project_simplex(newton)
    S = list(np.nonzero(warm > 0)[0])
    if not S:
        S = [int(np.argmax(warm))]

    for _ in range(4 * d + 8):
        xS, lam = solve_support(S)
        if np.min(xS) < -1e-12:
            S.pop(int(np.argmin(xS)))
            if not S:
                break
            continue
        x = np.zeros(d)
        x[S] = np.maximum(xS, 0.0)
        ok, j = duals_ok(S, x, lam)
        if ok:
            return x
        S.append(int(j))
        S.sort()

    # finite fallback: enumerate supports (small d only in practice)
    if d > 16:
        raise SolverError("simplex QP active set cycled and d is too large to enumerate")
    best_x, best_q = None, np.inf
    for mask_bits in range(1, 2**d):
        S = [i for i in range(d) if (mask_bits >> i) & 1]
        xS, lam = solve_support(S)
        if np.min(xS) < -1e-10:
            continue
        x = np.zeros(d)
        x[S] = np.maximum(xS, 0.0)
        q = float((x - anchor) @ grad + 0.5 * eta * (x - anchor) @ A @ (x - anchor))
        if q < best_q:
            best_x, best_q = x, q
    if best_x is None:
        raise SolverError("simplex QP enumeration found no feasible support")
    return best_x


def project_quadratic(feasible_set, anchor, gradient, eta, curvature=None):
    """Prox step argmin (x-anchor).g + eta/2 |x-anchor|_A^2 over the set.

    `curvature` is a CurvatureState (or None for the identity metric, in
    which case the step reduces to a Euclidean projection). Raises
    SolverError if the iterative path fails to converge.
    """
    anchor = _vec(anchor)
    gradient = _vec(gradient)
    if not eta > 0:
        raise ContractViolation("eta must be positive")
    if anchor.shape[0] != feasible_set.dim or gradient.shape[0] != feasible_set.dim:
        raise ContractViolation("anchor/gradient dimension mismatch with set")

    if curvature is None or curvature.is_identity:
        return project_euclidean(feasible_set, anchor - gradient / eta)

    A = curvature.matrix
    A_inv = curvature.inverse
    newton = anchor - (A_inv @ gradient) / eta

    if isinstance(feasible_set, Box):
        x0 = kernels.project_box(newton, feasible_set.lower, feasible_set.upper)
        x, _, delta = kernels.qp_box(
            anchor, gradient, eta, A, feasible_set.lower, feasible_set.upper,
            x0, 1e-13 * (1.0 + float(np.max(np.abs(anchor)))), MAX_QP_ITERS,
        )
        if not np.isfinite(delta) or delta > 1e-8:
            raise SolverError("box QP coordinate descent stalled", best=x, residual=delta)
        return x

    if isinstance(feasible_set, Simplex):
        return _simplex_qp_exact(feasible_set, anchor, gradient, eta, A, newton)

    if isinstance(feasible_set, Ball) and _is_scalar_matrix(A):
        # scalar metric: the A-norm ball projection is the Euclidean one
        return feasible_set.project(anchor - gradient / (eta * A[0, 0]))

    # generic path: projected gradient descent with step 1/(eta Lmax)
    step = 1.0 / (eta * curvature.lmax_bound)
    tol = 1e-12 * (1.0 + float(np.max(np.abs(anchor))))
    x0 = feasible_set.project(newton)
    if isinstance(feasible_set, Ball):
        x, iters, resid = kernels.qp_pgd_ball(
            anchor, gradient, eta, A, feasible_set.center, feasible_set.radius,
            x0, step, tol, MAX_QP_ITERS,
        )
    else:
        x, resid, iters = x0, np.inf, 0
        for iters in range(1, MAX_QP_ITERS + 1):
            g = gradient + eta * (A @ (x - anchor))
            x_new = feasible_set.project(x - step * g)
            resid = float(np.max(np.abs(x_new - x)))
            x = x_new
            if resid <= tol:
                break
    if resid > tol:
        raise SolverError(
            f"quadratic prox PGD did not converge in {iters} iterations",
            best=x, residual=resid,
        )
    return x
