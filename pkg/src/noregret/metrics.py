"""Regret, distance-to-equilibrium, gap function and rate-slope estimation.

Ground truths are computed by independent means: closed forms where the
instance admits one, otherwise deterministic projected-gradient solves with
tight residual targets.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, SolverError

GT_TOL = 1e-10
FD_STEP = 1e-5  # central-difference scale for probe gradients


@dataclass(frozen=True)
class BestFixedAction:
    point: np.ndarray
    value: float


@dataclass(frozen=True)
class NashEquilibrium:
    point: np.ndarray
    residual: float


def _pgd_minimize(value, grad, project, x0, tol=GT_TOL, max_iters=200_000):
    """Deterministic projected gradient descent with backtracking.

    Stops when the unit-step gradient mapping |x - P(x - grad(x))| falls
    below tol. Raises SolverError with the best iterate otherwise.
    """
    x = project(np.asarray(x0, dtype=np.float64))
    fx = value(x)
    step = 1.0
    resid = math.inf
    for _ in range(max_iters):
        g = grad(x)
        resid = float(np.linalg.norm(x - project(x - g)))
        if resid <= tol:
            return x, resid
        while True:
            y = project(x - step * g)
            fy = value(y)
            dx = y - x
            if fy <= fx + float(g @ dx) + float(dx @ dx) / (2.0 * step) + 1e-18:
                break
            step *= 0.5
            if step < 1e-18:
                raise SolverError("backtracking step underflow", best=x,
                                  residual=resid)
        x, fx = y, fy
        step *= 1.25
    raise SolverError("projected gradient descent did not reach tolerance",
                      best=x, residual=resid)


class _StaticMetric:
    """Fixed PD matrix presented through the curvature-state interface."""

    is_identity = False

    def __init__(self, H):
        self.matrix = H
        self.inverse = np.linalg.inv(H)
        self.lmax_bound = float(np.linalg.eigvalsh(H)[-1])


def _projected_newton(value, grad, hess, feasible_set, x0, tol=GT_TOL,
                      max_iters=200):
    """Prox-Newton with exact quadratic subproblems over the set.

    Any positive definite subproblem metric has its fixed points exactly at
    the constrained stationary points, so the light damping below does not
    bias the solution; it only guards the linear algebra.
    """
    from . import geometry as _geometry

    x = feasible_set.project(np.asarray(x0, dtype=np.float64))
    resid = math.inf
    for _ in range(max_iters):
        g = grad(x)
        resid = float(np.linalg.norm(x - feasible_set.project(x - g)))
        if resid <= tol:
            return x, resid
        H = hess(x) + 1e-9 * np.eye(x.shape[0])
        cand = _geometry.project_quadratic(feasible_set, x, g, 1.0,
                                           _StaticMetric(H))
        fx = value(x)
        theta = 1.0
        y = cand
        while value(y) > fx + 1e-15 and theta > 1e-8:
            theta *= 0.5
            y = feasible_set.project(x + theta * (cand - x))
        x = y
    raise SolverError("projected newton did not reach tolerance", best=x,
                      residual=resid)


def best_in_hindsight(game, horizon):
    """Argmin over the set of the cumulative cost of the first `horizon` rounds."""
    closed = game.hindsight_best(horizon)
    if closed is not None:
        x = np.asarray(closed, dtype=np.float64)
        return BestFixedAction(x, float(game.cum_costs(x, [horizon])[0]))
    if game.cost(game.joint_set.canonical_point(), 1) is None:
        raise ContractViolation("game does not define per-round costs")

    def value(x):
        return float(game.cum_costs(x, [horizon])[0]) / horizon

    def grad(x):
        return _avg_field(game, x, horizon)

    hess = getattr(game, "avg_hessian", None)
    if hess is not None:
        x, _ = _projected_newton(value, grad, lambda z: hess(z, horizon),
                                 game.joint_set,
                                 game.joint_set.canonical_point())
    else:
        x, _ = _pgd_minimize(value, grad, game.joint_set.project,
                             game.joint_set.canonical_point())
    return BestFixedAction(x, float(game.cum_costs(x, [horizon])[0]))


def _avg_field(game, x, horizon):
    # vectorized per stream type; generic fallback averages round fields
    name = getattr(game, "name", "")
    if name == "portfolio_stream":
        a = game.prices(horizon)
        return -(a / (a @ x)[:, None]).mean(axis=0)
    if name == "linear_regression_stream":
        a, b = game.rounds(horizon)
        return (2.0 * (a @ x - b)[:, None] * a).mean(axis=0)
    acc = np.zeros(game.dim)
    for t in range(1, horizon + 1):
        acc += game.field(x, t)
    return acc / horizon


def regret_curve(ts, cum_alg_costs, game, ground):
    """Cumulative regret at each logged round against the horizon optimum."""
    if not isinstance(ground, BestFixedAction):
        raise ContractViolation("regret needs a best-fixed-action ground truth")
    ts = np.asarray(ts, dtype=np.int64)
    cum_alg = np.asarray(cum_alg_costs, dtype=np.float64)
    if ts.shape != cum_alg.shape:
        raise ContractViolation("logged rounds and cost snapshots disagree")
    return cum_alg - game.cum_costs(ground.point, ts)


def _vi_residual(game, x_star, samples=4096, seed=1):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((0x7A11, seed))))
    v = game.field(x_star, 1)
    worst = 0.0
    for _ in range(samples):
        x = game.joint_set.sample(rng)
        worst = max(worst, float((x_star - x) @ v))
    return worst


def nash_oracle(game, beta=None, samples=4096):
    """Equilibrium point with a sampled variational-inequality residual.

    Closed forms are used where the catalog defines them; otherwise a
    deterministic noiseless field iteration is run: a 1/(beta t) averaging
    phase for global approach, then a constant-step contraction polish.
    """
    x = game.nash_closed_form()
    if x is None:
        if beta is None:
            battr = getattr(game, "beta", None)
            if callable(battr):
                beta = battr()
            elif isinstance(battr, (int, float)):
                beta = float(battr)
            if beta is None and hasattr(game, "monotone_modulus"):
                beta = game.monotone_modulus()
        if beta is None or beta <= 0:
            raise ContractViolation("nash oracle needs a strong monotonicity modulus")
        x = _solve_vi(game, beta)
    x = np.asarray(x, dtype=np.float64)
    resid = _vi_residual(game, x, samples=samples)
    if resid > 1e-8:
        raise SolverError("nash candidate fails the sampled VI check",
                          best=x, residual=resid)
    return NashEquilibrium(x, min(resid, GT_TOL))


def _solve_vi(game, beta, warm_rounds=2000, max_iters=200_000):
    project = game.joint_set.project
    x = game.joint_set.canonical_point()
    for t in range(1, warm_rounds + 1):
        x = project(x - game.field(x, 1) / (beta * (t + 1)))
    # estimate a Lipschitz bound for the polish step
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(0x11)))
    L = beta
    for _ in range(256):
        a = game.joint_set.sample(rng)
        b = game.joint_set.sample(rng)
        nd = float(np.linalg.norm(a - b))
        if nd > 1e-12:
            L = max(L, float(np.linalg.norm(game.field(a, 1) - game.field(b, 1))) / nd)
    step = beta / (1.5 * L * L)
    for _ in range(max_iters):
        y = project(x - step * game.field(x, 1))
        if float(np.linalg.norm(y - project(y - game.field(y, 1)))) <= GT_TOL:
            return y
        x = y
    raise SolverError("noiseless field iteration did not reach tolerance", best=x,
                      residual=float(np.linalg.norm(x - project(x - game.field(x, 1)))))


def last_iterate_distance(actions, ground):
    """Squared distances |x_t - x*|^2 for a sequence of joint actions."""
    if not isinstance(ground, NashEquilibrium):
        raise ContractViolation("distance needs an equilibrium ground truth")
    out = []
    for x in actions:
        d = np.asarray(x, dtype=np.float64) - ground.point
        out.append(float(d @ d))
    return np.asarray(out)


def _fd_gradient(phi, x, h):
    g = np.empty(x.shape[0])
    for j in range(x.shape[0]):
        e = np.zeros(x.shape[0])
        e[j] = h
        g[j] = (phi(x + e) - phi(x - e)) / (2.0 * h)
    return g


def gap_estimate(x_hat, game, starts=8, iters=300, rng=None, extra_samples=64):
    """Lower estimate of sup_x (x_hat - x).v(x) over the feasible set.

    Candidates: x_hat itself (value 0), random feasible samples, and
    multi-start projected gradient ascent with central-difference gradients.
    Always nonnegative.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(0xA9)))
    x_hat = np.asarray(x_hat, dtype=np.float64)
    js = game.joint_set

    def phi(x):
        return float((x_hat - x) @ game.field(x, 1))

    best = 0.0
    cands = [js.sample(rng) for _ in range(extra_samples)]
    cands_sorted = sorted(cands, key=phi, reverse=True)
    seeds = [x_hat.copy()] + cands_sorted[: max(0, starts - 1)]
    for x0 in seeds:
        x = x0
        val = phi(x)
        best = max(best, val)
        step = 0.25 * (1.0 + js.diameter())
        for _ in range(iters):
            h = FD_STEP * (1.0 + float(np.linalg.norm(x)))
            g = _fd_gradient(phi, x, h)
            moved = False
            while step > 1e-12:
                y = js.project(x + step * g)
                vy = phi(y)
                if vy > val + 1e-16:
                    x, val = y, vy
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
            step *= 1.2
        best = max(best, val)
    return max(0.0, best)


def fit_rate(horizons, means):
    """Least-squares slope of log(mean) against log(horizon)."""
    horizons = np.asarray(horizons, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if horizons.shape[0] < 3:
        raise ContractViolation("rate fitting needs at least 3 horizons")
    if np.any(horizons <= 0) or np.any(means <= 0):
        raise ContractViolation("rate fitting needs positive values")
    slope, _ = np.polyfit(np.log(horizons), np.log(means), 1)
    return float(slope)
