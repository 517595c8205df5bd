"""Release-gate checks combining exact property tests with rate fits.

Each criterion runs at its stated scale and tolerances; `--quick` halves
replication counts and widens the stochastic tolerances, never tightening
anything. Deterministic checks keep their exact thresholds in both modes.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import curvature, games, geometry, harness, kernels, metrics, schedules
from .learners import GradientSignal, Learner


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{self.index:2d}/12] {status}  {self.name} ({self.seconds:.1f}s): {self.detail}"


def _rng(*key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _pm_instance(sigma):
    return games.PowerManagement(
        gain=[[2.0, 1.0], [1.0, 2.0]],
        target_rates=[0.5, 0.5],
        thermal_noise=[1.0, 1.0],
        upper=[1.0, 1.0],
        sigma=sigma,
    )


def _final_metric(records, name):
    t_final = max(r.t for r in records if r.metric == name)
    return [r.value for r in records if r.metric == name and r.t == t_final]


def _mean_at_final(game, learner, horizon, reps, metric, seed=0, x1=None,
                   known=None, ground_best=None, ground_nash=None):
    vals = []
    names = [learner] * game.n_agents
    kps = [known] * game.n_agents
    for rep in range(reps):
        recs = harness.simulate(game, names, kps, horizon, seed, rep, [metric],
                                x1=x1, ground_best=ground_best,
                                ground_nash=ground_nash)
        vals.extend(_final_metric(recs, metric))
    return float(np.mean(vals))


def criterion_1(quick):
    """Bounds on the expected maximum of iid geometric draws."""
    trials = 5_000 if quick else 10_000
    details = []
    ok = True
    for p0 in (0.2, 0.5):
        for n in (10, 1000):
            stats = schedules.geometric_max_stats(
                p0, n, trials, _rng(1, int(p0 * 10), n))
            hi = (1.0 + math.log(n)) / p0
            good = 1.0 <= stats.mean_max <= hi
            ok = ok and good
            details.append(f"p0={p0} n={n}: {stats.mean_max:.2f} in [1,{hi:.2f}]")
    return ok, "; ".join(details)


def criterion_2(quick):
    """Known-modulus rate: mean squared distance under the 4 G^2/(b^2 T) ceiling."""
    game = _pm_instance(sigma=0.1)
    beta = game.beta()
    gsq = game.gradient_bound_sq()
    horizon = 10_000
    reps = 25 if quick else 50
    nash = metrics.nash_oracle(game)
    mean = _mean_at_final(game, "ogd", horizon, reps, "dist_sq", seed=2,
                          known={"beta": beta}, ground_nash=nash)
    bound = 4.0 * gsq / (beta**2 * horizon)
    return mean <= bound, f"mean dist^2 {mean:.3g} <= bound {bound:.3g}"


def criterion_3(quick):
    """Adaptive multi-agent last-iterate order on the power-control game."""
    game = _pm_instance(sigma=0.1)
    reps = 10 if quick else 20
    nash = metrics.nash_oracle(game)
    grid = [1_000, 10_000, 100_000]
    means = [
        _mean_at_final(game, "adaogd", T, reps, "dist_sq", seed=3,
                       ground_nash=nash)
        for T in grid
    ]
    slope = metrics.fit_rate(grid, means)
    lo, hi = (-1.45, -0.60) if quick else (-1.35, -0.70)
    drop = means[0] / means[-1]
    need_drop = 8.0 if quick else 10.0
    ok = lo <= slope <= hi and drop >= need_drop
    return ok, (f"slope {slope:.3f} in [{lo},{hi}], "
                f"decrease x{drop:.1f} >= {need_drop}")


def criterion_4(quick):
    """Adaptive single-agent regret order on a strongly convex stream."""
    game = games.QuadraticStream(beta=1.0, lower=[-1.0] * 5, upper=[1.0] * 5,
                                 stream_seed=0, sigma=0.5)
    reps = 10 if quick else 20
    ratios = {}
    means = {}
    for T in (1_000, 100_000):
        best = metrics.best_in_hindsight(game, T)
        means[T] = _mean_at_final(game, "adaogd", T, reps, "regret", seed=4,
                                  ground_best=best)
        ratios[T] = means[T] / math.log(T) ** 2
    factor = 2.5 if quick else 2.0
    per_round = means[100_000] / 100_000
    ok = ratios[100_000] <= factor * ratios[1_000] and per_round <= 0.01
    return ok, (f"regret/ln^2: {ratios[1_000]:.3g} -> {ratios[100_000]:.3g} "
                f"(factor limit {factor}); regret/T {per_round:.2e} <= 0.01")


def criterion_5(quick):
    """Newton baseline on the portfolio stream: quadratic-form ceiling and
    a stable regret/(d ln T) ratio."""
    game = games.PortfolioStream(dim=5, lo=0.5, hi=2.0, stream_seed=0)
    gt = game.ons_ground_truth()
    horizon = 100_000
    best = metrics.best_in_hindsight(game, horizon)
    best_cum = dict(zip(harness.log_grid(horizon),
                        game.cum_costs(best.point, harness.log_grid(horizon))))
    lr = Learner("ons", game.sets[0], game.joint_set.canonical_point(), horizon,
                 known_params=gt)
    rng = _rng(5)
    logged = np.zeros(horizon + 1, dtype=bool)
    logged[np.asarray(harness.log_grid(horizon))] = True
    cum = 0.0
    qf_ok = True
    ratios = []
    for t in range(1, horizon + 1):
        x = lr.action
        cum += game.cost(x, t)
        if logged[t]:
            qf_ok = qf_ok and curvature.qf_bound_check(
                lr.curvature, max(lr.curvature.update_count, 1), gt["G"])
            if t >= 1000:
                ratios.append(cum - best_cum[t])
                ratios[-1] /= 5 * math.log(t)
        sig = game.signals(x, t, rng)[0]
        lr.step(sig)
    qf_ok = qf_ok and curvature.qf_bound_check(lr.curvature,
                                               lr.curvature.update_count, gt["G"])
    anchor = ratios[0]
    factor = 1.3 if quick else 1.2
    ratio_ok = all(r <= factor * anchor + 1e-12 for r in ratios)
    ok = qf_ok and ratio_ok
    return ok, (f"qf ceiling {'held' if qf_ok else 'violated'}; "
                f"ratio anchor {anchor:.3g}, max {max(ratios):.3g} "
                f"(limit x{factor})")


def criterion_6(quick):
    """Adaptive Newton regret order on the portfolio stream."""
    game = games.PortfolioStream(dim=5, lo=0.5, hi=2.0, stream_seed=0)
    reps = 10 if quick else 20
    ratios = {}
    for T in (1_000, 100_000):
        best = metrics.best_in_hindsight(game, T)
        mean = _mean_at_final(game, "adaons", T, reps, "regret", seed=6,
                              ground_best=best)
        ratios[T] = mean / (5 * math.log(T) ** 2)
    factor = 2.5 if quick else 2.0
    ok = ratios[100_000] <= factor * ratios[1_000]
    return ok, (f"regret/(d ln^2): {ratios[1_000]:.3g} -> "
                f"{ratios[100_000]:.3g} (factor limit {factor})")


def _ec_instance():
    return games.EcQuadratic(a=[[1.0, 0.5], [0.5, 1.0]], dims=[1, 1])


def criterion_7(quick):
    """Time-average gap decay in the two-agent exp-concave quadratic game."""
    game = _ec_instance()
    G = 1.5 * math.sqrt(2.0)
    D = game.joint_set.diameter()
    alpha = 2.0 * game.monotone_modulus() / G**2
    known = {"G": G, "D": D, "alpha": alpha}
    grid = [1_000, 10_000, 100_000]
    x1 = [0.9, -0.7]
    limit = -0.60 if quick else -0.70
    details = []
    ok = True
    for name, reps, kp in (("ons", 1, known), ("adaons", 3 if quick else 5, None)):
        means = [
            _mean_at_final(game, name, T, reps, "gap_avg", seed=7, x1=x1,
                           known=kp)
            for T in grid
        ]
        slope = metrics.fit_rate(grid, means)
        ok = ok and slope <= limit
        details.append(f"{name} slope {slope:.3f}")
    return ok, f"{'; '.join(details)} (limit {limit})"


def criterion_8(quick):
    """Single-retailer ordering converges near the critical fractile."""
    game = games.NewsvendorSA(price=2.0, cost=1.0, x_bar=100.0)
    reps = 10 if quick else 20
    nash = metrics.nash_oracle(game)
    mean = _mean_at_final(game, "adaogd", 100_000, reps, "dist_sq", seed=8,
                          x1=[45.0], ground_nash=nash)
    return mean <= 4.0, (f"mean (x_T - {nash.point[0]:.0f})^2 = {mean:.3g} <= 4.0")


def criterion_9(quick):
    """Censored-demand signal is unbiased for p F(x) - p + c."""
    game = games.NewsvendorSA(price=2.0, cost=1.0, x_bar=100.0)
    n = 1_000_000
    draws = game.signal_matrix(np.array([30.0]), 1, _rng(9), n)[:, 0]
    target = 2.0 * 0.3 - 2.0 + 1.0
    mean = float(draws.mean())
    stderr = float(draws.std(ddof=1) / math.sqrt(n))
    ok = abs(mean - target) <= 4.0 * stderr
    return ok, f"mean {mean:.5f} vs {target} (4 se = {4*stderr:.5f})"


def _grid_min(objective, lo, hi, levels=3, pts=61):
    lo = lo.copy()
    hi = hi.copy()
    best_x, best_q = None, math.inf
    for _ in range(levels):
        xs = np.linspace(lo[0], hi[0], pts)
        ys = np.linspace(lo[1], hi[1], pts)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        Q = objective(X, Y)
        idx = np.unravel_index(np.argmin(Q), Q.shape)
        if Q[idx] < best_q:
            best_q = float(Q[idx])
            best_x = np.array([X[idx], Y[idx]])
        span_x = (hi[0] - lo[0]) / (pts - 1)
        span_y = (hi[1] - lo[1]) / (pts - 1)
        lo = np.maximum([best_x[0] - 2 * span_x, best_x[1] - 2 * span_y], lo)
        hi = np.minimum([best_x[0] + 2 * span_x, best_x[1] + 2 * span_y], hi)
    return best_x, best_q


def criterion_10(quick):
    """Dual-route checks: quadratic prox vs grids, simplex projection vs
    support enumeration, rank-1 inverse vs direct inversion."""
    rng = _rng(10)
    # (a) 2-d box prox vs refined grid
    worst_gap = 0.0
    for _ in range(100):
        box = geometry.Box([-1.0, -1.0], [1.0, 1.0])
        cs = curvature.CurvatureState(2)
        for _ in range(3):
            cs.update(rng.standard_normal(2))
        anchor = box.sample(rng)
        grad = rng.standard_normal(2)
        eta = float(rng.random() * 2.0 + 0.1)
        x = geometry.project_quadratic(box, anchor, grad, eta, cs)

        def q(px, py):
            dx = px - anchor[0]
            dy = py - anchor[1]
            quad = (cs.matrix[0, 0] * dx * dx + 2 * cs.matrix[0, 1] * dx * dy
                    + cs.matrix[1, 1] * dy * dy)
            return grad[0] * dx + grad[1] * dy + 0.5 * eta * quad

        _, grid_q = _grid_min(q, box.lower, box.upper)
        worst_gap = max(worst_gap, float(q(x[0], x[1]) - grid_q))
    ok_a = worst_gap <= 1e-6

    # (b) simplex projection vs support enumeration
    worst_b = 0.0
    for d in range(1, 7):
        for _ in range(200):
            y = rng.standard_normal(d) * 2.0
            worst_b = max(worst_b, float(np.max(np.abs(
                kernels.project_simplex(y) - _simplex_by_enumeration(y)))))
    ok_b = worst_b <= 1e-10

    # (c) rank-1 inverse maintenance vs direct inversion
    worst_c = 0.0
    for d in (3, 8):
        cs = curvature.CurvatureState(d)
        for _ in range(100):
            cs.update(rng.standard_normal(d))
        worst_c = max(worst_c, float(np.max(np.abs(
            cs.inverse - np.linalg.inv(cs.matrix)))))
    ok_c = worst_c <= 1e-8

    ok = ok_a and ok_b and ok_c
    return ok, (f"prox gap {worst_gap:.2e} <= 1e-6; simplex {worst_b:.2e} "
                f"<= 1e-10; inverse {worst_c:.2e} <= 1e-8")


def _simplex_by_enumeration(y):
    d = y.shape[0]
    best, best_d = None, math.inf
    for bits in range(1, 2**d):
        S = [i for i in range(d) if (bits >> i) & 1]
        tau = (y[S].sum() - 1.0) / len(S)
        x = np.zeros(d)
        x[S] = y[S] - tau
        if np.min(x[S]) < -1e-12:
            continue
        dist = float(np.sum((x - y) ** 2))
        if dist < best_d:
            best, best_d = x, dist
    return best


def criterion_11(quick):
    """Curvature calculators validated by sampled monotonicity probes and a
    finite-difference Hessian floor."""
    pairs = 10_000
    pm = _pm_instance(sigma=0.0)
    rep_pm = games.monotonicity_probe(pm, pm.beta(), pairs, _rng(11, 1))
    nv = games.NewsvendorMA(price=2.0, costs=[1.0, 1.0], x_bars=[1.0, 1.0])
    rep_nv = games.monotonicity_probe(nv, nv.beta(), pairs, _rng(11, 2))

    rng = _rng(11, 3)
    beta_nv = nv.beta()
    worst = math.inf
    for _ in range(1000):
        x = nv.joint_set.sample(rng)
        h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            J[:, j] = (nv.field(x + e) - nv.field(x - e)) / (2 * h)
        lam = float(np.linalg.eigvalsh(0.5 * (J + J.T))[0])
        worst = min(worst, lam)
    hess_ok = worst >= beta_nv - 1e-6
    ok = rep_pm.passed and rep_nv.passed and hess_ok
    return ok, (f"pm min ratio {rep_pm.worst:.4f} >= {rep_pm.claim:.4f}; "
                f"nv min ratio {rep_nv.worst:.4f} >= {rep_nv.claim:.4f}; "
                f"hessian floor {worst:.4f} >= {beta_nv - 1e-6:.4f}")


def criterion_12(quick):
    """Decentralized updates (bitwise) and byte-identical CSV replays."""
    import tempfile
    from pathlib import Path

    pm = _pm_instance(sigma=0.0)
    horizon = 300
    fixed = [pm.field(pm.joint_set.sample(_rng(12, t)), 1)[:1] * 0.5
             for t in range(horizon)]

    def run_world(other_algorithm):
        a1 = Learner("adaogd", pm.sets[0], np.array([0.5]), horizon,
                     rng=harness.substream(12, 0, 1000))
        if other_algorithm == "adaogd":
            a2 = Learner("adaogd", pm.sets[1], np.array([0.5]), horizon,
                         rng=harness.substream(12, 0, 1001))
        else:
            a2 = Learner("ons", pm.sets[1], np.array([0.5]), horizon,
                         known_params={"G": 1.0, "D": 1.0, "alpha": 1.0})
        traj = []
        for t in range(horizon):
            joint = np.array([a1.action[0], a2.action[0]])
            sig2 = pm.field(joint, 1)[1:]
            a1.step(GradientSignal(fixed[t], exact=True))
            a2.step(GradientSignal(sig2, exact=True))
            traj.append(a1.action[0])
        return traj

    bitwise_ok = run_world("adaogd") == run_world("ons")

    doc = {
        "game": {"game": "power_management",
                 "params": {"gain": [[2.0, 1.0], [1.0, 2.0]],
                            "target_rates": [0.5, 0.5],
                            "thermal_noise": [1.0, 1.0],
                            "upper": [1.0, 1.0]},
                 "noise": {"sigma": 0.1}},
        "learners": "adaogd",
        "T": 200,
        "replications": 3,
        "seed": 99,
        "metrics": ["dist_sq"],
    }
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for i, workers in enumerate((1, 1, 2)):
            cfg_doc = dict(doc)
            cfg_doc["output"] = str(Path(tmp) / f"run{i}.csv")
            cfg_doc["workers"] = workers
            cfg = harness.parse_config(cfg_doc)
            harness.run_experiment(cfg)
            outs.append(Path(cfg_doc["output"]).read_bytes())
        csv_ok = outs[0] == outs[1] == outs[2]
    ok = bitwise_ok and csv_ok
    return ok, (f"agent-1 trajectory bitwise equal: {bitwise_ok}; "
                f"CSV replay byte-identical (incl. workers=2): {csv_ok}")


CRITERIA = [
    ("geometric-max bounds", criterion_1),
    ("known-modulus last-iterate rate", criterion_2),
    ("adaptive last-iterate order", criterion_3),
    ("adaptive regret order (strongly convex)", criterion_4),
    ("newton baseline regret and qf ceiling", criterion_5),
    ("adaptive newton regret order", criterion_6),
    ("exp-concave game gap order", criterion_7),
    ("newsvendor convergence", criterion_8),
    ("newsvendor estimator unbiasedness", criterion_9),
    ("oracle equivalences", criterion_10),
    ("curvature-parameter probes", criterion_11),
    ("decentralization and determinism", criterion_12),
]


def run_criterion(index, quick=False):
    name, fn = CRITERIA[index - 1]
    start = time.perf_counter()
    passed, detail = fn(quick)
    return CriterionResult(index, name, passed, detail,
                           time.perf_counter() - start)


def run_all(quick=False, indices=None):
    results = []
    for i in range(1, len(CRITERIA) + 1):
        if indices and i not in indices:
            continue
        results.append(run_criterion(i, quick))
    return results
