"""Experiment plumbing: JSON configs, seeded replication, CSV output.

Reproducibility contract: replication r of an experiment with master seed s
draws its agent-i schedule stream from (s, r, 1000 + i), its oracle stream
from (s, r, 1) and its gap-search stream from (s, r, 2). Records are sorted
before writing, so worker parallelism cannot change the output bytes.
"""

import json
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import games, metrics
from .errors import ConfigError, ContractViolation
from .learners import Learner

TraceRecord = namedtuple("TraceRecord", "seed t metric value")

METRIC_NAMES = ("action", "regret", "dist_sq", "gap_avg", "gap_last")
CONFIG_KEYS = {"game", "game_file", "learners", "T", "T_grid", "replications",
               "seed", "metrics", "known_params", "noise_sigma", "x1",
               "output", "workers"}


def substream(master_seed, *key):
    seq = np.random.SeedSequence((int(master_seed),) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def log_grid(horizon):
    """Logged rounds: powers of two up to the horizon, plus the horizon."""
    ts = []
    t = 1
    while t <= horizon:
        ts.append(t)
        t *= 2
    if ts[-1] != horizon:
        ts.append(horizon)
    return ts


@dataclass
class ExperimentConfig:
    game_doc: dict
    learners: object
    horizon: int
    horizon_grid: list
    replications: int
    seed: int
    metrics: list
    known_params: object
    x1: object
    output: str
    workers: int


def parse_config(doc, base_dir=None):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for k in doc:
        if k not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {k!r}", key=k)
    if ("game" in doc) == ("game_file" in doc):
        raise ConfigError("config needs exactly one of 'game' or 'game_file'",
                          key="game")
    game_doc = doc.get("game")
    if game_doc is None:
        path = Path(doc["game_file"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            game_doc = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read game_file: {exc}", key="game_file")
    if "noise_sigma" in doc:
        game_doc = dict(game_doc)
        game_doc["noise"] = {"sigma": float(doc["noise_sigma"])}

    horizon = doc.get("T")
    grid = doc.get("T_grid")
    if horizon is not None and (not isinstance(horizon, int) or horizon < 1):
        raise ConfigError("T must be an integer >= 1", key="T")
    if grid is not None:
        if (not isinstance(grid, list) or len(grid) < 3
                or any(not isinstance(t, int) or t < 1 for t in grid)):
            raise ConfigError("T_grid must list at least 3 integer horizons",
                              key="T_grid")
    reps = doc.get("replications", 1)
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("replications must be an integer >= 1",
                          key="replications")
    selected = doc.get("metrics", ["action"])
    if not isinstance(selected, list) or not selected:
        raise ConfigError("metrics must be a non-empty list", key="metrics")
    for m in selected:
        if m not in METRIC_NAMES:
            raise ConfigError(f"unknown metric {m!r}", key="metrics")
    workers = doc.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be an integer >= 1", key="workers")
    kp = doc.get("known_params")
    if kp is not None and kp != "calculator" and not isinstance(kp, dict):
        raise ConfigError("known_params must be an object or 'calculator'",
                          key="known_params")
    return ExperimentConfig(
        game_doc=game_doc,
        learners=doc.get("learners", "adaogd"),
        horizon=horizon,
        horizon_grid=grid,
        replications=reps,
        seed=int(doc.get("seed", 0)),
        metrics=list(selected),
        known_params=kp,
        x1=doc.get("x1"),
        output=doc.get("output", "results.csv"),
        workers=workers,
    )


def _calculator_beta(game):
    battr = getattr(game, "beta", None)
    if callable(battr):
        return battr()
    if isinstance(battr, (int, float)):
        return float(battr)
    if hasattr(game, "monotone_modulus"):
        return game.monotone_modulus()
    raise ConfigError("game has no strong-monotonicity calculator",
                      key="known_params")


def resolve_learners(cfg, game):
    names = cfg.learners
    if isinstance(names, str):
        names = [names] * game.n_agents
    if len(names) != game.n_agents:
        raise ConfigError(
            f"got {len(names)} learners for {game.n_agents} agents", key="learners")
    kp = cfg.known_params
    resolved = []
    for name in names:
        if name in ("adaogd", "adaons"):
            resolved.append(None)
        elif kp == "calculator":
            if name == "ogd":
                resolved.append({"beta": _calculator_beta(game)})
            else:
                if not hasattr(game, "ons_ground_truth"):
                    raise ConfigError("game has no (G, D, alpha) calculator; "
                                      "pass known_params explicitly",
                                      key="known_params")
                resolved.append(game.ons_ground_truth())
        else:
            resolved.append(kp)
    for name in names:
        if name in ("ons", "adaons") and not game.exact:
            raise ConfigError(
                "Newton-family learners need exact gradients; this game is noisy",
                key="learners")
    return list(names), resolved


def simulate(game, learner_names, known_params, horizon, master_seed, rep,
             metric_names, x1=None, ground_best=None, ground_nash=None):
    """One replication; returns TraceRecords with seed column = rep."""
    layout = game.layout
    joint0 = (np.asarray(x1, dtype=np.float64) if x1 is not None
              else game.joint_set.canonical_point())
    blocks = layout.split(joint0)
    lrs = [
        Learner(name, game.sets[i], blocks[i], horizon, known_params[i],
                substream(master_seed, rep, 1000 + i))
        for i, name in enumerate(learner_names)
    ]
    oracle_rng = substream(master_seed, rep, 1)
    gap_rng = substream(master_seed, rep, 2)

    want_action = "action" in metric_names
    want_regret = "regret" in metric_names
    want_dist = "dist_sq" in metric_names
    want_gap_avg = "gap_avg" in metric_names
    want_gap_last = "gap_last" in metric_names

    grid = log_grid(horizon)
    logged = np.zeros(horizon + 1, dtype=bool)
    logged[np.asarray(grid)] = True
    best_cum = None
    if want_regret:
        if ground_best is None:
            ground_best = metrics.best_in_hindsight(game, horizon)
        best_cum = dict(zip(grid, game.cum_costs(ground_best.point, grid)))
    if want_dist and ground_nash is None:
        ground_nash = metrics.nash_oracle(game)

    single = game.n_agents == 1
    dim = game.dim
    cum_cost = 0.0
    avg = np.zeros(dim) if want_gap_avg else None
    records = []
    for t in range(1, horizon + 1):
        joint = lrs[0].action if single else layout.join([ln.action for ln in lrs])
        if want_regret:
            cum_cost += game.cost(joint, t)
        if want_gap_avg:
            avg += joint
        if want_action:
            records.extend(
                TraceRecord(rep, t, f"action_{j}", float(joint[j]))
                for j in range(dim))
        if logged[t]:
            # sampled feasibility check; the per-round oracle call below
            # trusts the learners' own projections
            if not game.joint_set.contains(joint, tol=1e-9):
                raise ContractViolation(f"infeasible joint action at round {t}")
            if want_dist:
                d = joint - ground_nash.point
                records.append(TraceRecord(rep, t, "dist_sq", float(d @ d)))
            if want_regret:
                records.append(
                    TraceRecord(rep, t, "regret", cum_cost - best_cum[t]))
            if want_gap_avg:
                records.append(TraceRecord(
                    rep, t, "gap_avg",
                    metrics.gap_estimate(avg / t, game, rng=gap_rng)))
            if want_gap_last:
                records.append(TraceRecord(
                    rep, t, "gap_last",
                    metrics.gap_estimate(joint, game, rng=gap_rng)))
        sigs = game.signals(joint, t, oracle_rng, check=False)
        for ln, sig in zip(lrs, sigs):
            ln.step(sig)
    if want_action:
        joint = lrs[0].action if single else layout.join([ln.action for ln in lrs])
        records.extend(
            TraceRecord(rep, horizon + 1, f"action_{j}", float(joint[j]))
            for j in range(dim))
    return records


def _metric_columns(metric_names, dim):
    cols = []
    for m in metric_names:
        if m == "action":
            cols.extend(f"action_{j}" for j in range(dim))
        else:
            cols.append(m)
    return cols


def _rep_task(args):
    (game, names, kps, horizon, seed, rep, metric_names, x1,
     ground_best, ground_nash) = args
    return simulate(game, names, kps, horizon, seed, rep, metric_names,
                    x1=x1, ground_best=ground_best, ground_nash=ground_nash)


def _run_reps(cfg, game, names, kps, horizon, ground_best, ground_nash):
    tasks = [
        (game, names, kps, horizon, cfg.seed, rep, cfg.metrics, cfg.x1,
         ground_best, ground_nash)
        for rep in range(cfg.replications)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_rep_task, tasks))
    else:
        chunks = [_rep_task(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    return records


def _sort_records(records, columns):
    rank = {c: i for i, c in enumerate(columns)}
    return sorted(records, key=lambda r: (r.seed, r.t, rank.get(r.metric, 1e9)))


def _summary_rows(records, columns):
    """Per-metric mean and standard error at each metric's last logged round."""
    rows = []
    for col in columns:
        per_seed = {}
        t_final = -1
        for r in records:
            if r.metric == col:
                t_final = max(t_final, r.t)
        if t_final < 0:
            continue
        for r in records:
            if r.metric == col and r.t == t_final:
                per_seed[r.seed] = r.value
        vals = np.asarray([per_seed[s] for s in sorted(per_seed)])
        mean = float(vals.mean())
        sem = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rows.append(TraceRecord(-1, t_final, f"mean_{col}", mean))
        rows.append(TraceRecord(-1, t_final, f"sem_{col}", sem))
    return rows


def write_csv(records, path):
    lines = ["seed,t,metric,value"]
    lines.extend(f"{r.seed},{r.t},{r.metric},{r.value:.17g}" for r in records)
    Path(path).write_text("\n".join(lines) + "\n")


def _prepare(cfg):
    game = games.from_config(cfg.game_doc)
    names, kps = resolve_learners(cfg, game)
    ground_best = None
    ground_nash = None
    if "regret" in cfg.metrics:
        if game.cost(game.joint_set.canonical_point(), 1) is None:
            raise ConfigError("game defines no per-round costs; regret "
                              "unavailable", key="metrics")
    if "dist_sq" in cfg.metrics:
        ground_nash = metrics.nash_oracle(game)
    return game, names, kps, ground_best, ground_nash


def run_experiment(cfg):
    if cfg.horizon is None:
        raise ConfigError("run needs T", key="T")
    game, names, kps, ground_best, ground_nash = _prepare(cfg)
    if "regret" in cfg.metrics:
        ground_best = metrics.best_in_hindsight(game, cfg.horizon)
    records = _run_reps(cfg, game, names, kps, cfg.horizon, ground_best,
                        ground_nash)
    columns = _metric_columns(cfg.metrics, game.dim)
    records = _sort_records(records, columns)
    summary = _summary_rows(records, columns)
    out = records + summary
    write_csv(out, cfg.output)
    return out


def sweep_experiment(cfg):
    if not cfg.horizon_grid:
        raise ConfigError("sweep needs T_grid", key="T_grid")
    game, names, kps, _, ground_nash = _prepare(cfg)
    columns = _metric_columns(cfg.metrics, game.dim)
    out = []
    means = {c: [] for c in columns}
    for horizon in cfg.horizon_grid:
        ground_best = None
        if "regret" in cfg.metrics:
            ground_best = metrics.best_in_hindsight(game, horizon)
        records = _run_reps(cfg, game, names, kps, horizon, ground_best,
                            ground_nash)
        finals = [r for r in records if r.t >= horizon]
        finals = _sort_records(finals, columns)
        summary = _summary_rows(finals, columns)
        for r in summary:
            for c in columns:
                if r.metric == f"mean_{c}":
                    means[c].append(r.value)
        out.extend(finals)
        out.extend(summary)
    slopes = {}
    for c in columns:
        vals = means[c]
        if len(vals) == len(cfg.horizon_grid) and all(v > 0 for v in vals):
            slope = metrics.fit_rate(cfg.horizon_grid, vals)
            slopes[c] = slope
            out.append(TraceRecord(-1, 0, f"slope_{c}", slope))
            if abs(slope) < 0.05:
                out.append(TraceRecord(-1, 0, f"flag_nonconvergent_{c}", 1.0))
    write_csv(out, cfg.output)
    return out, slopes
