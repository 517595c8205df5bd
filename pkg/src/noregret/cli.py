"""Command-line interface: run, sweep, verify, probe.

Exit codes: 0 success, 1 failed checks (verify/probe), 2 invalid
configuration (diagnostic names the offending key), 3 oracle or solver
failure.
"""

import argparse
import json
import math
import sys
from pathlib import Path

from . import games, harness
from .errors import ConfigError, ContractViolation, SolverError


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}", key=str(path))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}", key=str(path))


def _cmd_run(args):
    doc = _load_json(args.config)
    cfg = harness.parse_config(doc, base_dir=Path(args.config).parent)
    records = harness.run_experiment(cfg)
    n_rows = sum(1 for r in records if r.seed >= 0)
    print(f"wrote {cfg.output}: {n_rows} rows + summary")
    return 0


def _cmd_sweep(args):
    doc = _load_json(args.config)
    cfg = harness.parse_config(doc, base_dir=Path(args.config).parent)
    _, slopes = harness.sweep_experiment(cfg)
    for metric, slope in slopes.items():
        print(f"slope[{metric}] = {slope:.4f}")
    print(f"wrote {cfg.output}")
    return 0


def _cmd_verify(args):
    from . import acceptance

    results = acceptance.run_all(quick=args.quick)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def _cmd_probe(args):
    doc = _load_json(args.game)
    game = games.from_config(doc)
    rng = harness.substream(args.seed, 0)
    reports = []

    beta = None
    battr = getattr(game, "beta", None)
    if callable(battr):
        beta = battr()
    elif isinstance(battr, (int, float)):
        beta = float(battr)
    elif hasattr(game, "monotone_modulus"):
        beta = game.monotone_modulus()
    if beta is not None and beta > 0:
        reports.append(games.monotonicity_probe(game, beta, args.pairs, rng))
    elif beta is not None:
        print(f"strong-monotonicity calculator returned {beta:.4g} <= 0; "
              "instance is not strongly monotone")

    gsq = game.gradient_bound_sq()
    G = math.sqrt(gsq)
    D = game.joint_set.diameter()
    if beta is not None and beta > 0 and D > 0:
        alpha = 2.0 * beta / gsq
        reports.append(games.ec_probe(game, alpha, G, D, args.pairs, rng))

    if not reports:
        print("no calculator applies to this instance; nothing to probe")
        return 0
    for rep in reports:
        print(rep)
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="noregret",
        description="Adaptive no-regret learning simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a horizon grid and fit slopes")
    p_sweep.add_argument("--config", required=True)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--quick", action="store_true",
                          help="halve replications, widen stochastic tolerances")
    p_verify.set_defaults(fn=_cmd_verify)

    p_probe = sub.add_parser("probe", help="monotonicity / exp-concavity probes")
    p_probe.add_argument("--game", required=True, help="instance JSON file")
    p_probe.add_argument("--pairs", type=int, default=10_000)
    p_probe.add_argument("--seed", type=int, default=0)
    p_probe.set_defaults(fn=_cmd_probe)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        key = f" (key: {exc.key})" if exc.key else ""
        print(f"config error{key}: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ContractViolation) as exc:
        print(f"solver/oracle failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
