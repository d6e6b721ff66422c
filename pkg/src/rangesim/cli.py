"""Command line front end: run, sweep, plan, validate-bounds."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, planner
from .errors import ConfigError, InfeasibleParameterError
from .problems import LinearRegressionProblem


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from None


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_json(args.config)
    result = harness.run_experiment(config, seed=args.seed)
    harness.write_run(result, args.out)
    summary = {k: v for k, v in result.summary.items() if k != "config_echo"}
    print(json.dumps(summary, indent=2))
    print(f"wrote {Path(args.out) / 'metrics.csv'}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    grid = _load_json(args.grid)
    table = harness.sweep(grid, out_dir=args.out)
    for row in table:
        print(f"{row['variant']}: n={row['n_seeds']} status={row['status']} "
              f"tail_mean_dist_sq={row['tail_mean_dist_sq_mean']} "
              f"(std {row['tail_mean_dist_sq_std']})")
    print(f"wrote {Path(args.out) / 'sweep.csv'}")
    return 0


def _plan_inputs(config: dict, seed: int | None) -> planner.BoundInputs:
    setup = harness.prepare_run(config, seed)
    algo = setup.config_echo["algorithm"]
    if algo.get("kind") != "range":
        raise ConfigError("plan requires a 'range' algorithm section")
    problem = setup.problem
    kwargs = dict(
        window=int(algo["window"]),
        burn_in=int(algo.get("burn_in", 0)),
        n_agents=setup.corruption.n_agents,
        window_trim=float(algo["window_trim"]),
        agent_trim=float(algo["agent_trim"]),
        p_corrupt=setup.corruption.p_corrupt,
        p_recover=setup.corruption.p_recover,
        dim=problem.dim,
        sigma=problem.noise_sigma(),
        batch=problem.batch,
    )
    if isinstance(problem, LinearRegressionProblem):
        mu, smooth, kappa = problem.curvature()
        kwargs.update(strong_convexity=mu, smoothness=smooth, kappa=kappa,
                      radius=problem.radius)
    else:
        kwargs.update(smoothness=problem.smoothness())
    return planner.BoundInputs(**kwargs)


def _cmd_plan(args: argparse.Namespace) -> int:
    config = _load_json(args.config)
    report = planner.compute_report(_plan_inputs(config, args.seed))
    print(json.dumps(report.to_dict(), indent=2, default=str))
    if not args.json:
        print()
        print(planner.format_report(report))
    return 0


def _cmd_validate_bounds(args: argparse.Namespace) -> int:
    grid = _load_json(args.grid)
    report = harness.validate_bounds(grid, samples=args.samples)
    all_pass = True
    for row in report:
        ok = row["window_failure_pass"] and row["aggregate_failure_pass"]
        all_pass &= ok
        chern = row["window_failure_chernoff"]
        chern_txt = "n/a" if chern is None else f"{chern:.4g}"
        print(f"pc={row['p_corrupt']} pr={row['p_recover']} m={row['window']} "
              f"trim={row['window_trim']} burn_in={row['burn_in']}: "
              f"emp={row['window_failure_empirical']:.4g} "
              f"exact={row['window_failure_exact']:.4g} chernoff={chern_txt} "
              f"z_emp={row['aggregate_failure_empirical']:.4g} "
              f"z_binom={row['aggregate_failure_binomial']:.4g} "
              f"[{'PASS' if ok else 'FAIL'}]")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
        print(f"wrote {args.out}")
    print("all tuples PASS" if all_pass else "some tuples FAIL")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rangesim",
                                     description="Byzantine-robust distributed SGD simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one seeded experiment")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a grid of configs with seed replicates")
    p.add_argument("--grid", required=True, help="sweep grid JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("plan", help="evaluate the failure-probability bounds for a config")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--seed", type=int, default=None, help="seed for dataset generation")
    p.add_argument("--json", action="store_true", help="JSON output only")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("validate-bounds", help="Monte Carlo check of the bounds")
    p.add_argument("--grid", required=True, help="tuple grid JSON")
    p.add_argument("--samples", type=int, default=None, help="chains per tuple")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=_cmd_validate_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except InfeasibleParameterError as err:
        print(f"infeasible parameters: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
