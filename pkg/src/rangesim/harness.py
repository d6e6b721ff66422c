"""Experiment orchestration: config parsing, seeded runs, metrics, sweeps,
and Monte Carlo validation of the planner's probability bounds.

A run is fully determined by (config, seed): every random draw comes from a
domain-separated child stream of the master seed. Metrics go to a CSV with
columns ``t,dist_sq,grad_norm,byz_count,z_fail,warmup`` and a JSON summary.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import planner
from .corruption import (AttackContext, CorruptionProcess, DirectedToOptimum,
                         InvertAndBoost, LargeRandom, MarkovCorruptionModel,
                         produce_feedback, transition_step)
from .errors import ConfigError, RangeSimError
from .estimator import trim_count
from .optimizer import (BaselineOptimizer, CoordinateMedianRule, MeanRule,
                        NormClipRule, RangeConfig, RangeOptimizer)
from .problems import REGIMES, SAA, LinearRegressionProblem, NonConvexToyProblem
from .rng import ATTACK_DOMAIN, VALIDATE_DOMAIN, stream

CONFIG_VERSION = 1
CSV_COLUMNS = ("t", "dist_sq", "grad_norm", "byz_count", "z_fail", "warmup")


def _require_mapping(obj: Any, name: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{name} must be an object, got {type(obj).__name__}")
    return obj


def _take(section: dict, name: str, required: tuple[str, ...],
          optional: dict[str, Any] = {}) -> dict:
    """Extract keys with strict unknown-key rejection."""
    unknown = set(section) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    missing = [k for k in required if k not in section]
    if missing:
        raise ConfigError(f"missing keys in {name}: {missing}")
    out = dict(optional)
    out.update(section)
    return out


def _build_problem(section: dict, n_agents: int, seed: int):
    section = _require_mapping(section, "problem")
    kind = section.get("kind")
    if kind == "linear_regression":
        p = _take(section, "problem", ("kind", "dim", "n_samples", "radius", "noise_std"))
        return LinearRegressionProblem.generate(
            dim=int(p["dim"]), n_samples=int(p["n_samples"]), n_agents=n_agents,
            radius=float(p["radius"]), noise_std=float(p["noise_std"]), seed=seed)
    if kind == "nonconvex_toy":
        p = _take(section, "problem", ("kind", "dim", "wiggle", "noise_std"))
        return NonConvexToyProblem.generate(
            dim=int(p["dim"]), n_agents=n_agents, wiggle=float(p["wiggle"]),
            noise_std=float(p["noise_std"]), seed=seed)
    raise ConfigError(f"unknown problem kind {kind!r}")


def _build_attack(section: dict):
    section = _require_mapping(section, "corruption.attack")
    kind = section.get("kind")
    if kind == "directed_to_optimum":
        a = _take(section, "attack", ("kind",), {"boost": 2.0})
        return DirectedToOptimum(boost=float(a["boost"]))
    if kind == "invert_and_boost":
        a = _take(section, "attack", ("kind",), {"c_min": 5.0, "c_max": 15.0})
        return InvertAndBoost(c_min=float(a["c_min"]), c_max=float(a["c_max"]))
    if kind == "large_random":
        a = _take(section, "attack", ("kind",), {"scale": 100.0})
        return LargeRandom(scale=float(a["scale"]))
    raise ConfigError(f"unknown attack kind {kind!r}")


@dataclass
class RunSetup:
    """Validated, instantiated pieces of one run."""

    problem: Any
    regime: str
    corruption: MarkovCorruptionModel
    attack: Any
    optimizer: Any
    window: int
    window_budget: int
    agent_budget: int
    metric_interval: int
    seed: int
    config_echo: dict


def prepare_run(config: dict, seed: Optional[int] = None) -> RunSetup:
    """Validate a config document and construct the run's components."""
    config = _require_mapping(config, "config")
    cfg = _take(config, "config",
                ("version", "n_agents", "regime", "problem", "corruption", "algorithm"),
                {"seed": None, "metric_interval": 10, "x_init": "zero"})
    if cfg["version"] != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {cfg['version']!r}")
    if seed is None:
        seed = cfg["seed"]
    if seed is None:
        raise ConfigError("no seed: provide one in the config or on the command line")
    seed = int(seed)
    n_agents = int(cfg["n_agents"])
    regime = cfg["regime"]
    if regime not in REGIMES:
        raise ConfigError(f"regime must be one of {REGIMES}, got {regime!r}")
    interval = int(cfg["metric_interval"])
    if interval < 1:
        raise ConfigError(f"metric_interval must be >= 1, got {interval}")

    problem = _build_problem(cfg["problem"], n_agents, seed)

    corr = _take(_require_mapping(cfg["corruption"], "corruption"), "corruption",
                 ("p_corrupt", "p_recover", "attack"), {"initial_state": "trustworthy"})
    model = MarkovCorruptionModel(p_corrupt=float(corr["p_corrupt"]),
                                  p_recover=float(corr["p_recover"]),
                                  n_agents=n_agents, seed=seed,
                                  initial=corr["initial_state"])
    attack = _build_attack(corr["attack"])

    algo = _require_mapping(cfg["algorithm"], "algorithm")
    kind = algo.get("kind")
    x0 = cfg["x_init"]
    if x0 == "zero":
        x0 = np.zeros(problem.dim)
    else:
        x0 = np.asarray(x0, dtype=np.float64)
        if x0.shape != (problem.dim,):
            raise ConfigError(f"x_init must have length {problem.dim}")

    if kind == "range":
        a = _take(algo, "algorithm",
                  ("kind", "step_size", "window", "window_trim", "agent_trim", "iters"),
                  {"burn_in": 0})
        rc = RangeConfig(step_size=float(a["step_size"]), window=int(a["window"]),
                         burn_in=int(a["burn_in"]), window_trim=float(a["window_trim"]),
                         agent_trim=float(a["agent_trim"]), horizon=int(a["iters"]))
        opt = RangeOptimizer(x0, rc, n_agents, problem.radius)
        window = rc.window
        window_budget = trim_count(rc.window_trim, rc.window)
        agent_budget = trim_count(rc.agent_trim, n_agents)
    elif kind in ("mean", "coordinate_median", "norm_clip"):
        extra = {"threshold": 10.0} if kind == "norm_clip" else {}
        a = _take(algo, "algorithm", ("kind", "step_size", "iters"), extra)
        if kind == "mean":
            rule = MeanRule()
        elif kind == "coordinate_median":
            rule = CoordinateMedianRule()
        else:
            rule = NormClipRule(threshold=float(a["threshold"]))
        opt = BaselineOptimizer(x0, rule, float(a["step_size"]), int(a["iters"]),
                                n_agents, problem.radius)
        window, window_budget, agent_budget = 1, 0, 0
    else:
        raise ConfigError(f"unknown algorithm kind {kind!r}")

    echo = json.loads(json.dumps(config))
    echo["seed"] = seed
    return RunSetup(problem=problem, regime=regime, corruption=model, attack=attack,
                    optimizer=opt, window=window, window_budget=window_budget,
                    agent_budget=agent_budget, metric_interval=interval, seed=seed,
                    config_echo=echo)


@dataclass
class RunResult:
    rows: list[tuple]
    summary: dict

    def column(self, name: str) -> np.ndarray:
        idx = CSV_COLUMNS.index(name)
        return np.array([row[idx] for row in self.rows], dtype=np.float64)


def run_experiment(config: dict, seed: Optional[int] = None) -> RunResult:
    """Execute one full run and collect metrics.

    Rows are recorded before the update they describe (iterate x_t together
    with the corruption state at t), every ``metric_interval`` iterations,
    plus the terminal iterate after the final update. Diverging values are
    recorded as-is.
    """
    setup = prepare_run(config, seed)
    problem, opt = setup.problem, setup.optimizer
    regime = setup.regime
    optimum = problem.optimum(regime)
    total = opt.total_iterations
    if total < setup.window:
        raise ConfigError("run shorter than the averaging window")
    attack_rng = stream(setup.seed, ATTACK_DOMAIN)
    process = CorruptionProcess(setup.corruption)

    n_agents = setup.corruption.n_agents
    state_ring = np.zeros((setup.window, n_agents), dtype=bool)
    window_counts = np.zeros(n_agents, dtype=np.int64)

    def push_states(t: int, states: np.ndarray) -> None:
        slot = (t - 1) % setup.window
        if t > setup.window:
            window_counts[:] -= state_ring[slot]
        state_ring[slot] = states
        window_counts[:] += states

    def z_failure() -> int:
        return int((window_counts > setup.window_budget).sum() > setup.agent_budget)

    def metric_row(t: int, x: np.ndarray, states: np.ndarray, warmup: bool) -> tuple:
        dist = float(np.sum((x - optimum) ** 2)) if optimum is not None else None
        grad = float(np.linalg.norm(problem.true_gradient(x, regime)))
        return (t, dist, grad, int(states.sum()), z_failure(), int(warmup))

    rows: list[tuple] = []
    t_start = time.perf_counter()
    for t in range(1, total + 1):
        states = process.byzantine if t == 1 else process.step()
        push_states(t, states)
        x_t = opt.x
        honest = problem.all_honest_gradients(x_t, t, regime)
        ctx = AttackContext(x=x_t, optimum=optimum,
                            full_gradient=honest.mean(axis=0),
                            honest=honest)
        attack_vectors = setup.attack.vectors(ctx, attack_rng)
        if (t - 1) % setup.metric_interval == 0 or t == total:
            rows.append(metric_row(t, x_t, states, opt.in_warmup))
        opt.step(produce_feedback(states, honest, attack_vectors))
    # terminal iterate, with the chain advanced once more for its state columns
    states = process.step()
    push_states(total + 1, states)
    rows.append(metric_row(total + 1, opt.x, states, False))
    wall = time.perf_counter() - t_start

    ts = np.array([r[0] for r in rows])
    tail = ts > 0.95 * total
    def tail_mean(idx: int) -> Optional[float]:
        vals = [rows[i][idx] for i in np.nonzero(tail)[0]]
        if any(v is None for v in vals):
            return None
        return float(np.mean(vals))

    summary = {
        "final_dist_sq": rows[-1][1],
        "tail_mean_dist_sq": tail_mean(1),
        "tail_mean_grad_norm": tail_mean(2),
        "z_fail_rate": float(np.mean([r[4] for r in rows])),
        "initial_dist_sq": rows[0][1],
        "iterations": total,
        "wall_time_s": wall,
        "seed": setup.seed,
        "config_echo": setup.config_echo,
    }
    return RunResult(rows=rows, summary=summary)


def render_csv(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for t, dist, grad, byz, z, warm in result.rows:
        writer.writerow([t, "" if dist is None else repr(dist), repr(grad), byz, z, warm])
    return buf.getvalue()


def write_run(result: RunResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(render_csv(result))
    (out / "summary.json").write_text(json.dumps(result.summary, indent=2) + "\n")


def _deep_merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


SWEEP_COLUMNS = ("variant", "n_seeds", "status",
                 "final_dist_sq_mean", "final_dist_sq_std",
                 "tail_mean_dist_sq_mean", "tail_mean_dist_sq_std",
                 "tail_mean_grad_norm_mean", "tail_mean_grad_norm_std",
                 "z_fail_rate_mean")


def sweep(grid: dict, out_dir: Optional[str | Path] = None) -> list[dict]:
    """Run every (variant, seed) pair and aggregate per-variant statistics."""
    grid = _take(_require_mapping(grid, "grid"), "grid", ("version", "base", "variants"),
                 {"seeds": [0]})
    if grid["version"] != CONFIG_VERSION:
        raise ConfigError(f"unsupported grid version {grid['version']!r}")
    variants = grid["variants"]
    if not isinstance(variants, list) or not variants:
        raise ConfigError("grid.variants must be a non-empty list")
    seeds = [int(s) for s in grid["seeds"]]
    if not seeds:
        raise ConfigError("grid.seeds must be non-empty")

    table: list[dict] = []
    for var in variants:
        var = _take(_require_mapping(var, "variant"), "variant", ("name",), {"overrides": {}})
        config = _deep_merge(grid["base"], var["overrides"])
        summaries, failures = [], []
        for s in seeds:
            try:
                result = run_experiment(config, seed=s)
            except RangeSimError as err:
                failures.append(f"seed {s}: {err}")
                continue
            summaries.append(result.summary)
            if out_dir is not None:
                write_run(result, Path(out_dir) / var["name"] / f"seed_{s}")
        row: dict[str, Any] = {"variant": var["name"], "n_seeds": len(summaries)}
        row["status"] = "ok" if not failures else "error: " + "; ".join(failures)
        for key in ("final_dist_sq", "tail_mean_dist_sq", "tail_mean_grad_norm"):
            vals = [s[key] for s in summaries if s[key] is not None]
            row[f"{key}_mean"] = float(np.mean(vals)) if vals else None
            row[f"{key}_std"] = float(np.std(vals, ddof=1)) if len(vals) > 1 else None
        zs = [s["z_fail_rate"] for s in summaries]
        row["z_fail_rate_mean"] = float(np.mean(zs)) if zs else None
        row["summaries"] = summaries
        table.append(row)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for row in table:
                writer.writerow([row[c] if row[c] is not None else "" for c in SWEEP_COLUMNS])
    return table


def _simulate_window_failures(p_corrupt: float, p_recover: float, window: int,
                              budget: int, burn_in: int, samples: int,
                              rng: np.random.Generator, block: int = 20000) -> np.ndarray:
    """Window-failure indicators for chains started byzantine, vectorized."""
    fails = np.empty(samples, dtype=bool)
    done = 0
    while done < samples:
        n = min(block, samples - done)
        states = np.ones(n, dtype=bool)
        for _ in range(burn_in):
            states = transition_step(states, p_corrupt, p_recover, rng.random(n))
        counts = states.astype(np.int64)
        for _ in range(window - 1):
            states = transition_step(states, p_corrupt, p_recover, rng.random(n))
            counts += states
        fails[done:done + n] = counts > budget
        done += n
    return fails


def validate_bounds(grid: dict, samples: Optional[int] = None,
                    seed: Optional[int] = None) -> list[dict]:
    """Monte Carlo check of the exact and binomial failure bounds.

    Each tuple simulates window failures for chains started byzantine (the
    worst case the bounds address) and compares empirical frequencies with
    the exact form at three standard errors; aggregate failures reuse the
    same chains in independent groups of ``n_agents``.
    """
    grid = _take(_require_mapping(grid, "grid"), "grid", ("version", "tuples"),
                 {"samples": 100000, "seed": 20210831})
    if grid["version"] != CONFIG_VERSION:
        raise ConfigError(f"unsupported grid version {grid['version']!r}")
    samples = int(samples if samples is not None else grid["samples"])
    if samples < 10000:
        raise ConfigError(f"samples must be >= 10000, got {samples}")
    seed = int(seed if seed is not None else grid["seed"])
    tuples = grid["tuples"]
    if not isinstance(tuples, list) or not tuples:
        raise ConfigError("grid.tuples must be a non-empty list")

    report = []
    for idx, raw in enumerate(tuples):
        tup = _take(_require_mapping(raw, f"tuples[{idx}]"), f"tuples[{idx}]",
                    ("p_corrupt", "p_recover", "window", "window_trim"),
                    {"burn_in": 0, "n_agents": 10, "agent_trim": 0.1})
        pc, pr = float(tup["p_corrupt"]), float(tup["p_recover"])
        window, burn_in = int(tup["window"]), int(tup["burn_in"])
        trim, n_agents = float(tup["window_trim"]), int(tup["n_agents"])
        agent_trim = float(tup["agent_trim"])
        budget = trim_count(trim, window)
        agent_budget = trim_count(agent_trim, n_agents)

        exact = planner.exact_window_failure(pc, pr, window, trim, burn_in)
        try:
            chern = planner.window_failure_chernoff(pc, pr, window, trim, burn_in)
        except planner.InfeasibleParameterError:
            chern = None
        z_exact = planner.binomial_tail_above(n_agents, agent_budget, exact)

        rng = stream(seed, VALIDATE_DOMAIN, idx)
        fails = _simulate_window_failures(pc, pr, window, budget, burn_in, samples, rng)
        emp_y = float(fails.mean())
        n_groups = samples // n_agents
        grouped = fails[: n_groups * n_agents].reshape(n_groups, n_agents)
        emp_z = float((grouped.sum(axis=1) > agent_budget).mean())

        se_y = math.sqrt(exact * (1.0 - exact) / samples)
        se_z = math.sqrt(z_exact * (1.0 - z_exact) / n_groups)
        pass_y = abs(emp_y - exact) <= 3.0 * se_y if se_y > 0 else emp_y == exact
        pass_z = abs(emp_z - z_exact) <= 3.0 * se_z if se_z > 0 else emp_z == z_exact
        chern_ok = None if chern is None else bool(chern >= emp_y - 3.0 * se_y)

        report.append({
            "p_corrupt": pc, "p_recover": pr, "window": window, "window_trim": trim,
            "burn_in": burn_in, "n_agents": n_agents, "agent_trim": agent_trim,
            "samples": samples, "z_samples": n_groups,
            "window_failure_exact": exact, "window_failure_empirical": emp_y,
            "window_failure_se": se_y, "window_failure_pass": bool(pass_y),
            "window_failure_chernoff": chern, "chernoff_above_empirical": chern_ok,
            "aggregate_failure_binomial": z_exact, "aggregate_failure_empirical": emp_z,
            "aggregate_failure_se": se_z, "aggregate_failure_pass": bool(pass_z),
        })
    return report
