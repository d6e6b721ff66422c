"""Robust optimizer mechanics, baselines, and the no-corruption reduction."""

import numpy as np
import pytest

from rangesim.errors import ConfigError
from rangesim.estimator import trimmed_mean
from rangesim.optimizer import (BaselineOptimizer, CoordinateMedianRule, MeanRule,
                                NormClipRule, RangeConfig, RangeOptimizer,
                                baseline_step, project)


def test_project_inside_untouched():
    x = np.array([1.0, 2.0])
    np.testing.assert_array_equal(project(x, 5.0), x)


def test_project_radial_scaling():
    np.testing.assert_allclose(project(np.array([6.0, 8.0]), 5.0), [3.0, 4.0], rtol=1e-12)


def test_project_unbounded():
    x = np.array([1e9, -1e9])
    np.testing.assert_array_equal(project(x, None), x)


def cfg(**kw):
    base = dict(step_size=0.1, window=1, burn_in=0, window_trim=0.0,
                agent_trim=0.0, horizon=10)
    base.update(kw)
    return RangeConfig(**base)


def test_config_integrality_checks():
    with pytest.raises(ConfigError):
        cfg(window=10, window_trim=0.15)  # 1.5 entries
    with pytest.raises(ConfigError):
        cfg(agent_trim=0.3).validate_agents(7)  # 2.1 agents
    cfg(window=10, window_trim=0.3, agent_trim=0.3).validate_agents(10)


def test_config_total_iterations():
    assert cfg(horizon=100, window=20, burn_in=5).total_iterations == 124


def test_unit_step_along_aggregate():
    # all agents report (3, 4): update is -0.1 * (3,4)/5
    opt = RangeOptimizer(np.zeros(2), cfg(), n_agents=4, radius=10.0)
    out = opt.step(np.tile([3.0, 4.0], (4, 1)))
    np.testing.assert_allclose(out, [-0.06, -0.08], rtol=1e-12)


def test_step_then_projection():
    opt = RangeOptimizer(np.array([9.99, 0.0]), cfg(), n_agents=3, radius=10.0)
    out = opt.step(np.tile([-1.0, 0.0], (3, 1)))
    # unprojected point (10.09, 0) scales back to the boundary
    np.testing.assert_allclose(out, [10.0, 0.0], rtol=1e-12)


def test_zero_aggregate_keeps_iterate():
    start = np.array([0.5, -0.25])
    opt = RangeOptimizer(start.copy(), cfg(), n_agents=2, radius=None)
    out = opt.step(np.zeros((2, 2)))
    np.testing.assert_array_equal(out, start)


def test_identical_reports_move_exactly_step_size():
    rng = np.random.default_rng(0)
    opt = RangeOptimizer(np.zeros(5), cfg(step_size=0.05, window=4, window_trim=0.25,
                                          agent_trim=0.25, horizon=50),
                         n_agents=4, radius=None)
    g = rng.normal(size=5)
    reports = np.tile(g, (4, 1))
    for _ in range(10):
        before = opt.x.copy()
        opt.step(reports)
        np.testing.assert_allclose(np.linalg.norm(opt.x - before),
                                   0.05, rtol=1e-12)
        np.testing.assert_allclose((before - opt.x) / 0.05, g / np.linalg.norm(g),
                                   rtol=1e-10)


def test_step_length_and_feasibility_invariants():
    rng = np.random.default_rng(1)
    radius = 2.0
    c = cfg(step_size=0.3, window=5, window_trim=0.2, agent_trim=0.25, horizon=40)
    opt = RangeOptimizer(np.zeros(3), c, n_agents=4, radius=radius)
    for _ in range(c.total_iterations):
        before = opt.x.copy()
        opt.step(rng.normal(scale=rng.choice([0.1, 100.0]), size=(4, 3)))
        assert np.linalg.norm(opt.x - before) <= 0.3 * (1 + 1e-12)
        assert np.linalg.norm(opt.x) <= radius * (1 + 1e-12)


def test_window_contents_exact_sentinels():
    # inject recognizable vectors and make sure the window holds exactly the
    # last `window` reports, newest first
    opt = RangeOptimizer(np.zeros(2), cfg(window=3, window_trim=0.0, horizon=20),
                         n_agents=2, radius=None)
    for t in range(1, 6):
        feedback = np.array([[t, 10 * t], [-t, -10 * t]], dtype=float)
        opt.step(feedback)
    np.testing.assert_array_equal(opt.window_view(0), [[5, 50], [4, 40], [3, 30]])
    np.testing.assert_array_equal(opt.window_view(1), [[-5, -50], [-4, -40], [-3, -30]])


def test_warmup_passthrough_uses_raw_reports():
    # before the window fills, a single corrupt report steers the update
    c = cfg(window=4, window_trim=0.25, agent_trim=0.0, horizon=10)
    opt = RangeOptimizer(np.zeros(1), c, n_agents=2, radius=None)
    assert opt.in_warmup
    out = opt.step(np.array([[1.0], [3.0]]))  # mean 2, step -0.1
    np.testing.assert_allclose(out, [-0.1])


def test_window_stage_engages_after_fill():
    # after the window fills, one outlier inside a window is trimmed away
    c = cfg(window=4, window_trim=0.25, agent_trim=0.0, horizon=10, step_size=1.0)
    opt = RangeOptimizer(np.zeros(1), c, n_agents=1, radius=None)
    for v in (1.0, 1.0, 1.0):
        opt.step(np.array([[v]]))
    x_before = opt.x.copy()
    opt.step(np.array([[1000.0]]))  # trimmed: window mean stays 1
    np.testing.assert_allclose(x_before - opt.x, [1.0], rtol=1e-12)


def test_reduction_to_normalized_sgd_bitwise():
    # no corruption, no trimming, window 1: trajectories must coincide exactly
    rng = np.random.default_rng(7)
    n, d, radius, gamma = 5, 4, 1.5, 0.07
    feedback = rng.normal(size=(60, n, d))
    opt = RangeOptimizer(np.zeros(d), cfg(step_size=gamma, horizon=60), n, radius)
    x_ref = np.zeros(d)
    for t in range(60):
        opt.step(feedback[t])
        g = feedback[t].mean(axis=0)
        norm = np.linalg.norm(g)
        if norm != 0.0:
            x_ref = x_ref - gamma * g / norm
            nx = np.linalg.norm(x_ref)
            if nx > radius:
                x_ref = x_ref * (radius / nx)
        np.testing.assert_array_equal(opt.x, x_ref)


def test_feedback_shape_checked():
    opt = RangeOptimizer(np.zeros(2), cfg(), n_agents=3, radius=None)
    with pytest.raises(ValueError):
        opt.step(np.zeros((2, 2)))


def test_mean_rule_step():
    g = np.array([1.0, -2.0])
    x = baseline_step(np.zeros(2), np.tile(g, (3, 1)), MeanRule(), 0.5, None)
    np.testing.assert_allclose(x, -0.5 * g, rtol=1e-12)


def test_coordinate_median_rule():
    grads = np.array([[0.0, 0.0], [1.0, 10.0], [2.0, -10.0]])
    np.testing.assert_array_equal(CoordinateMedianRule().aggregate(grads), [1.0, 0.0])


def test_norm_clip_rule():
    g = np.zeros((1, 2))
    g[0, 0] = 50.0
    out = NormClipRule(threshold=10.0).aggregate(g)
    np.testing.assert_allclose(out, [10.0, 0.0], rtol=1e-12)
    small = np.array([[3.0, 4.0]])
    np.testing.assert_array_equal(NormClipRule(threshold=10.0).aggregate(small), [3.0, 4.0])


def test_baseline_optimizer_projects():
    opt = BaselineOptimizer(np.zeros(2), MeanRule(), step_size=5.0, horizon=3,
                            n_agents=2, radius=1.0)
    opt.step(np.tile([-1.0, 0.0], (2, 1)))
    np.testing.assert_allclose(opt.x, [1.0, 0.0], rtol=1e-12)
    assert opt.total_iterations == 3


def test_range_trims_match_estimator_directly():
    # one optimizer step equals estimator composition on explicit windows
    rng = np.random.default_rng(5)
    n, d, m = 4, 3, 4
    c = cfg(window=m, window_trim=0.25, agent_trim=0.25, horizon=20, step_size=0.2)
    opt = RangeOptimizer(np.zeros(d), c, n, radius=None)
    history = []
    x = np.zeros(d)
    for t in range(1, 9):
        feedback = rng.normal(size=(n, d))
        history.append(feedback)
        opt.step(feedback)
        if t <= m - 1:
            robust = feedback
        else:
            windows = np.stack(history[-m:][::-1], axis=1)  # (n, m, d) newest first
            robust = trimmed_mean(windows, m - 1)
        agg = trimmed_mean(robust, n - 1)
        norm = np.linalg.norm(agg)
        x = x - 0.2 * agg / norm
        np.testing.assert_allclose(opt.x, x, rtol=1e-12, atol=1e-13)
