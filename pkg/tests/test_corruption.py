"""Markov corruption chains and attack strategies."""

import numpy as np
import pytest

from rangesim.corruption import (AttackContext, CorruptionProcess, DirectedToOptimum,
                                 InvertAndBoost, LargeRandom, MarkovCorruptionModel,
                                 produce_feedback, stationary_distribution,
                                 transition_step)
from rangesim.errors import ConfigError


def test_stationary_distribution_example():
    trust, byz = stationary_distribution(0.025, 0.1)
    assert np.isclose(trust, 0.8) and np.isclose(byz, 0.2)
    assert np.isclose(trust + byz, 1.0)


def test_stationary_when_gap_is_one():
    # memoryless chain: rows of the transition matrix equal the stationary law
    trust, byz = stationary_distribution(0.3, 0.7)
    assert np.isclose(trust, 0.7) and np.isclose(byz, 0.3)


def test_equal_probabilities_rejected():
    with pytest.raises(ConfigError):
        MarkovCorruptionModel(p_corrupt=0.1, p_recover=0.1, n_agents=3, seed=0)


def test_zero_corruption_allowed():
    model = MarkovCorruptionModel(p_corrupt=0.0, p_recover=0.5, n_agents=4, seed=0)
    proc = CorruptionProcess(model)
    for _ in range(50):
        assert not proc.step().any()


def test_boundary_transitions_deterministic():
    # corrupt never, recover always: everyone trustworthy next step
    states = np.array([True, False, True])
    draws = np.array([0.4, 0.9, 0.0])
    out = transition_step(states, 0.0, 1.0, draws)
    assert not out.any()


def test_transition_frequencies_match_probabilities():
    model = MarkovCorruptionModel(p_corrupt=0.05, p_recover=0.2, n_agents=10, seed=7)
    proc = CorruptionProcess(model)
    prev = proc.byzantine.copy()
    to_byz = from_byz = n_trust = n_byz = 0
    for _ in range(100000 // 10 * 10):
        cur = proc.step()
        n_trust += int((~prev).sum())
        n_byz += int(prev.sum())
        to_byz += int((cur & ~prev).sum())
        from_byz += int((~cur & prev).sum())
        prev = cur.copy()
    assert abs(to_byz / n_trust - 0.05) < 0.01
    assert abs(from_byz / n_byz - 0.2) < 0.01


def test_agents_independent():
    model = MarkovCorruptionModel(p_corrupt=0.1, p_recover=0.3, n_agents=4, seed=3)
    proc = CorruptionProcess(model)
    history = np.array([proc.step() for _ in range(100000)], dtype=float)
    corr = np.corrcoef(history.T)
    off_diag = corr[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off_diag)) < 0.02


def test_long_run_byzantine_fraction():
    model = MarkovCorruptionModel(p_corrupt=0.025, p_recover=0.1, n_agents=10, seed=11)
    proc = CorruptionProcess(model)
    total = byz = 0
    for _ in range(100000):
        byz += int(proc.step().sum())
        total += 10
    assert abs(byz / total - 0.2) < 0.01


def test_trajectories_deterministic_per_seed():
    model = MarkovCorruptionModel(p_corrupt=0.05, p_recover=0.3, n_agents=5, seed=42)
    a = CorruptionProcess(model)
    b = CorruptionProcess(model)
    for _ in range(200):
        np.testing.assert_array_equal(a.step(), b.step())


def test_stationary_start_draws_states():
    model = MarkovCorruptionModel(p_corrupt=0.4, p_recover=0.6, n_agents=1000, seed=5,
                                  initial="stationary")
    proc = CorruptionProcess(model)
    assert abs(proc.byzantine.mean() - 0.4) < 0.05


def test_directed_attack_example():
    # gradient norm 1, optimum gap (3, 4): 2 * 1 * (3,4)/5
    ctx = AttackContext(x=np.zeros(2), optimum=np.array([3.0, 4.0]),
                        true_gradient=np.array([1.0, 0.0]),
                        honest=np.zeros((3, 2)))
    vec = DirectedToOptimum().vectors(ctx, np.random.default_rng(0))
    np.testing.assert_allclose(vec, np.tile([1.2, 1.6], (3, 1)), rtol=1e-12)


def test_directed_attack_at_optimum_is_zero():
    x = np.array([1.0, -2.0])
    ctx = AttackContext(x=x, optimum=x.copy(), true_gradient=np.ones(2),
                        honest=np.ones((2, 2)))
    np.testing.assert_array_equal(DirectedToOptimum().vectors(ctx, np.random.default_rng(0)),
                                  np.zeros((2, 2)))


def test_directed_attack_requires_optimum():
    ctx = AttackContext(x=np.zeros(2), optimum=None, true_gradient=np.ones(2),
                        honest=np.ones((2, 2)))
    with pytest.raises(ConfigError):
        DirectedToOptimum().vectors(ctx, np.random.default_rng(0))


def test_invert_and_boost_fixed_factor():
    honest = np.array([[1.0, -2.0], [0.5, 0.0]])
    ctx = AttackContext(x=np.zeros(2), optimum=None, true_gradient=np.zeros(2),
                        honest=honest)
    vec = InvertAndBoost(c_min=5.0, c_max=5.0).vectors(ctx, np.random.default_rng(0))
    np.testing.assert_allclose(vec, -5.0 * honest, rtol=1e-12)


def test_large_random_scale_zero():
    ctx = AttackContext(x=np.zeros(3), optimum=None, true_gradient=np.zeros(3),
                        honest=np.ones((4, 3)))
    np.testing.assert_array_equal(LargeRandom(scale=0.0).vectors(ctx, np.random.default_rng(0)),
                                  np.zeros((4, 3)))


def test_produce_feedback_passthrough_and_replace():
    honest = np.arange(6, dtype=float).reshape(3, 2)
    attack = np.full((3, 2), -1.0)
    out = produce_feedback(np.array([False, True, False]), honest, attack)
    np.testing.assert_array_equal(out[0], honest[0])
    np.testing.assert_array_equal(out[1], attack[1])
    np.testing.assert_array_equal(out[2], honest[2])
