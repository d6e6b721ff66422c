"""Trimmed-mean estimator: worked examples, invariants, brute-force checks."""

import itertools

import numpy as np
import pytest

from rangesim.estimator import (RobustMeanConfig, coordinate_median, robust_mean,
                                trim_error_constant, trimmed_mean)


def test_coordinate_median_odd():
    assert coordinate_median([[1.0], [2.0], [3.0]]) == np.array([2.0])


def test_coordinate_median_even_averages_middle_pair():
    # sorted: 0, 1, 2, 100 -> (1 + 2) / 2
    assert coordinate_median([[0.0], [1.0], [2.0], [100.0]]) == np.array([1.5])


def test_coordinate_median_identical_inputs():
    v = np.array([3.0, -1.0, 0.5])
    batch = np.tile(v, (5, 1))
    np.testing.assert_array_equal(coordinate_median(batch), v)


def test_coordinate_median_rejects_empty():
    with pytest.raises(ValueError):
        coordinate_median(np.empty((0, 3)))


def test_robust_mean_zero_trim_is_plain_mean():
    rng = np.random.default_rng(0)
    batch = rng.normal(size=(7, 4))
    cfg = RobustMeanConfig(alpha=0.0, count=7)
    np.testing.assert_array_equal(robust_mean(batch, cfg), batch.mean(axis=0))


def test_robust_mean_worked_example():
    # median 1.5; nearest three of {0, 1, 2, 100} are 0, 1, 2
    batch = [[0.0], [1.0], [2.0], [100.0]]
    out = robust_mean(batch, RobustMeanConfig(alpha=0.25, count=4))
    np.testing.assert_allclose(out, [1.0], rtol=0, atol=0)


def test_robust_mean_identical_inputs_exact():
    v = np.array([2.5, -7.0, 0.0, 1.0])
    batch = np.tile(v, (8, 1))
    out = robust_mean(batch, RobustMeanConfig(alpha=0.25, count=8))
    np.testing.assert_array_equal(out, v)


def test_robust_mean_count_mismatch():
    with pytest.raises(ValueError, match="cfg.count"):
        robust_mean(np.zeros((3, 2)), RobustMeanConfig(alpha=0.0, count=4))


@pytest.mark.parametrize("alpha,count", [(0.5, 4), (-0.1, 4), (0.3, 7), (0.25, 3)])
def test_config_validation(alpha, count):
    with pytest.raises(ValueError):
        RobustMeanConfig(alpha=alpha, count=count)


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    batch = rng.normal(size=(8, 3))
    cfg = RobustMeanConfig(alpha=0.25, count=8)
    base = robust_mean(batch, cfg)
    for _ in range(10):
        perm = rng.permutation(8)
        np.testing.assert_allclose(robust_mean(batch[perm], cfg), base, rtol=1e-12)


def test_translation_equivariance():
    rng = np.random.default_rng(2)
    batch = rng.normal(size=(10, 5))
    shift = rng.normal(size=5)
    cfg = RobustMeanConfig(alpha=0.1, count=10)
    np.testing.assert_allclose(robust_mean(batch + shift, cfg),
                               robust_mean(batch, cfg) + shift, rtol=1e-10, atol=1e-12)


def _brute_force_kept(values: np.ndarray, kept: int) -> tuple[int, ...]:
    """Lexicographically smallest subset of `kept` indices minimizing the
    total distance to the median (equivalently: the nearest entries)."""
    med = np.median(values)
    dist = np.abs(values - med)
    best_sum, best_subset = None, None
    for subset in itertools.combinations(range(len(values)), kept):
        s = sum(dist[i] for i in subset)
        if best_sum is None or s < best_sum - 1e-15 or (abs(s - best_sum) <= 1e-15
                                                        and subset < best_subset):
            best_sum, best_subset = s, subset
    return best_subset


def test_selection_matches_subset_enumeration():
    # small batches, integer values so ties actually occur
    rng = np.random.default_rng(3)
    for _ in range(120):
        k = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        kept = int(rng.integers(1, k + 1))
        batch = rng.integers(-3, 4, size=(k, d)).astype(float)
        got = trimmed_mean(batch, kept)
        for j in range(d):
            subset = _brute_force_kept(batch[:, j], kept)
            expected = batch[list(subset), j].mean()
            assert np.isclose(got[j], expected, rtol=1e-12, atol=1e-13), (batch[:, j], kept)


def test_breakdown_bound_small():
    # clustered majority plus arbitrary entries: error stays within the
    # closed-form constant times the realized cluster radius
    rng = np.random.default_rng(4)
    for _ in range(100):
        alpha = rng.choice([0.1, 0.25, 0.4])
        ks = [k for k in range(4, 21) if round(alpha * k, 9) == int(round(alpha * k))]
        k = int(rng.choice(ks))
        d = int(rng.integers(1, 5))
        n_bad = int(round(alpha * k))
        honest = rng.normal(size=(k - n_bad, d))
        center = honest.mean(axis=0)
        r = np.max(np.abs(honest - center))
        bad = 1e6 * r * rng.normal(size=(n_bad, d))
        batch = np.concatenate([honest, bad])[rng.permutation(k)]
        est = robust_mean(batch, RobustMeanConfig(alpha=float(alpha), count=k))
        assert np.linalg.norm(est - center) <= trim_error_constant(float(alpha), d) * r


def test_trim_error_constant_values():
    assert trim_error_constant(0.0, 7) == 0.0
    assert np.isclose(trim_error_constant(0.3, 1), 1.80582615519337094, rtol=1e-14)
    assert np.isclose(trim_error_constant(0.25, 4),
                      2.0 * trim_error_constant(0.25, 1), rtol=1e-14)


def test_trim_error_constant_domain():
    with pytest.raises(ValueError):
        trim_error_constant(0.5, 3)
    with pytest.raises(ValueError):
        trim_error_constant(0.2, 0)
