"""Deterministic, domain-separated random streams.

Every source of randomness in a run is its own child stream of the master
seed, keyed by a stream domain (and agent / iteration indices where needed),
so draws never depend on evaluation order and changing one consumer leaves
the others untouched.
"""

from __future__ import annotations

import numpy as np

STATE_DOMAIN = 0  # per-agent trust/corrupt chains
ATTACK_DOMAIN = 1  # corrupt-feedback draws
DATA_DOMAIN = 2  # per-iteration fresh samples (stochastic-approximation mode)
PROBLEM_DOMAIN = 3  # dataset and planted-solution generation
VALIDATE_DOMAIN = 4  # bound-validation Monte Carlo


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key); stable across call order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
