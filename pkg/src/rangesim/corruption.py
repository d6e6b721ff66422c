"""Per-agent trust/corrupt dynamics and corrupt-feedback strategies.

Each agent flips between a trustworthy and a byzantine state by an
independent two-state Markov chain: trustworthy agents turn byzantine with
probability ``p_corrupt`` per step, byzantine agents recover with
probability ``p_recover``. Byzantine agents replace their honest gradient
with an attack vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .rng import STATE_DOMAIN, stream

INITIAL_TRUSTWORTHY = "trustworthy"
INITIAL_STATIONARY = "stationary"


def stationary_distribution(p_corrupt: float, p_recover: float) -> tuple[float, float]:
    """Long-run (trustworthy, byzantine) state probabilities."""
    total = p_corrupt + p_recover
    if total <= 0.0:
        raise ValueError("p_corrupt + p_recover must be positive")
    return p_recover / total, p_corrupt / total


def transition_step(byzantine: np.ndarray, p_corrupt: float, p_recover: float,
                    draws: np.ndarray) -> np.ndarray:
    """Advance all agents one step using one uniform draw per agent."""
    return np.where(byzantine, draws >= p_recover, draws < p_corrupt)


@dataclass(frozen=True)
class MarkovCorruptionModel:
    """Chain parameters for ``n_agents`` independent agents.

    Requires p_corrupt < p_recover; p_corrupt = 0 is allowed so that
    corruption-free runs are expressible.
    """

    p_corrupt: float
    p_recover: float
    n_agents: int
    seed: int
    initial: str = INITIAL_TRUSTWORTHY

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_corrupt < self.p_recover <= 1.0:
            raise ConfigError(
                f"need 0 <= p_corrupt < p_recover <= 1, got ({self.p_corrupt}, {self.p_recover})")
        if self.n_agents < 1:
            raise ConfigError(f"n_agents must be >= 1, got {self.n_agents}")
        if self.initial not in (INITIAL_TRUSTWORTHY, INITIAL_STATIONARY):
            raise ConfigError(f"unknown initial-state policy {self.initial!r}")


class CorruptionProcess:
    """Stateful simulation of the agents' chains with per-agent streams."""

    def __init__(self, model: MarkovCorruptionModel):
        self.model = model
        self._rngs = [stream(model.seed, STATE_DOMAIN, i) for i in range(model.n_agents)]
        self.iteration = 1
        if model.initial == INITIAL_STATIONARY:
            _, pi_byz = stationary_distribution(model.p_corrupt, model.p_recover)
            self.byzantine = np.array([rng.random() < pi_byz for rng in self._rngs])
        else:
            self.byzantine = np.zeros(model.n_agents, dtype=bool)

    def step(self) -> np.ndarray:
        """Advance one iteration; returns the new byzantine mask."""
        draws = np.array([rng.random() for rng in self._rngs])
        self.byzantine = transition_step(self.byzantine, self.model.p_corrupt,
                                         self.model.p_recover, draws)
        self.iteration += 1
        return self.byzantine


@dataclass(frozen=True)
class AttackContext:
    """Everything an attack may inspect when crafting its vectors.

    ``full_gradient`` is the aggregate honest gradient at the current
    iterate, i.e. what the server would apply if nobody were corrupt; the
    adversary is assumed to know the problem and the iteration's data.
    """

    x: np.ndarray
    optimum: Optional[np.ndarray]
    full_gradient: np.ndarray
    honest: np.ndarray  # (n_agents, dim)


@dataclass(frozen=True)
class DirectedToOptimum:
    """Push the update away from the optimum.

    Sends boost * ||grad|| * (optimum - x) / ||optimum - x||: a descent step
    on this vector moves the iterate away from the optimum. Sends zero when
    x equals the optimum (the 0/0 direction is zero by convention).
    """

    boost: float = 2.0

    def vectors(self, ctx: AttackContext, rng: np.random.Generator) -> np.ndarray:
        if ctx.optimum is None:
            raise ConfigError("directed_to_optimum attack needs a problem with a known optimum")
        gap = ctx.optimum - ctx.x
        norm = np.linalg.norm(gap)
        n = ctx.honest.shape[0]
        if norm == 0.0:
            return np.zeros_like(ctx.honest)
        vec = self.boost * np.linalg.norm(ctx.full_gradient) * gap / norm
        return np.broadcast_to(vec, (n, vec.size))


@dataclass(frozen=True)
class InvertAndBoost:
    """Send the agent's own gradient inverted and magnified.

    The factor is drawn uniformly from [c_min, c_max] per agent per
    iteration; draws happen for every agent so trajectories do not depend
    on who is byzantine.
    """

    c_min: float = 5.0
    c_max: float = 15.0

    def __post_init__(self) -> None:
        if self.c_min > self.c_max:
            raise ConfigError(f"need c_min <= c_max, got ({self.c_min}, {self.c_max})")

    def vectors(self, ctx: AttackContext, rng: np.random.Generator) -> np.ndarray:
        c = rng.uniform(self.c_min, self.c_max, size=ctx.honest.shape[0])
        return -c[:, None] * ctx.honest


@dataclass(frozen=True)
class LargeRandom:
    """Stress attack: scaled standard-normal noise, fresh per iteration."""

    scale: float = 100.0

    def __post_init__(self) -> None:
        if self.scale < 0.0:
            raise ConfigError(f"scale must be >= 0, got {self.scale}")

    def vectors(self, ctx: AttackContext, rng: np.random.Generator) -> np.ndarray:
        return self.scale * rng.standard_normal(ctx.honest.shape)


Attack = DirectedToOptimum | InvertAndBoost | LargeRandom


def produce_feedback(byzantine: np.ndarray, honest: np.ndarray,
                     attack_vectors: np.ndarray) -> np.ndarray:
    """Honest gradients for trustworthy agents, attack vectors otherwise."""
    return np.where(byzantine[:, None], attack_vectors, honest)
