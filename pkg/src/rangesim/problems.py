"""Objectives, data generation and gradient oracles.

Two problems are provided: synthetic linear regression (strongly convex,
with a planted solution inside a norm ball) and a small smooth non-convex
toy objective. Both support two sampling modes: ``saa`` (each agent keeps a
fixed batch across iterations) and ``sa`` (fresh samples every iteration).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ConfigError
from .rng import DATA_DOMAIN, PROBLEM_DOMAIN, stream

SAA = "saa"
SA = "sa"
REGIMES = (SAA, SA)


def _check_regime(regime: str) -> None:
    if regime not in REGIMES:
        raise ConfigError(f"unknown sampling regime {regime!r}, expected one of {REGIMES}")


@dataclass(frozen=True)
class LinearRegressionProblem:
    """Least-squares regression on synthetic Gaussian data.

    Labels follow labels = design @ x_star + noise, noise ~ N(0, noise_std^2),
    with x_star drawn uniformly from the interior of the radius ball. Rows
    are split evenly across agents.
    """

    dim: int
    n_samples: int
    n_agents: int
    radius: float
    noise_std: float
    seed: int
    design: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    x_star: np.ndarray = field(repr=False)

    @classmethod
    def generate(cls, dim: int, n_samples: int, n_agents: int, radius: float,
                 noise_std: float, seed: int) -> "LinearRegressionProblem":
        if n_samples % n_agents != 0:
            raise ConfigError(f"n_samples={n_samples} not divisible by n_agents={n_agents}")
        if dim < 1 or radius <= 0 or noise_std < 0:
            raise ConfigError("dim must be >= 1, radius > 0, noise_std >= 0")
        rng = stream(seed, PROBLEM_DOMAIN)
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        x_star = radius * rng.random() ** (1.0 / dim) * direction
        design = rng.standard_normal((n_samples, dim))
        labels = design @ x_star + noise_std * rng.standard_normal(n_samples)
        return cls(dim=dim, n_samples=n_samples, n_agents=n_agents, radius=radius,
                   noise_std=noise_std, seed=seed, design=design, labels=labels,
                   x_star=x_star)

    @property
    def batch(self) -> int:
        return self.n_samples // self.n_agents

    @cached_property
    def least_squares_solution(self) -> np.ndarray:
        sol, *_ = np.linalg.lstsq(self.design, self.labels, rcond=None)
        return sol

    def optimum(self, regime: str) -> np.ndarray:
        """Minimizer of the objective actually optimized in this regime.

        Fixed batches minimize the empirical squared loss, whose minimizer is
        the least-squares solution; fresh sampling minimizes the population
        objective, whose minimizer is the planted solution.
        """
        _check_regime(regime)
        return self.least_squares_solution if regime == SAA else self.x_star

    def _fresh_batch(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        rng = stream(self.seed, DATA_DOMAIN, t)
        design = rng.standard_normal((self.n_samples, self.dim))
        labels = design @ self.x_star + self.noise_std * rng.standard_normal(self.n_samples)
        return design, labels

    def all_honest_gradients(self, x: np.ndarray, t: int, regime: str) -> np.ndarray:
        """(n_agents, dim) array of per-agent minibatch gradients at x."""
        _check_regime(regime)
        design, labels = (self.design, self.labels) if regime == SAA else self._fresh_batch(t)
        b = self.batch
        blocks = design.reshape(self.n_agents, b, self.dim)
        residual = np.einsum("nbd,d->nb", blocks, x) - labels.reshape(self.n_agents, b)
        return (2.0 / b) * np.einsum("nbd,nb->nd", blocks, residual)

    def honest_gradient(self, agent: int, x: np.ndarray, t: int, regime: str) -> np.ndarray:
        return self.all_honest_gradients(x, t, regime)[agent]

    def true_gradient(self, x: np.ndarray, regime: str = SAA) -> np.ndarray:
        """Full-data gradient (fixed batches) or population gradient (fresh)."""
        _check_regime(regime)
        if regime == SAA:
            return (2.0 / self.n_samples) * (self.design.T @ (self.design @ x - self.labels))
        return 2.0 * (x - self.x_star)

    def curvature(self) -> tuple[float, float, float]:
        """(strong convexity, smoothness, condition number) of the empirical loss."""
        eigs = np.linalg.eigvalsh((2.0 / self.n_samples) * (self.design.T @ self.design))
        mu, smooth = float(eigs[0]), float(eigs[-1])
        return mu, smooth, smooth / mu

    def noise_sigma(self) -> float:
        """Per-coordinate scale of per-sample gradient noise at the solution."""
        return 2.0 * self.noise_std


@dataclass(frozen=True)
class NonConvexToyProblem:
    """Separable smooth non-convex objective sum_k x_k^2 + wiggle * sin(x_k)^2.

    Smooth with constant 2 + 2 * wiggle, global minimum at the origin,
    unconstrained. Agents see the analytic gradient plus Gaussian noise:
    a fixed per-agent offset under ``saa``, fresh draws under ``sa``.
    """

    dim: int
    n_agents: int
    wiggle: float
    noise_std: float
    seed: int
    fixed_offsets: np.ndarray = field(repr=False)

    radius = None  # unconstrained

    @classmethod
    def generate(cls, dim: int, n_agents: int, wiggle: float, noise_std: float,
                 seed: int) -> "NonConvexToyProblem":
        if dim < 1 or wiggle < 0 or noise_std < 0:
            raise ConfigError("dim must be >= 1, wiggle >= 0, noise_std >= 0")
        rng = stream(seed, PROBLEM_DOMAIN)
        offsets = noise_std * rng.standard_normal((n_agents, dim))
        return cls(dim=dim, n_agents=n_agents, wiggle=wiggle, noise_std=noise_std,
                   seed=seed, fixed_offsets=offsets)

    @property
    def batch(self) -> int:
        return 1

    def optimum(self, regime: str) -> np.ndarray:
        return np.zeros(self.dim)

    def value(self, x: np.ndarray) -> float:
        return float(np.sum(x * x + self.wiggle * np.sin(x) ** 2))

    def true_gradient(self, x: np.ndarray, regime: str = SAA) -> np.ndarray:
        return 2.0 * x + self.wiggle * np.sin(2.0 * x)

    def smoothness(self) -> float:
        return 2.0 + 2.0 * self.wiggle

    def all_honest_gradients(self, x: np.ndarray, t: int, regime: str) -> np.ndarray:
        _check_regime(regime)
        grad = self.true_gradient(x)
        if regime == SAA:
            return grad + self.fixed_offsets
        rng = stream(self.seed, DATA_DOMAIN, t)
        return grad + self.noise_std * rng.standard_normal((self.n_agents, self.dim))

    def honest_gradient(self, agent: int, x: np.ndarray, t: int, regime: str) -> np.ndarray:
        return self.all_honest_gradients(x, t, regime)[agent]

    def noise_sigma(self) -> float:
        return self.noise_std


Problem = LinearRegressionProblem | NonConvexToyProblem
