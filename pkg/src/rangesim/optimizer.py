"""The robust averaging normalized gradient optimizer and baseline rules.

One update: robustify each agent's feedback by a trimmed mean over its last
``window`` reports, aggregate the robustified gradients by a trimmed mean
across agents, then take a fixed-length projected step along the negated
aggregate direction. Baseline aggregation rules (plain mean, coordinate
median, norm clipping) use conventional unnormalized updates instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._sliding import SlidingWindows
from .errors import ConfigError
from .estimator import trim_count, trimmed_mean


def project(x: np.ndarray, radius: float | None) -> np.ndarray:
    """Euclidean projection onto the origin-centered ball, identity if None."""
    if radius is None:
        return x
    norm = np.linalg.norm(x)
    if norm <= radius:
        return x
    return x * (radius / norm)


@dataclass(frozen=True)
class RangeConfig:
    """Update parameters: step size, window length, trim fractions, horizon.

    ``burn_in`` extends the run so late-iterate guarantees can condition on
    an earlier chain state; the loop executes
    horizon + window - 1 + burn_in updates.
    """

    step_size: float
    window: int = 1
    burn_in: int = 0
    window_trim: float = 0.0
    agent_trim: float = 0.0
    horizon: int = 1

    def __post_init__(self) -> None:
        if self.step_size <= 0:
            raise ConfigError(f"step_size must be > 0, got {self.step_size}")
        if self.window < 1 or self.burn_in < 0 or self.horizon < 1:
            raise ConfigError("window >= 1, burn_in >= 0 and horizon >= 1 required")
        for name, trim in (("window_trim", self.window_trim), ("agent_trim", self.agent_trim)):
            if not 0.0 <= trim < 0.5:
                raise ConfigError(f"{name} must be in [0, 0.5), got {trim}")
        try:
            trim_count(self.window_trim, self.window)
        except ValueError as err:
            raise ConfigError(f"window_trim * window must be an integer: {err}") from None

    def validate_agents(self, n_agents: int) -> None:
        try:
            trim_count(self.agent_trim, n_agents)
        except ValueError as err:
            raise ConfigError(f"agent_trim * n_agents must be an integer: {err}") from None

    @property
    def total_iterations(self) -> int:
        return self.horizon + self.window - 1 + self.burn_in


class RangeOptimizer:
    """Holds the iterate and per-agent report windows; one `step` per iteration."""

    def __init__(self, x0: np.ndarray, cfg: RangeConfig, n_agents: int,
                 radius: float | None):
        cfg.validate_agents(n_agents)
        self.cfg = cfg
        self.n_agents = n_agents
        self.radius = radius
        self.x = project(np.array(x0, dtype=np.float64), radius)
        self.dim = self.x.size
        self.iteration = 0
        self._windows = SlidingWindows(n_agents * self.dim, cfg.window)
        self._window_kept = cfg.window - trim_count(cfg.window_trim, cfg.window)
        self._agent_kept = n_agents - trim_count(cfg.agent_trim, n_agents)

    @property
    def total_iterations(self) -> int:
        return self.cfg.total_iterations

    def step(self, feedback: np.ndarray) -> np.ndarray:
        """Consume the agents' reports for the next iteration, update x."""
        feedback = np.asarray(feedback, dtype=np.float64)
        if feedback.shape != (self.n_agents, self.dim):
            raise ValueError(f"feedback must have shape {(self.n_agents, self.dim)}")
        t = self.iteration + 1
        self._windows.push(feedback.reshape(-1))
        if t <= self.cfg.window - 1:
            robustified = feedback  # window not filled yet, use reports as-is
        else:
            robustified = self._windows.trimmed_mean(self._window_kept).reshape(
                self.n_agents, self.dim)
        aggregate = trimmed_mean(robustified, self._agent_kept)
        norm = np.linalg.norm(aggregate)
        if norm != 0.0:
            self.x = project(self.x - self.cfg.step_size * aggregate / norm, self.radius)
        self.iteration = t
        return self.x

    @property
    def in_warmup(self) -> bool:
        return self.iteration + 1 <= self.cfg.window - 1

    def window_view(self, agent: int) -> np.ndarray:
        """Stored reports for one agent, newest first, shape (filled, dim)."""
        lanes = [agent * self.dim + j for j in range(self.dim)]
        return np.stack([self._windows.lane_window(lane) for lane in lanes], axis=1)


@dataclass(frozen=True)
class MeanRule:
    name = "mean"

    def aggregate(self, grads: np.ndarray) -> np.ndarray:
        return grads.mean(axis=0)


@dataclass(frozen=True)
class CoordinateMedianRule:
    name = "coordinate_median"

    def aggregate(self, grads: np.ndarray) -> np.ndarray:
        return np.median(grads, axis=0)


@dataclass(frozen=True)
class NormClipRule:
    """Average of gradients individually rescaled to norm at most threshold."""

    threshold: float = 10.0
    name = "norm_clip"

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ConfigError(f"threshold must be > 0, got {self.threshold}")

    def aggregate(self, grads: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(grads, axis=1)
        scale = np.ones_like(norms)
        big = norms > self.threshold
        scale[big] = self.threshold / norms[big]
        return (grads * scale[:, None]).mean(axis=0)


AggregationRule = MeanRule | CoordinateMedianRule | NormClipRule


def baseline_step(x: np.ndarray, grads: np.ndarray, rule: AggregationRule,
                  step_size: float, radius: float | None) -> np.ndarray:
    """Unnormalized descent step on the rule's aggregate, then projection."""
    return project(x - step_size * rule.aggregate(grads), radius)


class BaselineOptimizer:
    """Baseline counterpart of RangeOptimizer with the same stepping surface."""

    def __init__(self, x0: np.ndarray, rule: AggregationRule, step_size: float,
                 horizon: int, n_agents: int, radius: float | None):
        if step_size <= 0 or horizon < 1:
            raise ConfigError("step_size must be > 0 and horizon >= 1")
        self.rule = rule
        self.step_size = step_size
        self.horizon = horizon
        self.n_agents = n_agents
        self.radius = radius
        self.x = project(np.array(x0, dtype=np.float64), radius)
        self.dim = self.x.size
        self.iteration = 0

    @property
    def total_iterations(self) -> int:
        return self.horizon

    @property
    def in_warmup(self) -> bool:
        return False

    def step(self, feedback: np.ndarray) -> np.ndarray:
        self.x = baseline_step(self.x, np.asarray(feedback, dtype=np.float64),
                               self.rule, self.step_size, self.radius)
        self.iteration += 1
        return self.x
