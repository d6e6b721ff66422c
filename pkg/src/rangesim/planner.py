"""Failure-probability bounds and parameter selection.

Quantities of interest: the chance a single agent's report window holds more
corrupt entries than its trim budget ("window failure"), and the chance that
more agents than the aggregation trim budget have failed windows ("aggregate
failure"). The module provides a closed-form Chernoff-style bound, the exact
Markov-chain probability, special cases (single-entry windows, memoryless
corruption), a minimum window size that certifies the convergence condition,
and the explicit constants used by the step-size rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InfeasibleParameterError
from .estimator import trim_count, trim_error_constant

# the exact window-failure form costs O(window^2) terms; beyond this the
# report falls back to the Chernoff bound alone
EXACT_WINDOW_LIMIT = 3000


def _check_chain(p_corrupt: float, p_recover: float) -> None:
    if not 0.0 < p_corrupt < p_recover < 1.0:
        raise InfeasibleParameterError(
            f"bounds need 0 < p_corrupt < p_recover < 1, got ({p_corrupt}, {p_recover})")


def corruption_ratio(p_corrupt: float, p_recover: float) -> float:
    """Long-run fraction of time an agent spends byzantine."""
    return p_corrupt / (p_corrupt + p_recover)


def chernoff_k_factor(p_corrupt: float, p_recover: float, burn_in: int) -> float:
    """Worst-case start-distribution factor, decaying to 1 with burn-in."""
    _check_chain(p_corrupt, p_recover)
    lam = 1.0 - p_corrupt - p_recover
    return math.sqrt(1.0 + lam ** (2 * burn_in) * p_recover / p_corrupt)


def window_failure_chernoff(p_corrupt: float, p_recover: float, window: int,
                            window_trim: float, burn_in: int, clamp: bool = True) -> float:
    """Chernoff-style upper bound on the window-failure probability.

    Valid only when the trim budget exceeds the long-run corruption ratio;
    values above 1 are clamped unless ``clamp`` is False.
    """
    _check_chain(p_corrupt, p_recover)
    gap = p_corrupt + p_recover
    ratio = corruption_ratio(p_corrupt, p_recover)
    if window_trim <= ratio:
        raise InfeasibleParameterError(
            f"window_trim must exceed the corruption ratio {ratio:.6g}, got {window_trim}")
    raw = chernoff_k_factor(p_corrupt, p_recover, burn_in) * math.exp(
        -gap * window * (window_trim - ratio) ** 2 / 12.0 + gap / 5.0)
    return min(raw, 1.0) if clamp else raw


def binomial_tail_above(n: int, cutoff: int, p: float) -> float:
    """P(Binomial(n, p) > cutoff), accumulated with log-space terms."""
    if not 0 <= cutoff <= n:
        raise ValueError(f"cutoff must be in [0, {n}], got {cutoff}")
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0 if cutoff < n else 0.0
    log_p, log_q = math.log(p), math.log1p(-p)
    terms = []
    for k in range(cutoff + 1, n + 1):
        log_c = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        terms.append(log_c + k * log_p + (n - k) * log_q)
    if not terms:
        return 0.0
    top = max(terms)
    return min(1.0, math.exp(top) * sum(math.exp(t - top) for t in terms))


def aggregate_failure_binomial(window_failure: float, n_agents: int,
                               agent_trim: float) -> float:
    """Binomial tail bound: more than agent_trim * n_agents windows fail."""
    if not 0.0 <= window_failure <= 1.0:
        raise ValueError(f"window_failure must be in [0, 1], got {window_failure}")
    cutoff = trim_count(agent_trim, n_agents)
    return binomial_tail_above(n_agents, cutoff, window_failure)


def aggregate_failure_hoeffding(window_failure: float, n_agents: int, agent_trim: float,
                                kappa: Optional[float] = None) -> tuple[float, Optional[bool]]:
    """Exponential tail bound and, if kappa is given, whether it certifies
    the strongly convex condition (bound < 1 / (1 + kappa)).

    Vacuous (1.0, not certified) when the trim budget does not exceed the
    window-failure level.
    """
    if agent_trim <= window_failure:
        return 1.0, (False if kappa is not None else None)
    bound = math.exp(-2.0 * (agent_trim - window_failure) ** 2 * n_agents)
    if kappa is None:
        return bound, None
    return bound, bound < 1.0 / (1.0 + kappa)


def min_window_size(window_trim: float, agent_trim: float, p_corrupt: float,
                    p_recover: float, kappa: float, n_agents: int) -> int:
    """Smallest window certifying the strongly convex condition for any burn-in.

    Solves the closed-form sufficient condition for the window length, then
    rounds up to the next integer making window_trim * window integral.
    """
    _check_chain(p_corrupt, p_recover)
    ratio = corruption_ratio(p_corrupt, p_recover)
    margin = agent_trim - math.sqrt(math.log(1.0 + kappa) / (2.0 * n_agents))
    if margin <= 0.0:
        raise InfeasibleParameterError(
            f"agent_trim={agent_trim} must exceed sqrt(log(1+kappa)/(2 n_agents)) = "
            f"{agent_trim - margin:.6g}")
    if window_trim <= ratio:
        raise InfeasibleParameterError(
            f"window_trim must exceed the corruption ratio {ratio:.6g}, got {window_trim}")
    gap = p_corrupt + p_recover
    rhs = 12.0 * math.log(gap * math.exp(gap / 5.0) / (p_corrupt * margin)) \
        / (gap * (window_trim - ratio) ** 2)
    window = max(1, math.floor(rhs) + 1)
    for candidate in range(window, window + 100000):
        try:
            trim_count(window_trim, candidate)
        except ValueError:
            continue
        return candidate
    raise InfeasibleParameterError(
        f"no window <= {window + 100000} makes window_trim={window_trim} integral")


def single_window_failure(p_corrupt: float, p_recover: float, burn_in: int) -> float:
    """Exact failure probability for window 1: worst-case corrupt probability
    after ``burn_in`` steps from a byzantine start."""
    gap = p_corrupt + p_recover
    if gap <= 0.0:
        raise InfeasibleParameterError("p_corrupt + p_recover must be positive")
    lam = 1.0 - gap
    return (p_corrupt + p_recover * lam ** burn_in) / gap


def independent_window_failure(p_corrupt: float, p_recover: float, window: int,
                               window_trim: float) -> float:
    """Exact failure probability when states are memoryless (gap equals 1)."""
    if abs(p_corrupt + p_recover - 1.0) > 1e-12:
        raise InfeasibleParameterError(
            f"memoryless case needs p_corrupt + p_recover = 1, got {p_corrupt + p_recover}")
    cutoff = trim_count(window_trim, window)
    return binomial_tail_above(window, cutoff, p_corrupt)


def _comb(n: int, r: int) -> int:
    if r < 0 or n < 0 or r > n:
        return 0
    return math.comb(n, r)


def _run_term(count: int, p_corrupt: float, n_corrupt: int, p_recover: float,
              n_recover: int, stay_byz: float, n_stay_byz: int, stay_trust: float,
              n_stay_trust: int) -> float:
    if count == 0:
        return 0.0
    log_term = math.log(count)
    for base, power in ((p_corrupt, n_corrupt), (p_recover, n_recover),
                        (stay_byz, n_stay_byz), (stay_trust, n_stay_trust)):
        if power:
            if base <= 0.0:
                return 0.0
            log_term += power * math.log(base)
    return math.exp(log_term)


def byzantine_count_pmf(window: int, p_corrupt: float, p_recover: float,
                        start_byzantine: bool) -> np.ndarray:
    """Distribution of the number of byzantine states among ``window``
    consecutive states, conditioned on the first state.

    Closed form by counting run patterns: a sequence with k byzantine states
    in j maximal runs fixes all four transition counts, and compositions
    count the sequences.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    m = window
    pb, pt = p_corrupt, p_recover
    stay_t, stay_b = 1.0 - pb, 1.0 - pt
    pmf = np.zeros(m + 1)
    if m == 1:
        pmf[1 if start_byzantine else 0] = 1.0
        return pmf
    if start_byzantine:
        pmf[m] = stay_b ** (m - 1)
        for k in range(1, m):
            acc = 0.0
            for j in range(1, k + 1):
                ones = _comb(k - 1, j - 1)
                acc += _run_term(ones * _comb(m - k - 1, j - 2),
                                 pb, j - 1, pt, j - 1, stay_b, k - j, stay_t, m - k - j + 1)
                acc += _run_term(ones * _comb(m - k - 1, j - 1),
                                 pb, j - 1, pt, j, stay_b, k - j, stay_t, m - k - j)
            pmf[k] = acc
    else:
        pmf[0] = stay_t ** (m - 1)
        for k in range(1, m):
            acc = 0.0
            for j in range(1, k + 1):
                ones = _comb(k - 1, j - 1)
                acc += _run_term(ones * _comb(m - k - 1, j - 1),
                                 pb, j, pt, j - 1, stay_b, k - j, stay_t, m - k - j)
                acc += _run_term(ones * _comb(m - k - 1, j),
                                 pb, j, pt, j, stay_b, k - j, stay_t, m - k - j - 1)
            pmf[k] = acc
    return pmf


def worst_case_start_distribution(p_corrupt: float, p_recover: float,
                                  burn_in: int) -> tuple[float, float]:
    """(trustworthy, byzantine) distribution ``burn_in`` steps after a
    byzantine state, the worst admissible window start."""
    gap = p_corrupt + p_recover
    if gap <= 0.0:
        raise InfeasibleParameterError("p_corrupt + p_recover must be positive")
    lam = 1.0 - gap
    byz = (p_corrupt + p_recover * lam ** burn_in) / gap
    return 1.0 - byz, byz


def exact_window_failure(p_corrupt: float, p_recover: float, window: int,
                         window_trim: float, burn_in: int) -> float:
    """Exact worst-case window-failure probability.

    Mixes the conditional count distributions over the worst-case start
    distribution and sums the tail above the trim budget.
    """
    cutoff = trim_count(window_trim, window)
    start_trust, start_byz = worst_case_start_distribution(p_corrupt, p_recover, burn_in)
    total = 0.0
    for start, weight in ((False, start_trust), (True, start_byz)):
        if weight == 0.0:
            continue
        pmf = byzantine_count_pmf(window, p_corrupt, p_recover, start)
        total += weight * float(pmf[cutoff + 1:].sum())
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class BoundInputs:
    """Algorithm, chain and problem quantities the bounds depend on."""

    window: int
    burn_in: int
    n_agents: int
    window_trim: float
    agent_trim: float
    p_corrupt: float
    p_recover: float
    dim: int
    kappa: Optional[float] = None
    smoothness: Optional[float] = None
    strong_convexity: Optional[float] = None
    radius: Optional[float] = None
    sigma: Optional[float] = None
    batch: Optional[int] = None

    def __post_init__(self) -> None:
        _check_chain(self.p_corrupt, self.p_recover)
        if self.window < 1 or self.burn_in < 0 or self.n_agents < 1 or self.dim < 1:
            raise InfeasibleParameterError("window, n_agents, dim >= 1 and burn_in >= 0 required")
        for name, trim, count in (("window_trim", self.window_trim, self.window),
                                  ("agent_trim", self.agent_trim, self.n_agents)):
            if not 0.0 <= trim < 0.5:
                raise InfeasibleParameterError(f"{name} must be in [0, 0.5), got {trim}")
            try:
                trim_count(trim, count)
            except ValueError as err:
                raise InfeasibleParameterError(str(err)) from None

    def condition_number(self) -> Optional[float]:
        if self.kappa is not None:
            return self.kappa
        if self.smoothness is not None and self.strong_convexity is not None:
            return self.smoothness / self.strong_convexity
        return None


@dataclass
class BoundReport:
    """Everything the planner can say about one parameter tuple."""

    inputs: BoundInputs
    window_failure_exact: Optional[float]
    window_failure_chernoff: Optional[float]
    window_failure_chernoff_raw: Optional[float]
    chernoff_vacuous: Optional[bool]
    k_factor: Optional[float]
    aggregate_failure: float
    aggregate_failure_chernoff: Optional[float]
    aggregate_failure_hoeffding: Optional[float]
    hoeffding_certified: Optional[bool]
    certifies_strongly_convex: Optional[bool]
    certifies_nonconvex: bool
    trim_constant_window: float
    trim_constant_agents: float
    contraction_coeff: Optional[float]
    stepsize_constant_cvx: Optional[float]
    stepsize_constant_noncvx: Optional[float]
    step_size_max_saa: Optional[float]
    step_size_max_sa: Optional[float]
    neighborhood_estimate_saa: Optional[float]
    min_window: Optional[int] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        data = {k: v for k, v in self.__dict__.items() if k != "inputs"}
        data["inputs"] = {k: v for k, v in self.inputs.__dict__.items()}
        return data


def compute_report(inputs: BoundInputs) -> BoundReport:
    """Evaluate every bound this module offers for one parameter tuple.

    The exact window-failure probability drives the aggregate-level
    decisions when the window permits it; the Chernoff form is reported
    alongside (and alone for very large windows).
    """
    notes: list[str] = []
    ratio = corruption_ratio(inputs.p_corrupt, inputs.p_recover)
    chernoff = chernoff_raw = k_fac = None
    vacuous = None
    if inputs.window_trim > ratio:
        k_fac = chernoff_k_factor(inputs.p_corrupt, inputs.p_recover, inputs.burn_in)
        chernoff_raw = window_failure_chernoff(
            inputs.p_corrupt, inputs.p_recover, inputs.window, inputs.window_trim,
            inputs.burn_in, clamp=False)
        chernoff = min(1.0, chernoff_raw)
        vacuous = chernoff_raw > 1.0
    else:
        notes.append(f"window_trim <= corruption ratio {ratio:.6g}: Chernoff bound not applicable")

    exact = None
    if inputs.window <= EXACT_WINDOW_LIMIT:
        exact = exact_window_failure(inputs.p_corrupt, inputs.p_recover, inputs.window,
                                     inputs.window_trim, inputs.burn_in)
    else:
        notes.append(f"window > {EXACT_WINDOW_LIMIT}: exact window-failure form skipped")

    window_failure = exact if exact is not None else chernoff
    if window_failure is None:
        window_failure = 1.0
        notes.append("no applicable window-failure bound; assuming 1")
    aggregate = aggregate_failure_binomial(window_failure, inputs.n_agents, inputs.agent_trim)
    aggregate_chernoff = None
    if chernoff is not None:
        aggregate_chernoff = aggregate_failure_binomial(chernoff, inputs.n_agents,
                                                        inputs.agent_trim)

    kappa = inputs.condition_number()
    hoeffding = hoeffding_certified = None
    if chernoff is not None:
        hoeffding, hoeffding_certified = aggregate_failure_hoeffding(
            chernoff, inputs.n_agents, inputs.agent_trim, kappa)

    certifies_cvx = None if kappa is None else aggregate < 1.0 / (1.0 + kappa)
    certifies_noncvx = aggregate < 0.5

    c_window = trim_error_constant(inputs.window_trim, inputs.dim)
    c_agents = trim_error_constant(inputs.agent_trim, inputs.dim)

    mu = inputs.strong_convexity
    if mu is None and kappa is not None and inputs.smoothness is not None:
        mu = inputs.smoothness / kappa
    lag = inputs.window - 1 + inputs.burn_in
    mix = 1.0 + c_window + 2.0 * c_agents * (c_window + 1.0)

    contraction = None
    if kappa is not None and inputs.radius is not None:
        contraction = (2.0 / (kappa * inputs.radius)) * (1.0 - aggregate * (1.0 + kappa))

    cbar_cvx = None
    if kappa is not None:
        cbar_cvx = 1.0 + 4.0 * aggregate * (1.0 + 1.0 / kappa) * lag \
            + 4.0 * kappa * (inputs.window - 1) * mix
    cbar_noncvx = None
    if inputs.smoothness is not None:
        cbar_noncvx = inputs.smoothness * (
            0.5 + 4.0 * lag * aggregate + 2.0 * (inputs.window - 1) * mix)

    gamma_saa = gamma_sa = None
    if cbar_cvx is not None and mu is not None and inputs.sigma is not None \
            and inputs.batch is not None:
        denom = cbar_cvx * mu
        gamma_saa = 4.0 * inputs.sigma / (
            denom * math.sqrt((1.0 - inputs.agent_trim) * inputs.n_agents * inputs.batch))
        gamma_sa = 4.0 * inputs.sigma / (
            denom * math.sqrt((1.0 - inputs.agent_trim) * inputs.n_agents
                              * (1.0 - inputs.window_trim) * inputs.window * inputs.batch))

    neighborhood = None
    if gamma_saa is not None and contraction is not None and contraction > 0:
        log_term = math.log(2.0 * (1.0 - inputs.agent_trim) * inputs.n_agents * inputs.dim)
        b = float(inputs.batch)
        statistical = 4.0 * inputs.sigma / (mu * math.sqrt((1.0 - inputs.agent_trim)
                                                           * inputs.n_agents * b)) \
            + 8.0 * c_agents * inputs.sigma * math.sqrt(2.0 * log_term) / (mu * math.sqrt(b))
        neighborhood = (statistical + cbar_cvx * gamma_saa) / contraction
        notes.append("neighborhood_estimate_saa is advisory: explicit constants of a "
                     "worst-case bound, typically far above realized error")

    min_window = None
    if kappa is not None:
        try:
            min_window = min_window_size(inputs.window_trim, inputs.agent_trim,
                                         inputs.p_corrupt, inputs.p_recover, kappa,
                                         inputs.n_agents)
        except InfeasibleParameterError as err:
            notes.append(f"min_window unavailable: {err}")

    return BoundReport(
        inputs=inputs,
        window_failure_exact=exact,
        window_failure_chernoff=chernoff,
        window_failure_chernoff_raw=chernoff_raw,
        chernoff_vacuous=vacuous,
        k_factor=k_fac,
        aggregate_failure=aggregate,
        aggregate_failure_chernoff=aggregate_chernoff,
        aggregate_failure_hoeffding=hoeffding,
        hoeffding_certified=hoeffding_certified,
        certifies_strongly_convex=certifies_cvx,
        certifies_nonconvex=certifies_noncvx,
        trim_constant_window=c_window,
        trim_constant_agents=c_agents,
        contraction_coeff=contraction,
        stepsize_constant_cvx=cbar_cvx,
        stepsize_constant_noncvx=cbar_noncvx,
        step_size_max_saa=gamma_saa,
        step_size_max_sa=gamma_sa,
        neighborhood_estimate_saa=neighborhood,
        min_window=min_window,
        notes=notes,
    )


def format_report(report: BoundReport) -> str:
    """Fixed-width table for terminal output."""
    rows: list[tuple[str, object]] = []
    ins = report.inputs
    rows.append(("window / burn_in", f"{ins.window} / {ins.burn_in}"))
    rows.append(("n_agents", ins.n_agents))
    rows.append(("window_trim / agent_trim", f"{ins.window_trim} / {ins.agent_trim}"))
    rows.append(("p_corrupt / p_recover", f"{ins.p_corrupt} / {ins.p_recover}"))
    rows.append(("corruption ratio", corruption_ratio(ins.p_corrupt, ins.p_recover)))
    rows.append(("window failure (exact)", report.window_failure_exact))
    rows.append(("window failure (chernoff)", report.window_failure_chernoff))
    rows.append(("  raw / vacuous", f"{report.window_failure_chernoff_raw} / {report.chernoff_vacuous}"))
    rows.append(("  start factor", report.k_factor))
    rows.append(("aggregate failure (binomial)", report.aggregate_failure))
    rows.append(("aggregate failure (hoeffding)", report.aggregate_failure_hoeffding))
    rows.append(("certifies strongly convex", report.certifies_strongly_convex))
    rows.append(("certifies nonconvex", report.certifies_nonconvex))
    rows.append(("trim constants (window / agents)",
                 f"{report.trim_constant_window:.6g} / {report.trim_constant_agents:.6g}"))
    rows.append(("contraction coeff", report.contraction_coeff))
    rows.append(("stepsize constant (cvx / noncvx)",
                 f"{report.stepsize_constant_cvx} / {report.stepsize_constant_noncvx}"))
    rows.append(("max step size (saa / sa)",
                 f"{report.step_size_max_saa} / {report.step_size_max_sa}"))
    rows.append(("neighborhood estimate (advisory)", report.neighborhood_estimate_saa))
    rows.append(("min window suggestion", report.min_window))
    width = max(len(name) for name, _ in rows)
    lines = [f"{name:<{width}}  {value}" for name, value in rows]
    lines.extend(f"note: {note}" for note in report.notes)
    return "\n".join(lines)
