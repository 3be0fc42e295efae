"""Random order policies for the inventory problem.

When the order size Q is drawn from a distribution G independent of demand,
the expected profit is ``p E[Q] + p E[D] - p E[max(Q, D)] - w E[Q]``.
Randomizing beats the point order computed from a misestimated demand
distribution exactly when a feasibility inequality on (G, compound demand)
holds; this module evaluates that inequality in both of its baseline
readings, the equivalent moment-constrained form for candidates whose mean
is pinned to the point order, and runs a derivative-free search for the
best feasible order distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import log_ndtr

from . import newsvendor
from .compound import ScenarioTriple
from .distributions import (
    Distribution,
    LogNormal,
    TruncatedNormal,
    Uniform,
    _generator,
    expected_max,
)
from .newsvendor import MarketParams

FEASIBILITY_TOL = 1e-10
_POINT_WIDTH = 1e-9
_LOG_ROOT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Deterministic:
    """Order a fixed quantity."""

    quantity: float

    def __post_init__(self):
        if not self.quantity >= 0.0:
            raise ValueError(f"order quantity must be >= 0, got {self.quantity}")


@dataclass(frozen=True)
class Stochastic:
    """Draw the order quantity from a distribution on [0, inf)."""

    order_dist: Distribution


OrderPolicy = Deterministic | Stochastic


class RhsMode(str, Enum):
    """Two readings of the reference profit for the feasibility inequality.

    PARTIAL_EXPECTATION ("theorem") uses ``p * int_0^Q t f(t) dt`` under the
    compound demand, which equals the expected profit of ordering Q only when
    Q happens to optimize the compound demand. EXPECTED_PROFIT ("exact") uses
    the literal expected profit of ordering Q while demand follows the
    compound distribution, which is the economically meaningful baseline when
    the estimate is wrong. The two agree when estimated and compound demand
    coincide.
    """

    PARTIAL_EXPECTATION = "theorem"
    EXPECTED_PROFIT = "exact"


@dataclass(frozen=True)
class FeasibilityReport:
    lhs: float
    rhs: float
    margin: float  # oriented so that a positive margin always means feasible
    feasible: bool
    naive_order: float
    rhs_mode: RhsMode
    profit_gap: float  # p * margin; the expected-profit gain over the baseline

    def to_dict(self) -> dict:
        return {
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "feasible": bool(self.feasible),
            "naive_order": float(self.naive_order),
            "rhs_mode": self.rhs_mode.value,
            "profit_gap": float(self.profit_gap),
        }


def naive_order_quantity(params: MarketParams, estimated: Distribution) -> float:
    """The order a retailer places by optimizing the (possibly wrong) estimate."""
    return newsvendor.optimal_quantity(params, estimated)


def expected_profit_stochastic(
    params: MarketParams, demand: Distribution, policy: OrderPolicy
) -> float:
    """E[profit] when the order follows the policy, independent of demand."""
    p, w = params.p, params.w
    if isinstance(policy, Deterministic):
        q = policy.quantity
        mean_q = q
        # point mass at q: E[max(q, D)] = q F(q) + int_q^inf t f(t) dt
        e_max = q * demand.cdf(q) + demand.upper_partial_expectation(q)
    else:
        g = policy.order_dist
        mean_q = g.mean()
        e_max = expected_max(g, demand)
    return p * mean_q + p * demand.mean() - p * e_max - w * mean_q


def baseline_profit(
    params: MarketParams,
    scenario: ScenarioTriple,
    mode: RhsMode = RhsMode.EXPECTED_PROFIT,
) -> float:
    """Reference profit of ordering the naive quantity, per the chosen reading."""
    naive_q = naive_order_quantity(params, scenario.estimated_demand)
    if mode is RhsMode.PARTIAL_EXPECTATION:
        return params.p * scenario.compound_demand.partial_expectation(naive_q)
    return newsvendor.expected_profit(params, scenario.compound_demand, naive_q)


def check_feasibility(
    params: MarketParams,
    scenario: ScenarioTriple,
    order_dist: Distribution,
    mode: RhsMode = RhsMode.EXPECTED_PROFIT,
) -> FeasibilityReport:
    """Feasibility of a stochastic order against the naive baseline.

    lhs = E[Q](1 - w/p) + E[D] - E[max(Q, D)] under the compound demand;
    rhs = baseline profit / p. The margin times p equals the expected-profit
    gain of the stochastic policy over the baseline.
    """
    compound = scenario.compound_demand
    naive_q = naive_order_quantity(params, scenario.estimated_demand)
    lhs = (
        order_dist.mean() * params.critical_fractile
        + compound.mean()
        - expected_max(order_dist, compound)
    )
    rhs = baseline_profit(params, scenario, mode) / params.p
    margin = lhs - rhs
    return FeasibilityReport(
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        feasible=margin >= -FEASIBILITY_TOL,
        naive_order=naive_q,
        rhs_mode=mode,
        profit_gap=params.p * margin,
    )


def check_mean_constrained_feasibility(
    params: MarketParams, scenario: ScenarioTriple, order_dist: Distribution
) -> FeasibilityReport:
    """Moment-constrained feasibility: requires E[Q] equal to the naive order.

    lhs = E[max(Q, D)] by its two-integral decomposition; rhs = Q F(Q) +
    int_Q^inf t f(t) dt under the compound demand. Feasible iff lhs <= rhs.
    """
    compound = scenario.compound_demand
    naive_q = naive_order_quantity(params, scenario.estimated_demand)
    mean_q = order_dist.mean()
    if abs(mean_q - naive_q) > 1e-6 * max(1.0, naive_q):
        raise ValueError(
            f"moment-constrained check requires E[Q] = {naive_q!r} "
            f"(the naive order), got E[Q] = {mean_q!r}"
        )
    lhs = expected_max(order_dist, compound)
    rhs = naive_q * compound.cdf(naive_q) + compound.upper_partial_expectation(naive_q)
    margin = rhs - lhs
    return FeasibilityReport(
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        feasible=margin >= -FEASIBILITY_TOL,
        naive_order=naive_q,
        rhs_mode=RhsMode.EXPECTED_PROFIT,
        profit_gap=params.p * margin,
    )


# -- candidate order-distribution families ------------------------------------

_FAMILY_PARAMS = {
    ("uniform", False): ("lo", "hi"),
    ("uniform", True): ("width",),
    ("lognormal", False): ("log_mean", "log_sd"),
    ("lognormal", True): ("log_sd",),
    ("truncated_normal", False): ("mean", "sd"),
    ("truncated_normal", True): ("sd",),
    ("point", False): ("q",),
    ("point", True): (),
}


def order_family_param_names(family: str, constrained: bool) -> tuple[str, ...]:
    try:
        return _FAMILY_PARAMS[(family, constrained)]
    except KeyError:
        raise ValueError(
            f"unsupported order family {family!r} "
            f"({'mean-constrained' if constrained else 'unconstrained'})"
        ) from None


def build_order_dist(
    family: str, values: tuple[float, ...], naive_q: float, constrained: bool
) -> Distribution:
    """Construct a candidate order distribution; raises ValueError when the
    parameter point is not a valid member of the family."""
    names = order_family_param_names(family, constrained)
    if len(values) != len(names):
        raise ValueError(f"family {family!r} expects parameters {names}, got {values}")
    if constrained and naive_q <= 0.0 and family != "uniform":
        raise ValueError(f"cannot pin the order mean to {naive_q}")
    if family == "uniform":
        if constrained:
            (width,) = values
            if width <= 0.0:
                raise ValueError(f"width must be > 0, got {width}")
            return Uniform(naive_q - 0.5 * width, naive_q + 0.5 * width)
        lo, hi = values
        return Uniform(lo, hi)
    if family == "lognormal":
        if constrained:
            (log_sd,) = values
            if log_sd <= 0.0:
                raise ValueError(f"log_sd must be > 0, got {log_sd}")
            # location solved exactly from exp(mu + sd^2/2) = target mean
            return LogNormal(math.log(naive_q) - 0.5 * log_sd**2, log_sd)
        log_mean, log_sd = values
        return LogNormal(log_mean, log_sd)
    if family == "truncated_normal":
        if constrained:
            (sd,) = values
            if sd <= 0.0:
                raise ValueError(f"sd must be > 0, got {sd}")
            return TruncatedNormal(_solve_truncnorm_location(naive_q, sd), sd)
        mean, sd = values
        return TruncatedNormal(mean, sd)
    if family == "point":
        q = naive_q if constrained else values[0]
        lo = max(0.0, q - 0.5 * _POINT_WIDTH)
        return Uniform(lo, lo + _POINT_WIDTH)
    raise ValueError(f"unsupported order family {family!r}")


def _truncnorm_mean(location: float, sd: float) -> float:
    z = location / sd
    # inverse Mills ratio in log space; stable for any z
    return location + sd * math.exp(-0.5 * z * z - _LOG_ROOT_2PI - log_ndtr(z))


def _solve_truncnorm_location(target_mean: float, sd: float) -> float:
    """Location parameter whose zero-truncated mean equals the target.

    The truncated mean is strictly increasing in the location and always
    exceeds it, so [target - 2^k sd, target] brackets the root; bisect.
    """
    hi = target_mean
    gap = sd
    lo = target_mean - gap
    for _ in range(200):
        if _truncnorm_mean(lo, sd) < target_mean:
            break
        gap *= 2.0
        lo = target_mean - gap
    else:
        raise ValueError(f"cannot pin the order mean to {target_mean} with sd {sd}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _truncnorm_mean(mid, sd) < target_mean:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(target_mean)):
            break
    return 0.5 * (lo + hi)


# -- search --------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    method: str = "grid"  # "grid" or "random"
    budget: int = 1
    seed: int = 0
    constrain_mean_to_qhat: bool = False

    def __post_init__(self):
        if self.method not in ("grid", "random"):
            raise ValueError(f"search method must be 'grid' or 'random', got {self.method!r}")
        if self.budget < 1:
            raise ValueError(f"search budget must be >= 1, got {self.budget}")


@dataclass(frozen=True)
class TraceEntry:
    candidate_id: int
    params: tuple[float, ...]
    expected_profit: float  # nan when the candidate is not a valid distribution
    margin: float
    feasible: bool


@dataclass(frozen=True)
class SearchResult:
    best_policy: OrderPolicy
    best_params: tuple[float, ...]
    best_expected_profit: float
    baseline_profit: float
    improvement: float
    evaluations: int
    feasible_count: int
    family: str
    param_names: tuple[str, ...]
    rhs_mode: RhsMode
    search_trace: tuple[TraceEntry, ...]

    def to_dict(self) -> dict:
        """JSON-compatible summary; the trace itself goes to CSV."""
        if isinstance(self.best_policy, Deterministic):
            best = {"kind": "deterministic", "quantity": float(self.best_policy.quantity)}
        else:
            best = {
                "kind": "stochastic",
                "family": self.family,
                "params": {
                    name: float(v) for name, v in zip(self.param_names, self.best_params)
                },
            }
        return {
            "best_policy": best,
            "best_expected_profit": float(self.best_expected_profit),
            "baseline_profit": float(self.baseline_profit),
            "improvement": float(self.improvement),
            "evaluations": int(self.evaluations),
            "feasible_count": int(self.feasible_count),
            "rhs_mode": self.rhs_mode.value,
        }


def search_policy(
    params: MarketParams,
    scenario: ScenarioTriple,
    family: str,
    bounds: dict[str, tuple[float, float]],
    cfg: SearchConfig,
    rhs_mode: RhsMode = RhsMode.EXPECTED_PROFIT,
) -> SearchResult:
    """Scan candidate order distributions and keep the best feasible one.

    Grid scans lay an even lattice over the parameter bounds (the budget must
    be a perfect k-th power for k scanned parameters); random scans draw the
    budgeted number of parameter points from a seeded generator. Candidates
    whose mean is pinned to the naive order are gated by the
    moment-constrained check, the rest by the feasibility inequality in the
    configured baseline reading. When nothing feasible turns up, the naive
    deterministic order is retained with zero improvement.
    """
    names = order_family_param_names(family, cfg.constrain_mean_to_qhat)
    _check_bounds(names, bounds)
    candidates = _candidate_points(names, bounds, cfg)

    compound = scenario.compound_demand
    naive_q = naive_order_quantity(params, scenario.estimated_demand)
    base = baseline_profit(params, scenario, rhs_mode)
    fractile = params.critical_fractile
    compound_mean = compound.mean()

    trace: list[TraceEntry] = []
    best_params: tuple[float, ...] | None = None
    best_dist: Distribution | None = None
    best_profit = -math.inf
    feasible_count = 0
    for cid, point in enumerate(candidates):
        try:
            g = build_order_dist(family, point, naive_q, cfg.constrain_mean_to_qhat)
        except ValueError:
            trace.append(TraceEntry(cid, point, math.nan, math.nan, False))
            continue
        if cfg.constrain_mean_to_qhat:
            report = check_mean_constrained_feasibility(params, scenario, g)
            profit = params.p * (g.mean() * fractile + compound_mean - report.lhs)
        else:
            report = check_feasibility(params, scenario, g, rhs_mode)
            profit = params.p * report.lhs
        trace.append(TraceEntry(cid, point, profit, report.margin, report.feasible))
        if report.feasible:
            feasible_count += 1
            if profit > best_profit:
                best_profit = profit
                best_params = point
                best_dist = g

    if best_dist is None:
        return SearchResult(
            best_policy=Deterministic(naive_q),
            best_params=(),
            best_expected_profit=base,
            baseline_profit=base,
            improvement=0.0,
            evaluations=len(candidates),
            feasible_count=0,
            family=family,
            param_names=names,
            rhs_mode=rhs_mode,
            search_trace=tuple(trace),
        )
    return SearchResult(
        best_policy=Stochastic(best_dist),
        best_params=best_params,
        best_expected_profit=best_profit,
        baseline_profit=base,
        improvement=best_profit - base,
        evaluations=len(candidates),
        feasible_count=feasible_count,
        family=family,
        param_names=names,
        rhs_mode=rhs_mode,
        search_trace=tuple(trace),
    )


def _check_bounds(names: tuple[str, ...], bounds: dict) -> None:
    if set(bounds) != set(names):
        raise ValueError(f"search bounds must cover exactly {list(names)}, got {sorted(bounds)}")
    for name in names:
        lo, hi = bounds[name]
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"bounds for {name!r} must be finite with lo <= hi, got {(lo, hi)}")


def _candidate_points(
    names: tuple[str, ...], bounds: dict, cfg: SearchConfig
) -> list[tuple[float, ...]]:
    k = len(names)
    if k == 0:
        return [()] * cfg.budget
    spans = [bounds[name] for name in names]
    if cfg.method == "random":
        draws = _generator(cfg.seed).random((cfg.budget, k))
        return [
            tuple(lo + (hi - lo) * draws[i, j] for j, (lo, hi) in enumerate(spans))
            for i in range(cfg.budget)
        ]
    per_dim = round(cfg.budget ** (1.0 / k))
    if per_dim**k != cfg.budget:
        raise ValueError(
            f"grid search over {k} parameter(s) needs a budget that is a "
            f"perfect {k}-th power, got {cfg.budget}"
        )
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in spans]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    return [tuple(float(v) for v in row) for row in flat]
