"""Newsvendor inventory analysis with randomized order policies."""

from .compound import ParameterUncertainty, ScenarioTriple, build_scenario, compound_of
from .distributions import (
    Distribution,
    Empirical,
    Exponential,
    LogNormal,
    Mixture,
    TruncatedNormal,
    Uniform,
    UpperTruncated,
    distribution_from_dict,
    expected_max,
    expected_min,
)
from .errors import NumericalIntegrityError, ScenarioError
from .newsvendor import (
    MarketParams,
    expected_profit,
    optimal_profit,
    optimal_profit_variance,
    optimal_quantity,
    profit_variance,
)
from .policy import (
    Deterministic,
    FeasibilityReport,
    OrderPolicy,
    RhsMode,
    SearchConfig,
    SearchResult,
    Stochastic,
    TraceEntry,
    baseline_profit,
    build_order_dist,
    check_feasibility,
    check_mean_constrained_feasibility,
    expected_profit_stochastic,
    naive_order_quantity,
    search_policy,
)
from .scenario import OrderFamilySpec, Scenario, load_scenario, normalized_dict, parse_scenario
from .simulate import (
    SimConfig,
    SimReport,
    simulate_expected_max,
    simulate_profit,
    simulate_profit_squared_deviation,
)

__version__ = "0.1.0"

__all__ = [
    "Distribution",
    "Uniform",
    "Exponential",
    "LogNormal",
    "TruncatedNormal",
    "Empirical",
    "Mixture",
    "UpperTruncated",
    "distribution_from_dict",
    "expected_max",
    "expected_min",
    "ParameterUncertainty",
    "ScenarioTriple",
    "compound_of",
    "build_scenario",
    "MarketParams",
    "expected_profit",
    "profit_variance",
    "optimal_quantity",
    "optimal_profit",
    "optimal_profit_variance",
    "Deterministic",
    "Stochastic",
    "OrderPolicy",
    "RhsMode",
    "FeasibilityReport",
    "SearchConfig",
    "SearchResult",
    "TraceEntry",
    "naive_order_quantity",
    "expected_profit_stochastic",
    "baseline_profit",
    "check_feasibility",
    "check_mean_constrained_feasibility",
    "search_policy",
    "build_order_dist",
    "SimConfig",
    "SimReport",
    "simulate_profit",
    "simulate_profit_squared_deviation",
    "simulate_expected_max",
    "Scenario",
    "OrderFamilySpec",
    "load_scenario",
    "parse_scenario",
    "normalized_dict",
    "NumericalIntegrityError",
    "ScenarioError",
]
