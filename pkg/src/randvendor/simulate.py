"""Monte-Carlo cross-checks for every analytic quantity in the package.

Draws are partitioned into batches, each driven by a counter-based generator
keyed on (seed, batch_index), so results are reproducible and independent of
how batches would be scheduled. A streaming one-pass accumulator merges the
per-batch moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, _generator
from .newsvendor import MarketParams
from .policy import Deterministic, OrderPolicy


@dataclass(frozen=True)
class SimConfig:
    n_draws: int
    seed: int = 0
    batch_size: int = 262_144
    antithetic: bool = False

    def __post_init__(self):
        if self.n_draws < 1:
            raise ValueError(f"n_draws must be >= 1, got {self.n_draws}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.antithetic and self.n_draws % 2:
            raise ValueError("antithetic pairing needs an even n_draws")


@dataclass(frozen=True)
class SimReport:
    mean: float
    variance: float
    std_error: float
    n: int  # observations: draws, or antithetic pairs when pairing is on
    ci95: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "mean": float(self.mean),
            "variance": float(self.variance),
            "std_error": float(self.std_error),
            "n": int(self.n),
            "ci95": [float(self.ci95[0]), float(self.ci95[1])],
        }


class _Accumulator:
    """Streaming (n, mean, M2) merge; one pass over the batches."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add_batch(self, values: np.ndarray) -> None:
        bn = values.size
        if bn == 0:
            return
        bmean = float(values.mean())
        bm2 = float(((values - bmean) ** 2).sum())
        delta = bmean - self.mean
        total = self.n + bn
        self.mean += delta * bn / total
        self.m2 += bm2 + delta * delta * self.n * bn / total
        self.n = total

    def report(self) -> SimReport:
        variance = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        std_error = math.sqrt(variance / self.n)
        return SimReport(
            mean=self.mean,
            variance=variance,
            std_error=std_error,
            n=self.n,
            ci95=(self.mean - 1.96 * std_error, self.mean + 1.96 * std_error),
        )


def simulate_values(transform, n_uniforms: int, cfg: SimConfig) -> SimReport:
    """Estimate E[transform(U)] where U is a row of independent uniforms.

    ``transform`` maps an (m, n_uniforms) array of uniform draws to m values.
    With antithetic pairing on, each observation is the average of the
    transform at u and at 1 - u; the integrand must be monotone in each
    coordinate for the pairing to reduce variance.
    """
    acc = _Accumulator()
    observations = cfg.n_draws // 2 if cfg.antithetic else cfg.n_draws
    per_batch = max(1, cfg.batch_size // 2) if cfg.antithetic else cfg.batch_size
    done = 0
    batch_index = 0
    while done < observations:
        m = min(per_batch, observations - done)
        u = _generator(cfg.seed, batch_index).random((m, n_uniforms))
        if cfg.antithetic:
            values = 0.5 * (transform(u) + transform(1.0 - u))
        else:
            values = transform(u)
        acc.add_batch(np.asarray(values, dtype=float))
        done += m
        batch_index += 1
    return acc.report()


def _profit_transform(params: MarketParams, demand: Distribution, policy: OrderPolicy):
    p, w = params.p, params.w
    if isinstance(policy, Deterministic):
        q = policy.quantity

        def transform(u):
            d = demand.from_uniform(u[:, 0])
            return p * np.minimum(q, d) - w * q

        return transform, 1

    order_dist = policy.order_dist

    def transform(u):
        d = demand.from_uniform(u[:, 0])
        q = order_dist.from_uniform(u[:, 1])
        return p * np.minimum(q, d) - w * q

    return transform, 2


def simulate_profit(
    params: MarketParams, demand: Distribution, policy: OrderPolicy, cfg: SimConfig
) -> SimReport:
    """Realized-profit statistics: per draw, p * min(q, d) - w * q."""
    transform, dim = _profit_transform(params, demand, policy)
    return simulate_values(transform, dim, cfg)


def simulate_profit_squared_deviation(
    params: MarketParams,
    demand: Distribution,
    policy: OrderPolicy,
    center: float,
    cfg: SimConfig,
) -> SimReport:
    """Mean of (profit - center)^2.

    With ``center`` set to the analytic expected profit this estimates the
    profit variance as a plain mean, so the usual standard error applies.
    """
    base, dim = _profit_transform(params, demand, policy)

    def transform(u):
        return (base(u) - center) ** 2

    return simulate_values(transform, dim, cfg)


def simulate_expected_max(
    dist_a: Distribution, dist_b: Distribution, cfg: SimConfig
) -> SimReport:
    """E[max(X, Y)] for independent draws; the oracle for the quadrature path."""

    def transform(u):
        return np.maximum(dist_a.from_uniform(u[:, 0]), dist_b.from_uniform(u[:, 1]))

    return simulate_values(transform, 2, cfg)
