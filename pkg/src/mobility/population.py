"""Synthetic creator populations with per-creator random substreams."""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .core import MobilityTechnology, Preference, PriceSystem
from .errors import InvariantViolation
from .pareto import DEFAULT_TOLERANCE, ParetoVerdict, pareto_compare
from .policy import Fungible, PolicyOutcome, PolicyRegime
from .temporal.paths import TemporalTechnology, TimePath

__all__ = [
    "CreatorSpec", "Distribution", "PopulationSpec", "PopulationSummary", "ParetoVerdict",
    "aggregate_report", "creator_rng", "generate_population", "pareto_compare",
    "DEFAULT_TOLERANCE",
]

PARAMS = ("a", "b", "c", "alpha", "beta", "gamma", "delta", "phi", "budget")
_EXPONENTS = ("alpha", "beta", "gamma", "delta")


@dataclass(frozen=True)
class Distribution:
    """``uniform(lo, hi)``, ``beta(p, q)`` rescaled to ``[lo, hi]``, ``lognormal(mu, sigma)``
    or ``point(value)``."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))
        n = {"uniform": 2, "beta": 4, "lognormal": 2, "point": 1}.get(self.kind)
        if n is None:
            raise InvariantViolation(f"unknown distribution kind {self.kind!r}")
        if len(self.params) != n:
            raise InvariantViolation(f"{self.kind} takes {n} parameters")
        if self.kind in ("uniform", "beta") and not self.params[-2] <= self.params[-1]:
            raise InvariantViolation(f"{self.kind}: lo must not exceed hi")
        if self.kind == "beta" and min(self.params[:2]) <= 0:
            raise InvariantViolation("beta shape parameters must be > 0")
        if self.kind == "lognormal" and self.params[1] < 0:
            raise InvariantViolation("lognormal sigma must be >= 0")

    @classmethod
    def uniform(cls, lo, hi):
        return cls("uniform", (lo, hi))

    @classmethod
    def beta(cls, p, q, lo=0.0, hi=1.0):
        return cls("beta", (p, q, lo, hi))

    @classmethod
    def lognormal(cls, mu, sigma):
        return cls("lognormal", (mu, sigma))

    @classmethod
    def point(cls, value):
        return cls("point", (value,))

    def support(self) -> tuple[float, float]:
        """Closed hull of the support; the open ends of beta and lognormal are kept exclusive
        by the draw itself."""
        if self.kind == "point":
            return (self.params[0], self.params[0])
        if self.kind == "lognormal":
            return (0.0, math.inf)
        return (self.params[-2], self.params[-1])

    def mean(self) -> float:
        k, p = self.kind, self.params
        if k == "point":
            return p[0]
        if k == "uniform":
            return 0.5 * (p[0] + p[1])
        if k == "beta":
            return p[2] + (p[3] - p[2]) * p[0] / (p[0] + p[1])
        return math.exp(p[0] + 0.5 * p[1] ** 2)

    def variance(self) -> float:
        k, p = self.kind, self.params
        if k == "point":
            return 0.0
        if k == "uniform":
            return (p[1] - p[0]) ** 2 / 12.0
        if k == "beta":
            a, b = p[0], p[1]
            return (p[3] - p[2]) ** 2 * a * b / ((a + b) ** 2 * (a + b + 1))
        return (math.exp(p[1] ** 2) - 1.0) * math.exp(2 * p[0] + p[1] ** 2)

    def draw(self, rng: np.random.Generator) -> float:
        k, p = self.kind, self.params
        if k == "point":
            return p[0]
        if k == "uniform":
            return float(rng.uniform(p[0], p[1]))
        if k == "beta":
            return p[2] + (p[3] - p[2]) * float(rng.beta(p[0], p[1]))
        return float(rng.lognormal(p[0], p[1]))


DEFAULT_DISTRIBUTIONS: dict[str, Distribution] = {
    "a": Distribution.uniform(0.5, 2.0),
    "b": Distribution.uniform(0.0, 1.0),
    "c": Distribution.uniform(0.0, 1.0),
    "alpha": Distribution.uniform(0.2, 0.45),
    "beta": Distribution.uniform(0.2, 0.45),
    "gamma": Distribution.uniform(0.2, 0.9),
    "delta": Distribution.uniform(0.2, 0.9),
    "phi": Distribution.beta(2.0, 2.0, 0.1, 0.9),
    "budget": Distribution.lognormal(math.log(20000.0), 0.5),
}


@dataclass(frozen=True)
class CreatorSpec:
    id: int
    tech: Union[MobilityTechnology, TemporalTechnology]
    pref: Preference
    budget: float
    regime: PolicyRegime | None = None

    def __post_init__(self):
        if not (self.budget >= 0) or math.isinf(self.budget):
            raise InvariantViolation(f"creator {self.id}: budget must be finite and >= 0")
        if self.regime is None:
            object.__setattr__(self, "regime", Fungible(self.budget))


def _check_support(name: str, d: Distribution) -> None:
    lo, hi = d.support()
    # beta draws never hit their endpoints, so a beta on [0, 1] is fine for open ranges
    open_ok = d.kind == "beta"
    if name in _EXPONENTS:
        ok = d.kind != "lognormal" and hi <= 1 and (lo > 0 or (open_ok and lo >= 0))
    elif name == "phi":
        ok = (d.kind != "lognormal" and (lo > 0 or (open_ok and lo >= 0))
              and (hi < 1 or (open_ok and hi <= 1)))
    else:
        ok = lo >= 0
    if not ok:
        raise InvariantViolation(
            f"distribution for {name} has support [{lo}, {hi}] outside the legal range")


def _positive_floor(d: Distribution) -> bool:
    return d.kind == "lognormal" or d.support()[0] > 0


@dataclass(frozen=True)
class PopulationSpec:
    """Population recipe.

    ``trend`` gives, per technology parameter, a distribution of per-period
    drift; each creator's parameter then runs linearly from its draw at
    ``t=0`` to ``t=trend_horizon`` and stays flat afterwards.
    """

    count: int
    seed: int
    distributions: Mapping[str, Distribution] = field(default_factory=dict)
    trend: Mapping[str, Distribution] = field(default_factory=dict)
    trend_horizon: float = 10.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise InvariantViolation("count must be an integer >= 1")
        if not (0 <= int(self.seed) < 2**64):
            raise InvariantViolation("seed must be a 64-bit unsigned integer")
        merged = dict(DEFAULT_DISTRIBUTIONS)
        for k, v in dict(self.distributions).items():
            if k not in PARAMS:
                raise InvariantViolation(f"unknown population parameter {k!r}")
            merged[k] = v
        for k, d in merged.items():
            _check_support(k, d)
        trend = dict(self.trend)
        for k in trend:
            if k not in PARAMS[:7]:
                raise InvariantViolation(f"trend applies to technology parameters, not {k!r}")
        if self.trend_horizon <= 0:
            raise InvariantViolation("trend_horizon must be > 0")

        def reach(name, side):
            base = merged[name].support()[side]
            if name in trend:
                base += self.trend_horizon * trend[name].support()[side]
            return base

        if reach("alpha", 1) + reach("beta", 1) > 1.0 + 1e-12:
            raise InvariantViolation("alpha and beta supports allow alpha + beta > 1")
        for name in _EXPONENTS:
            if reach(name, 1) > 1.0 or reach(name, 0) < 0.0:
                raise InvariantViolation(f"trend pushes {name} outside (0, 1]")
        for name in ("a", "b", "c"):
            if reach(name, 0) < 0.0:
                raise InvariantViolation(f"trend pushes {name} below 0")
        if not any(_positive_floor(merged[n]) for n in ("a", "b", "c")):
            raise InvariantViolation("a + b + c may be zero; give one coefficient a positive floor")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "distributions", merged)
        object.__setattr__(self, "trend", trend)


def creator_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for creator ``index``, independent of every other index."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _make_creator(spec: PopulationSpec, i: int) -> CreatorSpec:
    rng = creator_rng(spec.seed, i)
    v = {name: spec.distributions[name].draw(rng) for name in PARAMS}
    drift = {name: spec.trend[name].draw(rng) for name in PARAMS[:7] if name in spec.trend}
    tech_params = {k: v[k] for k in PARAMS[:7]}
    if drift:
        H = spec.trend_horizon
        paths = {}
        for k, x in tech_params.items():
            if k in drift:
                paths[k] = TimePath(((0.0, x), (H, x + H * drift[k])))
            else:
                paths[k] = TimePath.constant(x)
        tech = TemporalTechnology(**paths)
    else:
        tech = MobilityTechnology.from_params(**tech_params)
    return CreatorSpec(i, tech, Preference(v["phi"]), v["budget"])


def generate_population(spec: PopulationSpec) -> list[CreatorSpec]:
    return [_make_creator(spec, i) for i in range(spec.count)]


@dataclass(frozen=True)
class PopulationSummary:
    count: int
    mean_utility: float
    median_utility: float
    expenditure: dict[str, float]
    total_deadweight_loss: float
    status_counts: dict[str, int]
    regime_counts: dict[str, int]
    loss_counts: dict[str, int]


def aggregate_report(outcomes: Sequence[PolicyOutcome],
                     prices: PriceSystem | None = None) -> PopulationSummary:
    if not outcomes:
        raise ValueError("aggregate_report needs at least one outcome")
    prices = prices or PriceSystem()
    us = [o.utility for o in outcomes]
    labor, capital, devices, other = [], [], [], []
    for o in outcomes:
        p = o.allocation.purchased
        labor.append(prices.wage * (p.L + p.l))
        capital.append(prices.capital_rate * (p.K + p.k))
        devices.append(o.allocation.split.device_cost)
        other.append(prices.composite_price * o.allocation.A)
    losses = [o.money_metric_loss for o in outcomes]
    return PopulationSummary(
        count=len(outcomes),
        mean_utility=math.fsum(us) / len(us),
        median_utility=statistics.median(us),
        expenditure={"labor": math.fsum(labor), "capital": math.fsum(capital),
                     "devices": math.fsum(devices), "other": math.fsum(other)},
        total_deadweight_loss=math.fsum(losses),
        status_counts=dict(sorted(Counter(o.allocation.status.value for o in outcomes).items())),
        regime_counts=dict(sorted(Counter(type(o.regime).__name__ for o in outcomes).items())),
        loss_counts={"Loss": sum(1 for x in losses if x > 0),
                     "NoLoss": sum(1 for x in losses if x <= 0)},
    )
