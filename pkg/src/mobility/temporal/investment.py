"""Discounted cash flows for mobility investments and the independence premium."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from ..core import MobilityTechnology, Preference, PriceSystem
from ..errors import InvariantViolation, Unbounded
from ..policy import PolicyOutcome, fungible_value, regime_catalog, total_budget
from ..solver import SolverConfig, budget_for_utility


def _flows(name, m) -> dict[int, float]:
    out = {}
    for t, v in dict(m).items():
        t = int(t)
        if t < 0:
            raise InvariantViolation(f"{name}: period {t} is negative")
        if not (v >= 0) or math.isinf(v):
            raise InvariantViolation(f"{name}[{t}]={v} must be finite and >= 0")
        out[t] = out.get(t, 0.0) + float(v)
    return out


@dataclass(frozen=True)
class InvestmentScenario:
    upfront_costs: Mapping[int, float]
    recurring_savings: Mapping[int, float]
    horizon: int
    discount_rate: float = 0.0
    utility_deltas: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise InvariantViolation(f"horizon={self.horizon} must be an integer >= 1")
        if not (self.discount_rate > -1.0):
            raise InvariantViolation("discount_rate must exceed -1")
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "upfront_costs", _flows("upfront_costs", self.upfront_costs))
        object.__setattr__(self, "recurring_savings",
                           _flows("recurring_savings", self.recurring_savings))
        object.__setattr__(self, "utility_deltas",
                           {int(t): float(v) for t, v in dict(self.utility_deltas).items()})

    @classmethod
    def annual(cls, cost: float, saving: float, horizon: int, discount_rate: float = 0.0):
        """Cost at period 0, the same saving in every period 1..horizon."""
        return cls({0: cost}, {t: saving for t in range(1, horizon + 1)}, horizon, discount_rate)

    def net_flow(self, t: int) -> float:
        return self.recurring_savings.get(t, 0.0) - self.upfront_costs.get(t, 0.0)

    def with_discount(self, rate: float) -> "InvestmentScenario":
        return InvestmentScenario(self.upfront_costs, self.recurring_savings, self.horizon,
                                  rate, self.utility_deltas)


def npv(scenario: InvestmentScenario) -> float:
    r = scenario.discount_rate
    return math.fsum(scenario.net_flow(t) * (1.0 + r) ** (-t)
                     for t in range(scenario.horizon + 1))


def pv_utility(scenario: InvestmentScenario) -> float:
    r = scenario.discount_rate
    return math.fsum(v * (1.0 + r) ** (-t) for t, v in scenario.utility_deltas.items()
                     if t <= scenario.horizon)


def payback_period(scenario: InvestmentScenario) -> int | None:
    """First period at which cumulative undiscounted net flow is nonnegative."""
    flows = []
    for t in range(scenario.horizon + 1):
        flows.append(scenario.net_flow(t))
        if math.fsum(flows) >= 0.0:
            return t
    return None


def independence_premium(old: PolicyOutcome, new: PolicyOutcome, tech_new: MobilityTechnology,
                         pref: Preference, prices: PriceSystem,
                         config: SolverConfig | None = None, *, rho: float = 1.0) -> float:
    """Money the creator would give up to switch to the new method.

    Solves ``V_new(E - pi) = U_old`` where ``E`` is the new regime's total
    budget and ``V_new`` is the fungible indirect utility under
    ``tech_new``.  Negative values are the subsidy needed to make the
    switch acceptable.
    """
    E = total_budget(new.regime)
    target = old.utility
    if new.utility == target:
        return 0.0
    value_at = fungible_value(tech_new, pref, prices, regime_catalog(new.regime), config,
                              rho=rho, need_required=any(d.required for d in new.devices_chosen))
    if value_at(0.0) > target:
        raise Unbounded("new method beats the old one even with no budget")
    E_equiv = budget_for_utility(value_at, target, lo=0.0, hi=max(E, 1.0))
    return E - E_equiv
