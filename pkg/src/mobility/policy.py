"""Funding regimes, constrained solves under each, and money-metric losses.

Devices are discrete purchases: each adds a fixed amount of capital
services to ``K`` or ``k`` and costs its price up front.  Regimes differ in
which devices may be bought and in how the remaining money may be spent.
Losses are equivalent variations against the fungible benchmark, i.e. the
budget cut that would leave a fungible creator exactly as well off.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .core import (
    Category,
    InputBundle,
    MobilityTechnology,
    Preference,
    PriceSystem,
)
from .errors import EmptyFeasibleSet, Infeasible, InvariantViolation
from .solver import (
    VAR_NAMES,
    Allocation,
    BudgetGroup,
    SolverConfig,
    budget_for_utility,
    solve_groups,
)

MAX_CATALOG = 20
_CATEGORY_INPUTS = {
    Category.JOINT.value: ("L", "K"),
    Category.LABOR_ONLY.value: ("l",),
    Category.CAPITAL_ONLY.value: ("k",),
}


@dataclass(frozen=True)
class DeviceCatalogItem:
    name: str
    price: float
    capital_services: float
    target: str = "K"
    required: bool = False
    device_type: str = ""

    def __post_init__(self):
        if not self.name:
            raise InvariantViolation("device name must be non-empty")
        if not (self.price >= 0) or math.isinf(self.price):
            raise InvariantViolation(f"device {self.name}: price must be finite and >= 0")
        if not (self.capital_services >= 0) or math.isinf(self.capital_services):
            raise InvariantViolation(f"device {self.name}: capital_services must be >= 0")
        if self.target not in ("K", "k"):
            raise InvariantViolation(f"device {self.name}: target must be 'K' or 'k'")

    def services(self) -> InputBundle:
        if self.target == "K":
            return InputBundle(K=self.capital_services)
        return InputBundle(k=self.capital_services)


def _budget(name: str, v: float) -> None:
    if not (v >= 0) or math.isinf(v):
        raise InvariantViolation(f"{name}={v} must be finite and >= 0")


@dataclass(frozen=True)
class Fungible:
    E_T: float
    catalog: tuple[DeviceCatalogItem, ...] = ()

    def __post_init__(self):
        _budget("E_T", self.E_T)
        object.__setattr__(self, "catalog", tuple(self.catalog))


@dataclass(frozen=True)
class Siloed:
    """Three earmarked budgets; devices, if any, come out of the capital silo."""

    labor_budget: float
    capital_budget: float
    other_budget: float
    catalog: tuple[DeviceCatalogItem, ...] = ()

    def __post_init__(self):
        for name in ("labor_budget", "capital_budget", "other_budget"):
            _budget(name, getattr(self, name))
        object.__setattr__(self, "catalog", tuple(self.catalog))


@dataclass(frozen=True)
class ApprovedList:
    """Devices only from ``catalog``, paid from ``capital_budget``.

    Unspent capital money joins ``E_rest`` for continuous inputs and other
    goods.
    """

    catalog: tuple[DeviceCatalogItem, ...]
    capital_budget: float
    E_rest: float

    def __post_init__(self):
        _budget("capital_budget", self.capital_budget)
        _budget("E_rest", self.E_rest)
        object.__setattr__(self, "catalog", tuple(self.catalog))


@dataclass(frozen=True)
class TypeExclusion:
    """Drop devices (by name or device_type) or inputs (by name or category)."""

    excluded: tuple[str, ...]
    base: "PolicyRegime"

    def __post_init__(self):
        if isinstance(self.base, TypeExclusion):
            raise InvariantViolation("TypeExclusion cannot wrap another TypeExclusion")
        object.__setattr__(self, "excluded", tuple(self.excluded))


PolicyRegime = Union[Fungible, Siloed, ApprovedList, TypeExclusion]


def regime_kind(regime: PolicyRegime) -> str:
    return type(regime).__name__


def total_budget(regime: PolicyRegime) -> float:
    if isinstance(regime, Fungible):
        return regime.E_T
    if isinstance(regime, Siloed):
        return regime.labor_budget + regime.capital_budget + regime.other_budget
    if isinstance(regime, ApprovedList):
        return regime.capital_budget + regime.E_rest
    return total_budget(regime.base)


def regime_catalog(regime: PolicyRegime) -> tuple[DeviceCatalogItem, ...]:
    if isinstance(regime, TypeExclusion):
        return regime_catalog(regime.base)
    return regime.catalog


@dataclass(frozen=True)
class PolicyOutcome:
    allocation: Allocation
    devices_chosen: tuple[DeviceCatalogItem, ...]
    money_metric_loss: float
    regime: PolicyRegime
    benchmark_utility: float = field(default=math.nan)

    def __post_init__(self):
        if self.money_metric_loss < -1e-9 * max(1.0, total_budget(self.regime)):
            raise InvariantViolation("money_metric_loss must be >= 0")
        object.__setattr__(self, "devices_chosen", tuple(self.devices_chosen))

    @property
    def utility(self) -> float:
        return self.allocation.utility_value

    @property
    def device_spend(self) -> float:
        return math.fsum(d.price for d in self.devices_chosen)


# ---------------------------------------------------------------------------
# solving


def _subsets(catalog, budget, need_required):
    """Affordable device subsets, in lexicographic order of sorted names."""
    if len(catalog) > MAX_CATALOG:
        raise ValueError(f"catalog has {len(catalog)} items; enumeration is capped at {MAX_CATALOG}")
    found = []
    for r in range(len(catalog) + 1):
        for combo in itertools.combinations(catalog, r):
            cost = math.fsum(d.price for d in combo)
            if cost > budget * (1 + 1e-15):
                continue
            if need_required and not any(d.required for d in combo):
                continue
            found.append(tuple(sorted(combo, key=lambda d: d.name)))
    found.sort(key=lambda c: tuple(d.name for d in c))
    return found


def _groups_for(regime, cost):
    if isinstance(regime, Fungible):
        return [BudgetGroup(VAR_NAMES, max(regime.E_T - cost, 0.0))]
    if isinstance(regime, Siloed):
        return [
            BudgetGroup(("L", "l"), regime.labor_budget),
            BudgetGroup(("K", "k"), max(regime.capital_budget - cost, 0.0)),
            BudgetGroup(("A",), regime.other_budget),
        ]
    rest = max(regime.capital_budget - cost, 0.0) + regime.E_rest
    return [BudgetGroup(VAR_NAMES, rest)]


def _device_budget(regime) -> float:
    if isinstance(regime, Fungible):
        return regime.E_T
    return regime.capital_budget


def _solve_core(tech, pref, prices, regime, config, rho, need_required):
    excluded_inputs: set[str] = set()
    base = regime
    catalog = regime_catalog(regime)
    if isinstance(regime, TypeExclusion):
        base = regime.base
        drop = set(regime.excluded)
        for tag in drop:
            if tag in ("L", "K", "l", "k"):
                excluded_inputs.add(tag)
            excluded_inputs.update(_CATEGORY_INPUTS.get(tag, ()))
        catalog = tuple(d for d in catalog if d.name not in drop and d.device_type not in drop)

    subsets = _subsets(catalog, _device_budget(base), need_required)
    if not subsets:
        raise EmptyFeasibleSet(
            f"no affordable device set satisfies the requirement under {regime_kind(regime)}"
        )
    best = None
    for combo in subsets:
        cost = math.fsum(d.price for d in combo)
        fixed = InputBundle()
        for d in combo:
            fixed = fixed + d.services()
        alloc = solve_groups(tech, pref, prices, _groups_for(base, cost), config,
                             fixed=fixed, excluded=sorted(excluded_inputs), rho=rho,
                             device_cost=cost)
        if best is None or alloc.utility_value > best[0].utility_value:
            best = (alloc, combo)
    return best


def _needs_required(regime, market) -> bool:
    pool = tuple(regime_catalog(regime)) + tuple(market or ())
    return any(d.required for d in pool)


def fungible_value(tech, pref, prices, catalog, config=None, *, rho=1.0,
                   need_required=None) -> Callable[[float], float]:
    """Indirect utility of a fungible budget with access to ``catalog``.

    Budgets that cannot fund a required device map to ``-inf``.
    """
    if need_required is None:
        need_required = any(d.required for d in catalog)

    def value_at(E: float) -> float:
        try:
            alloc, _ = _solve_core(tech, pref, prices, Fungible(E, catalog), config, rho,
                                   need_required)
        except EmptyFeasibleSet:
            return -math.inf
        return alloc.utility_value

    return value_at


def deadweight_loss(outcome: PolicyOutcome, benchmark: PolicyOutcome, tech: MobilityTechnology,
                    pref: Preference, prices: PriceSystem, config: SolverConfig | None = None,
                    *, rho: float = 1.0) -> float:
    """Equivalent variation of ``outcome`` relative to the fungible ``benchmark``."""
    if not isinstance(benchmark.regime, Fungible):
        raise ValueError("benchmark must be a Fungible outcome")
    E_T = benchmark.regime.E_T
    target = outcome.utility
    u_bench = benchmark.utility
    if target >= u_bench or abs(u_bench - target) <= 1e-12 * max(1.0, abs(u_bench)):
        return 0.0
    catalog = benchmark.regime.catalog
    need = any(d.required for d in catalog + benchmark.devices_chosen)
    value_at = fungible_value(tech, pref, prices, catalog, config, rho=rho, need_required=need)
    E_equiv = budget_for_utility(value_at, target, lo=0.0, hi=E_T)
    return max(E_T - E_equiv, 0.0)


def solve_under_regime(tech: MobilityTechnology, pref: Preference, prices: PriceSystem,
                       regime: PolicyRegime, config: SolverConfig | None = None, *,
                       market: Sequence[DeviceCatalogItem] | None = None,
                       rho: float = 1.0) -> PolicyOutcome:
    """Best allocation the regime permits, with its loss against fungible money.

    The benchmark is a fungible budget equal to the regime's total, with
    access to ``market`` (default: the regime's own unfiltered catalog).
    """
    need = _needs_required(regime, market)
    market_catalog = tuple(market) if market is not None else regime_catalog(regime)
    bench_regime = Fungible(total_budget(regime), market_catalog)
    b_alloc, b_dev = _solve_core(tech, pref, prices, bench_regime, config, rho, need)
    benchmark = PolicyOutcome(b_alloc, b_dev, 0.0, bench_regime, b_alloc.utility_value)
    if regime == bench_regime:
        return benchmark
    alloc, devices = _solve_core(tech, pref, prices, regime, config, rho, need)
    draft = PolicyOutcome(alloc, devices, 0.0, regime, benchmark.utility)
    loss = deadweight_loss(draft, benchmark, tech, pref, prices, config, rho=rho)
    return PolicyOutcome(alloc, devices, loss, regime, benchmark.utility)


# ---------------------------------------------------------------------------
# crowding out


class Verdict(str, enum.Enum):
    KEEP_BASE = "KeepBase"
    UPGRADE = "Upgrade"
    INDIFFERENT = "Indifferent"


@dataclass(frozen=True)
class CrowdingOutResult:
    verdict: Verdict
    utility_delta: float  # upgrade minus base
    base: Allocation
    upgrade: Allocation


def _with_device(tech, pref, prices, device, E_T, config):
    if device.price > E_T:
        raise Infeasible(f"device {device.name} costs {device.price} > budget {E_T}")
    return solve_groups(tech, pref, prices, [BudgetGroup(VAR_NAMES, E_T - device.price)],
                        config, fixed=device.services(), device_cost=device.price)


def crowding_out_comparison(tech_base: MobilityTechnology, tech_upgrade: MobilityTechnology,
                            pref: Preference, prices: PriceSystem,
                            device_base: DeviceCatalogItem, device_upgrade: DeviceCatalogItem,
                            E_T: float, config: SolverConfig | None = None,
                            rel_tol: float = 1e-9) -> CrowdingOutResult:
    base = _with_device(tech_base, pref, prices, device_base, E_T, config)
    up = _with_device(tech_upgrade, pref, prices, device_upgrade, E_T, config)
    delta = up.utility_value - base.utility_value
    if abs(delta) <= rel_tol * max(1.0, abs(base.utility_value)):
        verdict = Verdict.INDIFFERENT
    elif delta > 0:
        verdict = Verdict.UPGRADE
    else:
        verdict = Verdict.KEEP_BASE
    return CrowdingOutResult(verdict, delta, base, up)


def crowding_out_threshold(upgrade_tech: Callable[[float], MobilityTechnology],
                           tech_base: MobilityTechnology, pref: Preference, prices: PriceSystem,
                           device_base: DeviceCatalogItem, device_upgrade: DeviceCatalogItem,
                           E_T: float, lo: float, hi: float,
                           config: SolverConfig | None = None, tol: float = 1e-10) -> float:
    """Parameter value at which the upgrade stops losing to the base device.

    ``upgrade_tech(x)`` builds the upgrade technology; the utility delta must
    be negative at ``lo`` and positive at ``hi``.
    """

    def delta(x):
        return crowding_out_comparison(tech_base, upgrade_tech(x), pref, prices, device_base,
                                       device_upgrade, E_T, config).utility_delta

    if not (delta(lo) < 0 < delta(hi)):
        raise ValueError("threshold is not bracketed by [lo, hi]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if delta(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
