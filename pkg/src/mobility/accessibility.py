"""Community accessibility: the rho multiplier, cost-benefit tests, status-quo bias."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Preference, PriceSystem, check_rho, evaluate_mobility, utility
from .errors import InvariantViolation
from .solver import Allocation, SolverConfig, budget_for_utility, indirect_utility, maximize_utility
from .temporal.dynamics import technology_at


@dataclass(frozen=True)
class AccessProject:
    name: str
    cost: float
    delta_rho: float
    duration: int
    users: frozenset[int] | None = None  # creator ids reached; None means everyone

    def __post_init__(self):
        if not (self.cost >= 0) or math.isinf(self.cost):
            raise InvariantViolation(f"project {self.name}: cost must be finite and >= 0")
        if not (0 < self.delta_rho <= 1):
            raise InvariantViolation(f"project {self.name}: delta_rho must lie in (0, 1]")
        if int(self.duration) != self.duration or self.duration < 0:
            raise InvariantViolation(f"project {self.name}: duration must be an integer >= 0")
        object.__setattr__(self, "duration", int(self.duration))
        if self.users is not None:
            object.__setattr__(self, "users", frozenset(self.users))

    def reaches(self, creator_id: int) -> bool:
        return self.users is None or creator_id in self.users


@dataclass(frozen=True)
class CBAConfig:
    discount_rate: float = 0.0
    horizon: int = 1
    residual_inefficiency: float = 0.0
    fragmentation_kappa: float = 0.0
    rho_base: float = 0.1

    def __post_init__(self):
        for name in ("discount_rate", "residual_inefficiency", "fragmentation_kappa"):
            if not (getattr(self, name) >= 0):
                raise InvariantViolation(f"{name} must be >= 0")
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise InvariantViolation("horizon must be an integer >= 0")
        object.__setattr__(self, "horizon", int(self.horizon))
        check_rho(self.rho_base)


def _rho_pair(rho_a, rho_b):
    check_rho(rho_a)
    check_rho(rho_b)
    if rho_a > rho_b:
        raise InvariantViolation(f"rho_a={rho_a} exceeds rho_b={rho_b}")


def social_benefit(base_utilities: Iterable[float], rho_a: float, rho_b: float) -> float:
    """``(rho_b - rho_a) * sum(U_i)``: utility gain from raising accessibility."""
    _rho_pair(rho_a, rho_b)
    return (rho_b - rho_a) * math.fsum(base_utilities)


def base_utilities(population, prices: PriceSystem | None = None,
                   config: SolverConfig | None = None, t: float = 0.0) -> list[float]:
    prices = prices or PriceSystem()
    return [indirect_utility(technology_at(c.tech, t), c.pref, prices, c.budget, config)
            for c in population]


def creator_ev(creator, rho_a: float, rho_b: float, prices: PriceSystem | None = None,
               config: SolverConfig | None = None, rel_tol: float = 1e-12) -> float:
    """Budget increase that, at ``rho_a``, matches the utility reached at ``rho_b``."""
    _rho_pair(rho_a, rho_b)
    if rho_a == rho_b:
        return 0.0
    prices = prices or PriceSystem()
    tech = technology_at(creator.tech, 0.0)
    E = creator.budget

    def V(e):
        return indirect_utility(tech, creator.pref, prices, e, config)

    target = (rho_b / rho_a) * V(E)
    return budget_for_utility(V, target, lo=E, hi=2.0 * max(E, 1.0), rel_tol=rel_tol) - E


def monetized_benefit(population, rho_a: float, rho_b: float,
                      prices: PriceSystem | None = None,
                      config: SolverConfig | None = None) -> float:
    return math.fsum(creator_ev(c, rho_a, rho_b, prices, config) for c in population)


# ---------------------------------------------------------------------------
# project appraisal


class CBAVerdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"


@dataclass(frozen=True)
class KaldorHicksResult:
    verdict: CBAVerdict
    margin: float
    pv_benefit: float
    cost: float


class BenefitCache:
    """Per-creator EV keyed by the creator's accessibility level."""

    def __init__(self, population, prices, config, rho_base):
        self.population = list(population)
        self.prices = prices or PriceSystem()
        self.config = config
        self.rho_base = rho_base
        self._ev: dict[tuple[int, float], float] = {}

    def ev(self, idx: int, rho: float) -> float:
        key = (idx, rho)
        if key not in self._ev:
            self._ev[key] = creator_ev(self.population[idx], self.rho_base, rho,
                                       self.prices, self.config)
        return self._ev[key]

    def period_benefit(self, active: Sequence[AccessProject]) -> float:
        total = []
        for i, c in enumerate(self.population):
            rho = self.rho_base + math.fsum(p.delta_rho for p in active if p.reaches(c.id))
            if rho > 1.0 + 1e-12:
                raise InvariantViolation(
                    f"projects raise rho to {rho:.6g} > 1 for creator {c.id}")
            total.append(self.ev(i, min(rho, 1.0)))
        return math.fsum(total)

    def pv(self, projects: Sequence[AccessProject], config: CBAConfig) -> float:
        flows = []
        for t in range(1, config.horizon + 1):
            active = [p for p in projects if p.duration >= t]
            if active:
                flows.append(self.period_benefit(active) * (1.0 + config.discount_rate) ** (-t))
        return math.fsum(flows)


def kaldor_hicks_test(projects: Sequence[AccessProject], population, config: CBAConfig,
                      fragmented: bool = False, prices: PriceSystem | None = None,
                      solver_config: SolverConfig | None = None,
                      cache: BenefitCache | None = None) -> KaldorHicksResult:
    """PV of monetized benefits against up-front costs (plus R when fragmented).

    Benefits accrue in periods ``1..horizon`` while each project lasts;
    costs fall at period 0.
    """
    cache = cache or BenefitCache(population, prices, solver_config, config.rho_base)
    pv = cache.pv(projects, config)
    cost = math.fsum(p.cost for p in projects)
    if fragmented:
        cost += config.residual_inefficiency
    margin = pv - cost
    verdict = CBAVerdict.PASS if margin >= 0 else CBAVerdict.FAIL
    return KaldorHicksResult(verdict, margin, pv, cost)


def marginal_project_rule(projects: Sequence[AccessProject], population, config: CBAConfig,
                          prices: PriceSystem | None = None,
                          solver_config: SolverConfig | None = None) -> list[AccessProject]:
    """Accept projects greedily by benefit-cost ratio while marginal PV covers marginal cost."""
    cache = BenefitCache(population, prices, solver_config, config.rho_base)

    def ratio(p):
        b = cache.pv([p], config)
        return math.inf if p.cost == 0 else b / p.cost

    ranked = sorted(enumerate(projects), key=lambda ip: (-ratio(ip[1]), ip[0]))
    accepted: list[AccessProject] = []
    current = 0.0
    for _, p in ranked:
        trial = accepted + [p]
        try:
            pv = cache.pv(trial, config)
        except InvariantViolation:
            continue  # would push rho past 1
        if pv - current >= p.cost:
            accepted, current = trial, pv
    return accepted


# ---------------------------------------------------------------------------
# status quo and fragmentation


def status_quo_filter(old: Allocation, candidate: Allocation, kappa: float) -> Allocation:
    """Switch only when the utility gain strictly exceeds the information cost."""
    if candidate.utility_value - old.utility_value > kappa:
        return candidate
    return old


def reevaluate(alloc: Allocation, tech, pref: Preference, rho: float = 1.0) -> Allocation:
    """The same purchases valued under a different technology."""
    M = evaluate_mobility(tech, alloc.bundle)
    return dataclasses.replace(alloc, utility_value=rho * utility(M, alloc.A, pref.phi))


@dataclass(frozen=True)
class FragmentationSweep:
    kappas: tuple[float, ...]
    residual_utility: tuple[float, ...]
    residual_money: tuple[float, ...]
    retained: tuple[int, ...]


def fragmentation_sweep(population, t0: float, t1: float, kappas: Sequence[float],
                        prices: PriceSystem | None = None,
                        config: SolverConfig | None = None) -> FragmentationSweep:
    """Measured residual inefficiency R for each information cost ``kappa``.

    Each creator chose its bundle under the ``t0`` technology.  At ``t1``
    it either keeps that bundle or re-optimizes, per
    :func:`status_quo_filter`.  R is the utility (and equivalent money) lost
    to keeping old bundles.
    """
    prices = prices or PriceSystem()
    rows = []
    for c in population:
        old_tech, new_tech = technology_at(c.tech, t0), technology_at(c.tech, t1)
        old = maximize_utility(old_tech, c.pref, prices, c.budget, config)
        stale = reevaluate(old, new_tech, c.pref)
        fresh = maximize_utility(new_tech, c.pref, prices, c.budget, config)
        rows.append((c, new_tech, stale, fresh))

    money_cache: dict[int, float] = {}

    def money_gap(i):
        if i not in money_cache:
            c, tech, stale, fresh = rows[i]
            value = lambda e: indirect_utility(tech, c.pref, prices, e, config)  # noqa: E731
            need = budget_for_utility(value, stale.utility_value, lo=0.0, hi=c.budget)
            money_cache[i] = c.budget - need
        return money_cache[i]

    r_u, r_m, kept = [], [], []
    for kappa in kappas:
        lost_u, lost_m, n = [], [], 0
        for i, (c, _, stale, fresh) in enumerate(rows):
            chosen = status_quo_filter(stale, fresh, kappa)
            if chosen is stale:
                n += 1
                lost_u.append(max(fresh.utility_value - stale.utility_value, 0.0))
                lost_m.append(max(money_gap(i), 0.0))
        r_u.append(math.fsum(lost_u))
        r_m.append(math.fsum(lost_m))
        kept.append(n)
    return FragmentationSweep(tuple(kappas), tuple(r_u), tuple(r_m), tuple(kept))
