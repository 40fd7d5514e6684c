"""Trajectories over time: Euler-style diagnostic, comparative statics, reinvestment."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..core import MobilityTechnology, Preference, PriceSystem, evaluate_mobility
from ..errors import InvariantViolation, MobilityError
from ..pareto import DEFAULT_TOLERANCE, ParetoVerdict, pareto_compare
from ..solver import (
    Allocation,
    SolverConfig,
    budget_for_utility,
    indirect_utility,
    maximize_utility,
    require_converged,
)
from .paths import TemporalTechnology, tech_at


@dataclass(frozen=True)
class IntertemporalResidual:
    pv_mobility: float
    pv_other: float

    @property
    def residual(self) -> float:
        return self.pv_mobility - self.pv_other


def intertemporal_foc_residual(
    trajectory: Sequence[tuple[MobilityTechnology, Allocation, float]], pref: Preference
) -> IntertemporalResidual:
    """Discounted ``U_M * dM/dt`` against discounted ``U_A * dA/dt``.

    Time derivatives come from ``np.gradient`` over the trajectory's own
    time stamps; discounting starts at the first period.
    """
    if len(trajectory) < 2:
        raise ValueError("trajectory needs at least two periods")
    ts = np.array([t for _, _, t in trajectory], dtype=float)
    M = np.array([evaluate_mobility(tech, al.bundle) for tech, al, _ in trajectory])
    A = np.array([al.A for _, al, _ in trajectory])
    if np.any(M <= 0) or np.any(A <= 0):
        raise ValueError("trajectory must have positive mobility and other goods")
    phi = pref.phi
    U = M**phi * A ** (1 - phi)
    disc = (1.0 + pref.discount_rate) ** (-(ts - ts[0]))
    dM = np.gradient(M, ts)
    dA = np.gradient(A, ts)
    pv_m = math.fsum(disc * (phi * U / M) * dM)
    pv_a = math.fsum(disc * ((1 - phi) * U / A) * dA)
    return IntertemporalResidual(pv_m, pv_a)


# ---------------------------------------------------------------------------
# comparative statics


class StaticsVerdict(str, enum.Enum):
    FIRST_DOMINATES = "FirstDominates"
    SECOND_DOMINATES = "SecondDominates"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


_FROM_PARETO = {
    ParetoVerdict.A_DOMINATES: StaticsVerdict.FIRST_DOMINATES,
    ParetoVerdict.B_DOMINATES: StaticsVerdict.SECOND_DOMINATES,
    ParetoVerdict.EQUIVALENT: StaticsVerdict.EQUIVALENT,
    ParetoVerdict.INCOMPARABLE: StaticsVerdict.INCOMPARABLE,
}


@dataclass(frozen=True)
class CreatorResult:
    id: int
    u0: float | None
    u1: float | None
    error: str | None = None

    @property
    def delta(self) -> float | None:
        if self.error is not None:
            return None
        return self.u1 - self.u0


@dataclass(frozen=True)
class ParetoReport:
    results: tuple[CreatorResult, ...]
    verdict: StaticsVerdict
    tolerance: float

    @property
    def per_creator_delta(self) -> list[tuple[int, float | None]]:
        return [(r.id, r.delta) for r in self.results]

    @property
    def failed(self) -> list[int]:
        return [r.id for r in self.results if r.error is not None]


def technology_at(tech, t: float) -> MobilityTechnology:
    if isinstance(tech, TemporalTechnology):
        return tech_at(tech, t)
    return tech


def _statics_one(job):
    creator, t0, t1, prices, config = job
    try:
        u = []
        for t in (t0, t1):
            alloc = maximize_utility(technology_at(creator.tech, t), creator.pref, prices,
                                     creator.budget, config)
            u.append(require_converged(alloc).utility_value)
        return CreatorResult(creator.id, u[0], u[1])
    except MobilityError as exc:
        return CreatorResult(creator.id, None, None, f"{type(exc).__name__}: {exc}")


def ordered_map(fn, jobs: Sequence, parallel: int = 1) -> list:
    """``map`` that may fan out to processes; output order always follows ``jobs``."""
    if parallel < 1:
        raise ValueError("parallel must be >= 1")
    if parallel == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * parallel))
    with ProcessPoolExecutor(max_workers=parallel) as ex:
        return list(ex.map(fn, jobs, chunksize=chunk))


def comparative_statics(population: Sequence, t0: float, t1: float,
                        prices: PriceSystem | None = None,
                        config: SolverConfig | None = None, *,
                        tolerance: float = DEFAULT_TOLERANCE,
                        parallel: int = 1) -> ParetoReport:
    """Solve every creator at ``t0`` and ``t1`` under its fungible budget.

    Creators need ``id``, ``tech`` (static or temporal), ``pref`` and
    ``budget``.  A creator whose solve fails is recorded with its error and
    forces an Incomparable verdict.
    """
    prices = prices or PriceSystem()
    jobs = [(c, t0, t1, prices, config) for c in population]
    results = tuple(ordered_map(_statics_one, jobs, parallel))
    if any(r.error is not None for r in results):
        verdict = StaticsVerdict.INCOMPARABLE
    else:
        verdict = _FROM_PARETO[pareto_compare([r.u0 for r in results],
                                              [r.u1 for r in results], tolerance)]
    return ParetoReport(results, verdict, tolerance)


# ---------------------------------------------------------------------------
# long-run reinvestment

_ORGANIC = ("alpha", "beta", "gamma", "delta")


@dataclass(frozen=True)
class GrowthRule:
    """Linear map from reinvested money to organic-parameter growth.

    ``rates[p]`` is the increase in parameter ``p`` per dollar reinvested.
    ``initial_savings`` primes the first period, since a creator whose
    technology is static has no savings of its own to reinvest.
    """

    fraction: float
    rates: Mapping[str, float]
    initial_savings: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.fraction <= 1.0):
            raise InvariantViolation(f"reinvestment fraction {self.fraction} must lie in [0, 1]")
        for k, v in self.rates.items():
            if k not in _ORGANIC:
                raise InvariantViolation(f"growth applies to organic parameters only, not {k!r}")
            if not (v >= 0):
                raise InvariantViolation(f"growth rate for {k} must be >= 0")
        if not (self.initial_savings >= 0):
            raise InvariantViolation("initial_savings must be >= 0")
        object.__setattr__(self, "rates", dict(self.rates))


def _clamp(ref: dict, raw: dict) -> dict:
    """Move from ``ref`` toward ``raw`` but stop at the caps (each <= 1, alpha + beta <= 1)."""
    p = dict(raw)
    for k in _ORGANIC:
        p[k] = min(1.0, max(ref[k], p[k]) if raw[k] >= ref[k] else p[k])
    d_sum = (p["alpha"] - ref["alpha"]) + (p["beta"] - ref["beta"])
    room = 1.0 - ref["alpha"] - ref["beta"]
    if p["alpha"] + p["beta"] > 1.0 and d_sum > 0:
        lam = max(room, 0.0) / d_sum
        p["alpha"] = ref["alpha"] + lam * (p["alpha"] - ref["alpha"])
        p["beta"] = ref["beta"] + lam * (p["beta"] - ref["beta"])
    return p


def _grow(params: dict, rule: GrowthRule, money: float) -> dict:
    raw = dict(params)
    for k, rate in rule.rates.items():
        raw[k] = params[k] + rate * money
    return _clamp(params, raw)


@dataclass(frozen=True)
class ConvergencePath:
    utilities: tuple[float, ...]
    savings: tuple[float, ...]
    technologies: tuple[MobilityTechnology, ...]


def long_run_convergence(creator, rule: GrowthRule, horizon: int,
                         prices: PriceSystem | None = None,
                         config: SolverConfig | None = None) -> ConvergencePath:
    """Simulate reinvestment of savings into organic capacity.

    Each period the creator spends its full budget under that period's
    technology.  Savings are the budget no longer needed to reach the
    period-0 utility; ``rule.fraction`` of them buys parameter growth that
    takes effect from the next period, on top of any exogenous path.
    """
    prices = prices or PriceSystem()
    E = creator.budget
    gained = {k: 0.0 for k in _ORGANIC}
    u0 = None
    utils, savings, techs = [], [], []
    for t in range(horizon + 1):
        base = technology_at(creator.tech, float(t)).params()
        raw = dict(base)
        for k in _ORGANIC:
            raw[k] = base[k] + gained[k]
        grown = _clamp(base, raw)
        tech = MobilityTechnology.from_params(**grown)
        u = indirect_utility(tech, creator.pref, prices, E, config)
        if u0 is None:
            u0 = u
            saved = rule.initial_savings
        elif u <= u0:
            saved = 0.0
        else:
            need = budget_for_utility(
                lambda e: indirect_utility(tech, creator.pref, prices, e, config),
                u0, lo=0.0, hi=E)
            saved = max(E - need, 0.0)
        after = _grow(grown, rule, rule.fraction * saved)
        for k in _ORGANIC:
            gained[k] += after[k] - grown[k]
        utils.append(u)
        savings.append(saved)
        techs.append(tech)
    return ConvergencePath(tuple(utils), tuple(savings), tuple(techs))
