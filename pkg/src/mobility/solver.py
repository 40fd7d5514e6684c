"""Budget-constrained utility maximization for a mobility creator.

The creator picks labor and capital inputs and a composite good ``A`` so as
to maximize ``rho * M**phi * A**(1-phi)`` subject to one or more linear
budgets.  Internally each budget group is parameterized by expenditure
shares on a simplex and the log of utility is maximized with a projected
Newton ascent (eigenvalue-modified reduced Hessian, Armijo backtracking
along the projection arc), restarted from several points.

:func:`brute_force_oracle` is an exhaustive grid search over the same share
simplex and shares no code with the ascent.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (
    INPUT_NAMES,
    EndowmentSplit,
    InputBundle,
    MobilityTechnology,
    PriceSystem,
    Preference,
    check_rho,
    endowment_split,
    evaluate_mobility,
    marginal_products,
    utility,
)
from .errors import DomainError, InvalidBudget, InvariantViolation, NonConvergence

VAR_NAMES = INPUT_NAMES + ("A",)


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    CORNER = "CornerSolution"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-9
    max_iterations: int = 10_000
    multistarts: int = 8
    oracle_grid: int = 60
    seed: int = 0
    objective: str = "log"  # "log" or "level"; the argmax is the same
    early_stop: bool = True  # stop once two converged starts agree

    def __post_init__(self):
        if not (self.tolerance > 0):
            raise InvariantViolation("tolerance must be > 0")
        for name in ("max_iterations", "multistarts", "oracle_grid"):
            if getattr(self, name) < 1:
                raise InvariantViolation(f"{name} must be >= 1")
        if self.objective not in ("log", "level"):
            raise InvariantViolation(f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class Allocation:
    """A solved allocation.

    ``bundle`` holds the total inputs entering the mobility function,
    including any fixed services supplied by purchased devices (``fixed``);
    ``split`` prices only the purchased part plus device costs.
    """

    bundle: InputBundle
    A: float
    utility_value: float
    split: EndowmentSplit
    foc_residual_norm: float
    status: Status
    fixed: InputBundle = field(default_factory=InputBundle)
    iterations: int = 0

    @property
    def purchased(self) -> InputBundle:
        return InputBundle(*(max(0.0, x - f) for x, f in
                             zip(self.bundle.as_tuple(), self.fixed.as_tuple())))


@dataclass(frozen=True)
class AProduction:
    """Cobb-Douglas technology for all other goods, ``tfp * L**tL * K**tK``."""

    tfp: float
    theta_L: float
    theta_K: float

    def __post_init__(self):
        if not (self.tfp >= 0):
            raise InvariantViolation("tfp must be >= 0")
        for name in ("theta_L", "theta_K"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                raise InvariantViolation(f"{name}={v} must lie in (0, 1]")
        if self.theta_L + self.theta_K > 1 + 1e-12:
            raise InvariantViolation("theta_L + theta_K must not exceed 1")

    def output(self, L: float, K: float) -> float:
        if L == 0 or K == 0:
            return 0.0
        return self.tfp * L**self.theta_L * K**self.theta_K

    def marginal_products(self, L: float, K: float) -> tuple[float, float]:
        if L <= 0 or K <= 0:
            raise DomainError("A-sector marginal products need L, K > 0")
        out = self.output(L, K)
        return self.theta_L * out / L, self.theta_K * out / K


@dataclass(frozen=True)
class BudgetGroup:
    """A budget that may only be spent on the named goods."""

    names: tuple[str, ...]
    budget: float


# ---------------------------------------------------------------------------
# objective in share space


class _Objective:
    """log U (or U) as a function of the concatenated group shares."""

    def __init__(self, tech, phi, var_names, conv, fixed, w_m, w_a, rho, level):
        o = tech.organic
        self.a, self.b, self.c = tech.coefficients.as_tuple()
        self.alpha, self.beta, self.gamma, self.delta = o.alpha, o.beta, o.gamma, o.delta
        self.names = var_names
        self.idx = {n: i for i, n in enumerate(var_names)}
        self.conv = conv  # quantity per unit share
        self.K0, self.k0 = fixed.K, fixed.k
        self.w_m, self.w_a = w_m, w_a
        self.log_rho = math.log(rho)
        self.level = level

    def quantities(self, s):
        return s * self.conv

    def log_parts(self, s):
        """Return (f, g, H) for f = w_m log M + w_a log A + log rho."""
        x = self.quantities(s)
        n = len(x)
        gx = np.zeros(n)
        Hx = np.zeros((n, n))
        iL, iK = self.idx.get("L"), self.idx.get("K")
        il, ik, iA = self.idx.get("l"), self.idx.get("k"), self.idx.get("A")

        M = 0.0
        gM = np.zeros(n)
        HM = np.zeros((n, n))
        if self.a > 0 and iL is not None:
            L = x[iL]
            Kt = (x[iK] if iK is not None else 0.0) + self.K0
            if L > 0 and Kt > 0:
                J = self.a * L**self.alpha * Kt**self.beta
                M += J
                gM[iL] = self.alpha * J / L
                HM[iL, iL] = self.alpha * (self.alpha - 1) * J / L**2
                if iK is not None:
                    gM[iK] = self.beta * J / Kt
                    HM[iK, iK] = self.beta * (self.beta - 1) * J / Kt**2
                    HM[iL, iK] = HM[iK, iL] = self.alpha * self.beta * J / (L * Kt)
            elif Kt > 0 or (iK is not None and L > 0):
                # one factor at zero with the other positive: slope unbounded
                return -math.inf, None, None
        if il is not None:
            l = x[il]  # noqa: E741
            if l > 0:
                t = self.b * l**self.gamma
                M += t
                gM[il] = self.gamma * t / l
                HM[il, il] = self.gamma * (self.gamma - 1) * t / l**2
            elif self.gamma < 1:
                return -math.inf, None, None
            else:
                gM[il] = self.b
        kt = (x[ik] if ik is not None else 0.0) + self.k0
        if self.c > 0 and kt > 0:
            t = self.c * kt**self.delta
            M += t
            if ik is not None:
                gM[ik] = self.delta * t / kt
                HM[ik, ik] = self.delta * (self.delta - 1) * t / kt**2
        elif ik is not None:
            if self.delta < 1:
                return -math.inf, None, None
            gM[ik] = self.c

        if M <= 0:
            return -math.inf, None, None
        f = self.log_rho + self.w_m * math.log(M)
        gx += self.w_m * gM / M
        Hx += self.w_m * (HM / M - np.outer(gM, gM) / M**2)
        if iA is not None and self.w_a > 0:
            A = x[iA]
            if A <= 0:
                return -math.inf, None, None
            f += self.w_a * math.log(A)
            gx[iA] += self.w_a / A
            Hx[iA, iA] -= self.w_a / A**2
        g = gx * self.conv
        H = Hx * np.outer(self.conv, self.conv)
        return f, g, H

    def __call__(self, s):
        f, g, H = self.log_parts(s)
        if not self.level or g is None:
            return f, g, H, g
        F = math.exp(f)
        return F, F * g, F * (H + np.outer(g, g)), g


def _project_simplex(v: np.ndarray) -> np.ndarray:
    if v.size == 1:
        return np.ones(1)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    r = ind[cond][-1]
    theta = css[cond][-1] / r
    return np.maximum(v - theta, 0.0)


class _Layout:
    def __init__(self, group_slices):
        self.slices = group_slices

    def project(self, v):
        out = np.empty_like(v)
        for sl in self.slices:
            out[sl] = _project_simplex(v[sl])
        return out

    def multipliers(self, s, g):
        nu = np.empty_like(s)
        for sl in self.slices:
            nu[sl] = float(np.dot(s[sl], g[sl]))
        return nu


def _stationarity(layout, s, g):
    nu = layout.multipliers(s, g)
    dev = g - nu
    pos = s > 0
    r = 0.0
    if pos.any():
        r = float(np.max(np.abs(dev[pos]) * s[pos]))
    if (~pos).any():
        scale = np.maximum(1.0, np.abs(nu[~pos]))
        r = max(r, float(np.max(np.maximum(dev[~pos], 0.0) / scale)))
    return r


def _null_space_basis(layout, free):
    """Orthonormal basis of {d on free vars : sum of d within each group == 0}."""
    cols = []
    n_free = int(free.sum())
    pos = np.cumsum(free) - 1
    C = []
    for sl in layout.slices:
        idx = [pos[i] for i in range(sl.start, sl.stop) if free[i]]
        if idx:
            row = np.zeros(n_free)
            row[idx] = 1.0
            C.append(row)
    if not C:
        return np.eye(n_free)
    C = np.array(C)
    _, sv, vt = np.linalg.svd(C)
    rank = int((sv > 1e-12).sum())
    cols = vt[rank:].T
    return cols


def _ascent(obj, layout, s0, cfg):
    s = s0
    val, g, H, glog = obj(s)
    if g is None:
        return s, val, 0, False
    it = 0
    converged = False
    polish = 1e-3 * cfg.tolerance  # Newton is quadratic near the optimum; polishing is cheap
    while it < cfg.max_iterations:
        if _stationarity(layout, s, glog) <= polish:
            converged = True
            break
        it += 1
        nu = layout.multipliers(s, g)
        free = (s > 0) | (g > nu)
        d = np.zeros_like(s)
        if free.any():
            Z = _null_space_basis(layout, free)
            if Z.shape[1] > 0:
                Hf = H[np.ix_(free, free)]
                Hr = Z.T @ Hf @ Z
                gr = Z.T @ g[free]
                lam, Q = np.linalg.eigh(0.5 * (Hr + Hr.T))
                mu = 1e-12 * max(1.0, float(np.max(np.abs(lam))))
                curv = np.maximum(np.abs(lam), mu)
                d[free] = Z @ (Q @ ((Q.T @ gr) / curv))
        accepted = False
        for direction in (d, g - nu):
            if not np.any(direction):
                continue
            t = 1.0
            if direction is not d:
                t = 1.0 / max(1.0, float(np.max(np.abs(direction))))
            while t > 1e-18:
                s_try = layout.project(s + t * direction)
                v2, g2, H2, gl2 = obj(s_try)
                if g2 is not None and math.isfinite(v2):
                    gain = float(np.dot(g, s_try - s))
                    if v2 >= val + 1e-4 * gain and (v2 > val or np.array_equal(s_try, s)):
                        accepted = True
                        break
                    # objective flat to rounding: accept if the KKT residual still shrinks
                    if (v2 >= val - 8 * np.finfo(float).eps * max(1.0, abs(val))
                            and _stationarity(layout, s_try, gl2)
                            < 0.5 * _stationarity(layout, s, glog)):
                        accepted = True
                        break
                t *= 0.5
            if accepted:
                break
        if not accepted or np.array_equal(s_try, s):
            # no numerically representable ascent remains
            converged = _stationarity(layout, s, glog) <= cfg.tolerance
            break
        s, val, g, H, glog = s_try, v2, g2, H2, gl2
    return s, val, it, converged


# ---------------------------------------------------------------------------
# public solver


def _useful_inputs(tech: MobilityTechnology, fixed: InputBundle, excluded) -> set[str]:
    a, b, c = tech.coefficients.as_tuple()
    allowed = {n for n in INPUT_NAMES if n not in excluded}
    useful = set()
    if a > 0 and "L" in allowed and ("K" in allowed or fixed.K > 0):
        useful.add("L")
    if a > 0 and "K" in allowed and "L" in allowed:
        useful.add("K")
    if b > 0 and "l" in allowed:
        useful.add("l")
    if c > 0 and "k" in allowed:
        useful.add("k")
    return useful


def solve_groups(
    tech: MobilityTechnology,
    pref: Preference,
    prices: PriceSystem,
    groups: Sequence[BudgetGroup],
    config: SolverConfig | None = None,
    *,
    fixed: InputBundle | None = None,
    excluded: Sequence[str] = (),
    rho: float = 1.0,
    device_cost: float = 0.0,
    include_composite: bool = True,
) -> Allocation:
    """Maximize utility subject to a set of earmarked budgets.

    ``groups`` partition the goods among budgets (a fungible endowment is a
    single group holding every good).  ``fixed`` adds device-supplied
    services to K and k; ``excluded`` removes inputs from the choice set.
    With ``include_composite=False`` the objective is mobility alone.
    """
    cfg = config or SolverConfig()
    fixed = fixed or InputBundle()
    check_rho(rho)
    for g in groups:
        if not (g.budget >= 0) or math.isinf(g.budget):
            raise InvalidBudget(f"budget {g.budget} must be finite and >= 0")
        unknown = set(g.names) - set(VAR_NAMES)
        if unknown:
            raise ValueError(f"unknown goods {sorted(unknown)}")

    useful = _useful_inputs(tech, fixed, excluded)
    if include_composite:
        useful = useful | {"A"}

    variants = [useful]
    a = tech.coefficients.a
    o = tech.organic
    if (a > 0 and {"L", "K"} <= useful and fixed.K == 0
            and o.alpha + o.beta >= 1 - 1e-12):
        # a constant-returns joint term may optimally be dropped entirely
        variants.append(useful - {"L", "K"})

    best = None
    for variant in variants:
        alloc = _solve_pruned(tech, pref, prices, groups, cfg, fixed, variant, rho,
                              device_cost, include_composite, useful)
        if _better(alloc, best, cfg.tolerance):
            best = alloc
    return best


_VANISHING_SHARE = 1e-10
_AGREE = 1e-7


def _better(new, old, tol):
    if old is None:
        return True
    scale = tol * max(1.0, abs(old.utility_value))
    if new.utility_value > old.utility_value + scale:
        return True
    return (old.status == Status.MAX_ITERATIONS and new.status != Status.MAX_ITERATIONS
            and new.utility_value >= old.utility_value - scale)


def _solve_pruned(tech, pref, prices, groups, cfg, fixed, active, rho, device_cost,
                  include_composite, useful):
    """Solve; if the ascent stalls against vanishing shares, drop those goods and retry.

    An input whose exponent is just below one can have an optimal quantity
    too small to represent, and zero itself is excluded because the slope
    there is infinite.  Removing the input changes utility by less than
    its unrepresentable contribution.
    """
    alloc, tiny = _solve_variant(tech, pref, prices, groups, cfg, fixed, active, rho,
                                 device_cost, include_composite, useful)
    while alloc.status == Status.MAX_ITERATIONS and tiny:
        if {"L", "K"} & tiny and fixed.K == 0:
            tiny = tiny | {"L", "K"}
        active = active - tiny
        retry, tiny = _solve_variant(tech, pref, prices, groups, cfg, fixed, active, rho,
                                     device_cost, include_composite, useful)
        if _better(retry, alloc, cfg.tolerance):
            alloc = retry
        else:
            break
    return alloc


def _solve_variant(tech, pref, prices, groups, cfg, fixed, active, rho, device_cost,
                   include_composite, useful):
    var_names: list[str] = []
    conv: list[float] = []
    slices = []
    unspent = 0.0
    for grp in groups:
        names = [n for n in VAR_NAMES if n in grp.names and n in active]
        if grp.budget == 0:
            continue
        if not names:
            unspent += grp.budget
            continue
        start = len(var_names)
        for n in names:
            var_names.append(n)
            conv.append(grp.budget / prices.price_of(n))
        slices.append(slice(start, len(var_names)))
    conv_arr = np.array(conv, dtype=float)
    layout = _Layout(slices)

    has_A = "A" in var_names
    w_m, w_a = (pref.phi, 1.0 - pref.phi) if include_composite else (1.0, 0.0)
    utility_is_zero = include_composite and not has_A
    if utility_is_zero:
        # no money for other goods: every allocation yields U = 0; still
        # spend the mobility budgets productively
        w_m, w_a = 1.0, 0.0

    def build(s, status, iterations):
        qty = dict.fromkeys(VAR_NAMES, 0.0)
        for n, v in zip(var_names, s * conv_arr if len(s) else []):
            qty[n] = float(v)
        bundle = InputBundle(qty["L"] + fixed.L, qty["K"] + fixed.K, qty["l"] + fixed.l,
                             qty["k"] + fixed.k)
        A = qty["A"]
        M = evaluate_mobility(tech, bundle)
        U = rho * utility(M, A, pref.phi) if include_composite else M
        split = endowment_split(InputBundle(qty["L"], qty["K"], qty["l"], qty["k"]), A,
                                prices, device_cost)
        partial = Allocation(bundle, A, U, split, 0.0, status, fixed, iterations)
        if include_composite and A > 0:
            norm = foc_residual(tech, pref, prices, partial).norm
        else:
            norm = 0.0
        if status == Status.CONVERGED:
            spent_on = {n for n, v in qty.items() if v > 0}
            budgeted = {n for grp in groups if grp.budget > 0 for n in grp.names}
            if (useful & budgeted) - spent_on:
                status = Status.CORNER
        return Allocation(bundle, A, U, split, norm, status, fixed, iterations)

    if not var_names:
        return build(np.zeros(0), Status.CONVERGED, 0), set()

    obj = _Objective(tech, pref.phi, var_names, conv_arr, fixed, w_m, w_a, rho,
                     cfg.objective == "level")
    starts = [layout.project(np.ones(len(var_names)))]
    for sl in slices:
        starts[0][sl] = 1.0 / (sl.stop - sl.start)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.multistarts - 1):
        s = np.empty(len(var_names))
        for sl in slices:
            s[sl] = rng.dirichlet(np.ones(sl.stop - sl.start))
        starts.append(s)

    if obj.log_parts(starts[0])[1] is None:
        # mobility cannot be made positive with the available goods
        return build(starts[0], Status.CONVERGED, 0), set()

    best = None
    for s0 in starts:
        s, val, iters, ok = _ascent(obj, layout, s0, cfg)
        if not math.isfinite(val):
            continue
        if best is None or val > best[1] + cfg.tolerance * max(1.0, abs(best[1])):
            prev, best = best, (s, val, iters, ok)
            if prev is None:
                continue
        else:
            prev = (s, val, iters, ok)
        # the log objective is concave, so two converged starts landing on
        # the same interior point settle the question; corners can be
        # spurious stationary points of the joint term and get every start
        if (cfg.early_stop and best[3] and prev[3] and np.min(best[0]) > _AGREE
                and np.max(np.abs(best[0] - prev[0])) <= _AGREE):
            break
    s, val, iters, ok = best
    tiny = {n for n, v in zip(var_names, s) if 0 < v < _VANISHING_SHARE and n != "A"}
    return build(s, Status.CONVERGED if ok else Status.MAX_ITERATIONS, iters), tiny


def maximize_utility(
    tech: MobilityTechnology,
    pref: Preference,
    prices: PriceSystem,
    E_T: float,
    config: SolverConfig | None = None,
    *,
    rho: float = 1.0,
    fixed: InputBundle | None = None,
    device_cost: float = 0.0,
    excluded: Sequence[str] = (),
) -> Allocation:
    """Fungible-endowment optimum: every good draws on the single budget ``E_T``."""
    if not (E_T >= 0):
        raise InvalidBudget(f"E_T={E_T} must be >= 0")
    return solve_groups(tech, pref, prices, [BudgetGroup(VAR_NAMES, E_T)], config,
                        fixed=fixed, excluded=excluded, rho=rho, device_cost=device_cost)


def require_converged(alloc: Allocation) -> Allocation:
    if alloc.status == Status.MAX_ITERATIONS:
        raise NonConvergence(
            f"solver stopped after {alloc.iterations} iterations with FOC residual "
            f"{alloc.foc_residual_norm:.3g}"
        )
    return alloc


def indirect_utility(tech, pref, prices, E_T, config=None, **kw) -> float:
    return maximize_utility(tech, pref, prices, E_T, config, **kw).utility_value


def max_mobility(tech, prices, budget, config=None, *, fixed=None, excluded=()) -> Allocation:
    """Largest mobility attainable when ``budget`` is spent on inputs only."""
    pref = Preference(0.5)  # unused: composite good excluded
    return solve_groups(tech, pref, prices, [BudgetGroup(INPUT_NAMES, budget)], config,
                        fixed=fixed, excluded=excluded, include_composite=False)


def budget_for_utility(
    value_at: Callable[[float], float],
    target: float,
    lo: float = 0.0,
    hi: float = 1.0,
    rel_tol: float = 1e-12,
    max_doublings: int = 200,
) -> float:
    """Smallest budget whose indirect utility reaches ``target``.

    ``value_at`` must be nondecreasing and continuous wherever it is finite.
    The bracket ``[lo, hi]`` is widened upward by doubling until
    ``value_at(hi) >= target``.  Bisection then runs until the lower end has
    a finite value, and Brent's method finishes inside the bracket to an
    absolute width of ``rel_tol * max(1, hi)``.
    """
    if value_at(lo) >= target:
        return lo
    hi = max(hi, lo + 1.0)
    n = 0
    while value_at(hi) < target:
        lo, hi = hi, 2.0 * hi
        n += 1
        if n > max_doublings:
            raise ValueError("target utility not reachable")
    xtol = rel_tol * max(1.0, hi)
    while hi - lo > xtol:
        f_lo = value_at(lo) - target
        if math.isfinite(f_lo):
            break
        mid = 0.5 * (lo + hi)
        if value_at(mid) >= target:
            hi = mid
        else:
            lo = mid
    if hi - lo <= xtol:
        return 0.5 * (lo + hi)
    return brentq(lambda e: value_at(e) - target, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class FocResidual:
    """Per-good deviations of scaled marginal utility per dollar.

    Each entry is ``E * (dlogU/dx) / p_x`` minus the same quantity for the
    composite good, where ``E`` is total spending; inactive inputs are
    ``nan``.  ``norm`` ignores inputs sitting at zero whose deviation is
    negative (complementary slackness).
    """

    deviations: dict[str, float]
    norm: float


def _scaled_marginal(tech, pref, prices, bundle, A, E):
    a, b, c = tech.coefficients.as_tuple()
    o = tech.organic
    M = evaluate_mobility(tech, bundle)
    out = {}
    terms = {"L": a, "K": a, "l": b, "k": c}
    for i, name in enumerate(INPUT_NAMES):
        if terms[name] == 0:
            continue
        try:
            mp = marginal_products(tech, bundle)[i]
        except DomainError:
            mp = math.inf
        if M == 0:
            out[name] = math.inf if mp > 0 or math.isinf(mp) else 0.0
        else:
            out[name] = E * pref.phi * mp / M / prices.price_of(name)
    if A > 0:
        out["A"] = E * (1 - pref.phi) / A / prices.composite_price
    else:
        out["A"] = math.inf
    return out


def foc_residual(tech: MobilityTechnology, pref: Preference, prices: PriceSystem,
                 allocation: Allocation) -> FocResidual:
    E = allocation.split.total or 1.0
    g = _scaled_marginal(tech, pref, prices, allocation.bundle, allocation.A, E)
    ref = g["A"]
    devs = {}
    sq = 0.0
    purchased = allocation.purchased
    for name in VAR_NAMES:
        if name not in g:
            devs[name] = math.nan
            continue
        if name == "A":
            devs[name] = 0.0
            continue
        dev = g[name] - ref if not (math.isinf(g[name]) and math.isinf(ref)) else math.nan
        devs[name] = dev
        at_zero = getattr(purchased, name) == 0
        contrib = max(dev, 0.0) if at_zero else dev
        if math.isnan(contrib):
            contrib = math.inf
        sq += contrib * contrib
    return FocResidual(devs, math.sqrt(sq))


def brute_force_oracle(
    tech: MobilityTechnology,
    pref: Preference,
    prices: PriceSystem,
    E_T: float,
    grid_n: int = 60,
) -> Allocation:
    """Best allocation on the share grid ``{i/grid_n}`` of the budget simplex.

    Only goods with a nonzero coefficient are searched; with ``d`` goods the
    grid has ``C(grid_n + d - 1, d - 1)`` points.
    """
    if E_T < 0:
        raise InvalidBudget(f"E_T={E_T} must be >= 0")
    a, b, c = tech.coefficients.as_tuple()
    o = tech.organic
    names = [n for n, coef in (("L", a), ("K", a), ("l", b), ("k", c)) if coef > 0] + ["A"]
    d = len(names)
    if E_T == 0:
        zero = InputBundle()
        return Allocation(zero, 0.0, 0.0, endowment_split(zero, 0.0, prices), 0.0,
                          Status.CONVERGED)
    bars = np.array(list(itertools.combinations(range(grid_n + d - 1), d - 1)), dtype=np.int64)
    edges = np.hstack([np.full((len(bars), 1), -1), bars,
                       np.full((len(bars), 1), grid_n + d - 1)])
    counts = np.diff(edges, axis=1) - 1
    shares = counts / grid_n
    q = {n: shares[:, i] * E_T / prices.price_of(n) for i, n in enumerate(names)}
    zeros = np.zeros(len(shares))
    L, K, l, k = (q.get(n, zeros) for n in INPUT_NAMES)  # noqa: E741
    with np.errstate(divide="ignore"):
        M = a * L**o.alpha * K**o.beta + b * l**o.gamma + c * k**o.delta
        U = M**pref.phi * q["A"] ** (1 - pref.phi)
    i = int(np.argmax(U))
    bundle = InputBundle(float(L[i]), float(K[i]), float(l[i]), float(k[i]))
    A = float(q["A"][i])
    return Allocation(bundle, A, float(U[i]), endowment_split(bundle, A, prices), math.nan,
                      Status.CONVERGED)


# ---------------------------------------------------------------------------
# product-mix efficiency


def product_mix_residual(
    m_tech: MobilityTechnology,
    a_prod: AProduction,
    pref: Preference,
    m_alloc: InputBundle,
    a_alloc: tuple[float, float],
) -> tuple[float, float, float]:
    """Log-deviations among the rate of substitution and the two transformation rates.

    With ``q1 = U_M / U_A``, ``q2 = A_L / M_L`` and ``q3 = A_K / M_K`` the
    result is ``(log q1 - log q2, log q1 - log q3, log q2 - log q3)``; the
    triple vanishes exactly when consumption and production efficiency hold
    together.  ``M_L`` and ``M_K`` are the joint-task marginal products when
    ``a > 0`` and the solo ones otherwise.
    """
    L_A, K_A = a_alloc
    A = a_prod.output(L_A, K_A)
    M = evaluate_mobility(m_tech, m_alloc)
    if M <= 0 or A <= 0:
        raise DomainError("product-mix residual needs positive M and A")
    dL, dK, dl, dk = marginal_products(m_tech, m_alloc)
    if m_tech.coefficients.a > 0:
        mL, mK = dL, dK
    else:
        mL, mK = dl, dk
    if mL <= 0 or mK <= 0:
        raise DomainError("mobility sector must use both labor and capital")
    aL, aK = a_prod.marginal_products(L_A, K_A)
    q1 = pref.phi * A / ((1 - pref.phi) * M)
    q2 = aL / mL
    q3 = aK / mK
    l1, l2, l3 = math.log(q1), math.log(q2), math.log(q3)
    return (l1 - l2, l1 - l3, l2 - l3)


def unit_cost(a_prod: AProduction, wage: float, capital_rate: float) -> float:
    """Minimum cost of one unit of A under constant returns."""
    tL, tK = a_prod.theta_L, a_prod.theta_K
    if abs(tL + tK - 1) > 1e-12:
        raise InvariantViolation("unit cost is price-independent only under constant returns")
    return (wage / tL) ** tL * (capital_rate / tK) ** tK / a_prod.tfp


def competitive_two_sector(
    m_tech: MobilityTechnology,
    a_prod: AProduction,
    pref: Preference,
    wage: float,
    capital_rate: float,
    E_T: float,
    config: SolverConfig | None = None,
) -> tuple[Allocation, InputBundle, tuple[float, float]]:
    """Decentralize the two-sector economy through factor prices.

    The composite good is priced at the A-sector unit cost; the creator's
    optimum then fixes the mobility inputs, and the A-sector factor demands
    follow from cost minimization.  Totals of labor and capital used by both
    sectors are the implied factor endowments.
    """
    p_A = unit_cost(a_prod, wage, capital_rate)
    prices = PriceSystem(wage, capital_rate, p_A)
    alloc = maximize_utility(m_tech, pref, prices, E_T, config)
    L_A = a_prod.theta_L * p_A * alloc.A / wage
    K_A = a_prod.theta_K * p_A * alloc.A / capital_rate
    return alloc, alloc.bundle, (L_A, K_A)
