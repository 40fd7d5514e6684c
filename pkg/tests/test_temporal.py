import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobility.core import InputBundle, MobilityTechnology, Preference, PriceSystem
from mobility.errors import InvariantViolation, MixedSign
from mobility.policy import Fungible, solve_under_regime
from mobility.population import CreatorSpec
from mobility.solver import SolverConfig, maximize_utility
from mobility.temporal import (
    GrowthRule,
    InvestmentScenario,
    MobilityType,
    StaticsVerdict,
    TemporalTechnology,
    TimePath,
    classify,
    comparative_statics,
    independence_premium,
    intertemporal_foc_residual,
    long_run_convergence,
    npv,
    payback_period,
    pv_utility,
    r_rate,
    tech_at,
)

BASE = MobilityTechnology.from_params(a=1, alpha=0.5, beta=0.5)
PREF = Preference(0.5)
PRICES = PriceSystem()


# paths and r-rate

def test_tech_at_midpoint_and_flat_extrapolation():
    tt = TemporalTechnology.from_paths(BASE, a=[(0, 1.0), (10, 2.0)])
    assert tech_at(tt, 5).params()["a"] == pytest.approx(1.5)
    assert tech_at(tt, 25).params()["a"] == 2.0
    assert tech_at(tt, -3).params()["a"] == 1.0


def test_constant_paths_are_time_invariant():
    tt = TemporalTechnology.constant(BASE)
    assert tech_at(tt, 0) == tech_at(tt, 7.3) == BASE


def test_path_invariants():
    with pytest.raises(InvariantViolation):
        TimePath(((1, 1.0), (0, 2.0)))
    with pytest.raises(InvariantViolation):
        TemporalTechnology.from_paths(BASE, alpha=[(0, 0.5), (1, 0.8)])


def test_r_rate_linear_coefficient():
    tt = TemporalTechnology.from_paths(BASE, a=[(0, 1.0), (10, 2.0)])
    x = InputBundle(L=4, K=9)
    for t in (0.0, 2.5, 5.0, 9.99):
        assert r_rate(tt, x, t) == pytest.approx(0.6, rel=1e-9)
    assert r_rate(tt, x, 10.0) == 0.0


def test_r_rate_constant_is_zero():
    assert r_rate(TemporalTechnology.constant(BASE), InputBundle(4, 9), 3.0) == 0.0


def test_steeper_decline_is_farther_from_zero():
    shallow = TemporalTechnology.from_paths(BASE, a=[(0, 1.0), (10, 0.8)])
    steep = TemporalTechnology.from_paths(BASE, a=[(0, 1.0), (10, 0.2)])
    x = InputBundle(4, 9)
    r_s, r_f = r_rate(shallow, x, 4.0), r_rate(steep, x, 4.0)
    assert r_f < r_s < 0


def test_r_rate_at_kink_uses_next_segment():
    tt = TemporalTechnology.from_paths(BASE, a=[(0, 1.0), (5, 2.0), (10, 1.0)])
    x = InputBundle(1, 1)
    assert r_rate(tt, x, 5.0) == pytest.approx(-0.2, rel=1e-9)
    assert r_rate(tt, x, 2.0) == pytest.approx(0.2, rel=1e-9)


def test_classify():
    x = InputBundle(4, 9)
    grid = [0, 2, 4, 6, 8]
    assert classify(TemporalTechnology.constant(BASE), x, grid) == MobilityType.TYPE1
    down = TemporalTechnology.from_paths(BASE, a=[(0, 2.0), (10, 1.0)])
    assert classify(down, x, grid) == MobilityType.TYPE2
    hump = TemporalTechnology.from_paths(BASE, a=[(0, 1.0), (5, 2.0), (10, 1.0)])
    with pytest.raises(MixedSign):
        classify(hump, x, grid)
    with pytest.raises(ValueError):
        classify(down, x, [])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 3.0), min_size=2, max_size=5),
       st.lists(st.floats(0.0, 12.0), min_size=1, max_size=6))
def test_classify_agrees_with_rate_signs(values, grid):
    tt = TemporalTechnology.from_paths(BASE, a=list(zip(range(0, 3 * len(values), 3), values)))
    x = InputBundle(2, 3)
    rates = [r_rate(tt, x, t) for t in grid]
    try:
        kind = classify(tt, x, grid)
    except MixedSign:
        assert min(rates) < -1e-9 <= max(rates)
        return
    if kind == MobilityType.TYPE1:
        assert min(rates) >= -1e-9
    else:
        assert max(rates) < -1e-9


# cash flows

WHEELCHAIR = InvestmentScenario({0: 9000.0}, {1: 9000.0}, 1)


def test_wheelchair_breakeven():
    assert npv(WHEELCHAIR) == 0.0
    assert payback_period(WHEELCHAIR) == 1


def test_three_years_plain_sum():
    assert npv(InvestmentScenario.annual(9000.0, 9000.0, 3)) == 18000.0


def test_five_years_at_five_percent_matches_discount_table():
    # frozen from an exact rational sum of the discount table
    assert npv(InvestmentScenario.annual(9000.0, 9000.0, 5, 0.05)) == pytest.approx(
        29965.290035677375, rel=1e-12)


def test_payback_edge_cases():
    assert payback_period(InvestmentScenario({}, {1: 5.0}, 2)) == 0
    assert payback_period(InvestmentScenario.annual(100.0, 10.0, 5)) is None


def test_npv_decreasing_in_rate():
    inv = InvestmentScenario.annual(9000.0, 9000.0, 4)
    vals = [npv(inv.with_discount(r)) for r in np.linspace(0, 0.5, 11)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(0, 6), st.floats(0, 1e4), max_size=4),
       st.dictionaries(st.integers(0, 6), st.floats(0, 1e4), max_size=4))
def test_npv_at_zero_rate_is_plain_sum(costs, savings):
    inv = InvestmentScenario(costs, savings, 6)
    assert npv(inv) == pytest.approx(math.fsum(savings.values()) - math.fsum(costs.values()),
                                     abs=1e-6)


def test_pv_utility_discounts():
    inv = InvestmentScenario({}, {}, 2, 1.0, {0: 1.0, 2: 4.0, 5: 100.0})
    assert pv_utility(inv) == pytest.approx(2.0)


def test_investment_invariants():
    with pytest.raises(InvariantViolation):
        InvestmentScenario({0: -1.0}, {}, 1)
    with pytest.raises(InvariantViolation):
        InvestmentScenario({}, {}, 0)


# independence premium

def _outcome(tech, budget):
    return solve_under_regime(tech, PREF, PRICES, Fungible(budget))


def test_premium_zero_at_indifference():
    old = _outcome(BASE, 1000.0)
    assert independence_premium(old, _outcome(BASE, 1000.0), BASE, PREF, PRICES) == 0.0


def test_premium_sign_follows_utility():
    old = _outcome(BASE, 1000.0)
    better = BASE.replace(a=1.5)
    worse = BASE.replace(a=0.5)
    assert independence_premium(old, _outcome(better, 1000.0), better, PREF, PRICES) > 0
    assert independence_premium(old, _outcome(worse, 1000.0), worse, PREF, PRICES) < 0


def test_premium_closed_form():
    # Cobb-Douglas with phi=0.5, alpha+beta=1: V(E) is linear in E with slope ~ sqrt(a)
    old = _outcome(BASE, 1000.0)
    better = BASE.replace(a=4.0)
    pi = independence_premium(old, _outcome(better, 1000.0), better, PREF, PRICES)
    assert pi == pytest.approx(500.0, abs=1e-6 * 1000)


def test_fatigue_offsets_savings():
    # the autonomous method is less productive but frees budget; tuned to indifference
    old = _outcome(BASE, 1000.0)
    tired = BASE.replace(a=0.25)
    pi = independence_premium(old, _outcome(tired, 2000.0), tired, PREF, PRICES)
    assert pi == pytest.approx(0.0, abs=1e-6 * 2000)


# intertemporal diagnostic

def _traj(techs, budgets, ts):
    return [(t, maximize_utility(t, PREF, PRICES, e), s) for t, e, s in zip(techs, budgets, ts)]


def test_intertemporal_stationary_is_zero():
    r = intertemporal_foc_residual(_traj([BASE] * 3, [100.0] * 3, [0, 1, 2]), PREF)
    assert r.residual == 0.0


def test_intertemporal_mobility_growth_is_positive():
    techs = [BASE.replace(a=1 + 0.2 * i) for i in range(3)]
    r = intertemporal_foc_residual(_traj(techs, [100.0] * 3, [0, 1, 2]), PREF)
    assert r.pv_other == pytest.approx(0.0, abs=1e-9)
    assert r.residual > 0


def test_intertemporal_heavy_discounting_keeps_first_terms():
    techs = [BASE.replace(a=1 + 0.2 * i) for i in range(3)]
    traj = _traj(techs, [100.0] * 3, [0, 1, 2])
    heavy = intertemporal_foc_residual(traj, Preference(0.5, 1e9))
    M0 = [1.0 * 25, 1.2 * 25]
    u0 = math.sqrt(25.0 * 50.0)
    assert heavy.pv_mobility == pytest.approx(0.5 * u0 / M0[0] * (M0[1] - M0[0]), rel=1e-6)


def test_intertemporal_needs_two_periods():
    with pytest.raises(ValueError):
        intertemporal_foc_residual(_traj([BASE], [1.0], [0]), PREF)


# comparative statics

def _creator(i, path):
    return CreatorSpec(i, TemporalTechnology.from_paths(BASE, a=path), PREF, 1000.0)


def test_statics_identical_is_equivalent():
    pop = [_creator(i, [(0, 1.0)]) for i in range(3)]
    assert comparative_statics(pop, 0, 5).verdict == StaticsVerdict.EQUIVALENT


def test_statics_improving_second_dominates():
    pop = [_creator(0, [(0, 1.0), (5, 1.5)]), _creator(1, [(0, 1.0)])]
    rep = comparative_statics(pop, 0, 5)
    assert rep.verdict == StaticsVerdict.SECOND_DOMINATES
    assert rep.per_creator_delta[0][1] > 0
    assert rep.per_creator_delta[1][1] == 0


def test_statics_mixed_is_incomparable():
    pop = [_creator(0, [(0, 1.0), (5, 1.5)]), _creator(1, [(0, 1.0), (5, 0.5)])]
    assert comparative_statics(pop, 0, 5).verdict == StaticsVerdict.INCOMPARABLE


def test_statics_failure_marks_incomparable():
    pop = [_creator(0, [(0, 1.0)]), _creator(9, [(0, 1.0)])]
    rep = comparative_statics(pop, 0, 5, config=SolverConfig(max_iterations=1))
    assert rep.verdict == StaticsVerdict.INCOMPARABLE
    assert rep.failed == [0, 9]
    assert rep.per_creator_delta[0] == (0, None)


def test_statics_parallel_matches_serial():
    pop = [_creator(i, [(0, 1.0), (5, 1.0 + 0.1 * i)]) for i in range(4)]
    assert comparative_statics(pop, 0, 5, parallel=2) == comparative_statics(pop, 0, 5)


# long-run reinvestment

ORGANIC = MobilityTechnology.from_params(a=1, b=1, alpha=0.3, beta=0.3, gamma=0.4)


def test_zero_reinvestment_is_flat():
    c = CreatorSpec(0, ORGANIC, PREF, 1000.0)
    path = long_run_convergence(c, GrowthRule(0.0, {"gamma": 1e-4}, 100.0), 5)
    assert max(path.utilities) - min(path.utilities) <= 1e-12 * path.utilities[0]


def test_positive_reinvestment_is_nondecreasing():
    c = CreatorSpec(0, ORGANIC, PREF, 1000.0)
    path = long_run_convergence(c, GrowthRule(0.5, {"gamma": 1e-4, "alpha": 5e-5}, 100.0), 8)
    u = np.array(path.utilities)
    assert np.all(np.diff(u) >= -1e-9 * u[0])
    assert u[-1] > u[0]
    for t in path.technologies:
        p = t.params()
        assert p["gamma"] <= 1.0 and p["alpha"] + p["beta"] <= 1.0 + 1e-12


def test_capped_start_is_flat():
    capped = MobilityTechnology.from_params(a=1, b=1, c=1, alpha=0.5, beta=0.5, gamma=1, delta=1)
    c = CreatorSpec(0, capped, PREF, 1000.0)
    rule = GrowthRule(1.0, {k: 1.0 for k in ("alpha", "beta", "gamma", "delta")}, 500.0)
    path = long_run_convergence(c, rule, 4)
    assert max(path.utilities) - min(path.utilities) <= 1e-9 * path.utilities[0]


def test_growth_rule_rejects_coefficients():
    with pytest.raises(InvariantViolation):
        GrowthRule(0.5, {"a": 1.0})
    with pytest.raises(InvariantViolation):
        GrowthRule(1.5, {})
