import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobility.core import MobilityTechnology, Preference, PriceSystem
from mobility.errors import InvariantViolation
from mobility.policy import Fungible, Siloed, solve_under_regime
from mobility.population import (
    Distribution,
    ParetoVerdict,
    PopulationSpec,
    aggregate_report,
    creator_rng,
    generate_population,
    pareto_compare,
)
from mobility.temporal import TemporalTechnology, tech_at

POINTS = {
    "a": Distribution.point(1.0), "b": Distribution.point(0.5), "c": Distribution.point(0.0),
    "alpha": Distribution.point(0.3), "beta": Distribution.point(0.4),
    "gamma": Distribution.point(0.6), "delta": Distribution.point(0.7),
    "phi": Distribution.point(0.55), "budget": Distribution.point(12345.0),
}


def test_generation_is_deterministic():
    spec = PopulationSpec(50, 7)
    assert generate_population(spec) == generate_population(spec)
    assert generate_population(spec) != generate_population(PopulationSpec(50, 8))


def test_creator_streams_do_not_depend_on_count():
    small = generate_population(PopulationSpec(5, 99))
    big = generate_population(PopulationSpec(40, 99))
    assert big[:5] == small


def test_substreams_differ():
    a = creator_rng(1, 0).random(4)
    b = creator_rng(1, 1).random(4)
    assert not np.allclose(a, b)


def test_point_masses_give_exact_creator():
    c = generate_population(PopulationSpec(3, 0, POINTS))[2]
    assert c.id == 2
    assert c.tech == MobilityTechnology.from_params(1.0, 0.5, 0.0, 0.3, 0.4, 0.6, 0.7)
    assert c.pref == Preference(0.55)
    assert c.budget == 12345.0
    assert c.regime == Fungible(12345.0)


def test_trend_builds_linear_paths():
    trend = {"a": Distribution.point(0.1)}
    c = generate_population(PopulationSpec(1, 0, POINTS, trend, trend_horizon=5))[0]
    assert isinstance(c.tech, TemporalTechnology)
    assert tech_at(c.tech, 5).params()["a"] == pytest.approx(1.5)
    assert tech_at(c.tech, 50).params()["a"] == pytest.approx(1.5)


def test_sample_mean_of_phi_within_three_standard_errors():
    spec = PopulationSpec(10_000, 2024)
    phis = np.array([c.pref.phi for c in generate_population(spec)])
    d = spec.distributions["phi"]
    se = math.sqrt(d.variance() / len(phis))
    assert abs(phis.mean() - d.mean()) < 3 * se


@pytest.mark.parametrize("dists", [
    {"alpha": Distribution.uniform(0.0, 0.5)},
    {"gamma": Distribution.uniform(0.5, 1.2)},
    {"phi": Distribution.uniform(0.2, 1.0)},
    {"alpha": Distribution.uniform(0.3, 0.6), "beta": Distribution.uniform(0.3, 0.5)},
    {"budget": Distribution.uniform(-1.0, 5.0)},
    {"a": Distribution.point(0.0), "b": Distribution.point(0.0), "c": Distribution.uniform(0, 1)},
    {"zeta": Distribution.point(1.0)},
])
def test_illegal_supports_rejected(dists):
    with pytest.raises(InvariantViolation):
        PopulationSpec(10, 1, dists)


def test_trend_that_breaks_caps_rejected():
    with pytest.raises(InvariantViolation):
        PopulationSpec(10, 1, {"gamma": Distribution.uniform(0.5, 0.9)},
                       {"gamma": Distribution.point(0.05)}, trend_horizon=10)


def test_distribution_invariants():
    with pytest.raises(InvariantViolation):
        Distribution("gamma", (1.0,))
    with pytest.raises(InvariantViolation):
        Distribution.uniform(2.0, 1.0)


# Pareto

def test_pareto_cases():
    assert pareto_compare([1, 2], [1, 2]) == ParetoVerdict.EQUIVALENT
    assert pareto_compare([1, 3], [1, 2]) == ParetoVerdict.A_DOMINATES
    assert pareto_compare([1, 2], [1, 3]) == ParetoVerdict.B_DOMINATES
    assert pareto_compare([2, 1], [1, 2]) == ParetoVerdict.INCOMPARABLE
    assert pareto_compare([1.0], [1.0 + 1e-12]) == ParetoVerdict.EQUIVALENT
    with pytest.raises(ValueError):
        pareto_compare([1], [1, 2])


_SWAP = {
    ParetoVerdict.A_DOMINATES: ParetoVerdict.B_DOMINATES,
    ParetoVerdict.B_DOMINATES: ParetoVerdict.A_DOMINATES,
    ParetoVerdict.EQUIVALENT: ParetoVerdict.EQUIVALENT,
    ParetoVerdict.INCOMPARABLE: ParetoVerdict.INCOMPARABLE,
}
vectors = st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_pareto_antisymmetric(pairs):
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    assert pareto_compare(b, a) == _SWAP[pareto_compare(a, b)]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8))
def test_pareto_reflexive(a):
    assert pareto_compare(a, a) == ParetoVerdict.EQUIVALENT


# aggregation

TECH = MobilityTechnology.from_params(a=1, b=0.5, alpha=0.4, beta=0.4, gamma=0.5)


def _outcomes():
    pref, prices = Preference(0.5), PriceSystem()
    return [
        solve_under_regime(TECH, pref, prices, Fungible(1000.0)),
        solve_under_regime(TECH, pref, prices, Siloed(900.0, 50.0, 50.0)),
        solve_under_regime(TECH, pref, prices, Fungible(3000.0)),
    ]


def test_aggregate_report_accounts_for_every_dollar():
    outs = _outcomes()
    s = aggregate_report(outs)
    assert s.count == 3
    assert math.fsum(s.expenditure.values()) == pytest.approx(5000.0, rel=1e-9)
    assert s.median_utility == sorted(o.utility for o in outs)[1]
    assert s.mean_utility == pytest.approx(sum(o.utility for o in outs) / 3)
    assert s.regime_counts == {"Fungible": 2, "Siloed": 1}
    assert s.loss_counts == {"Loss": 1, "NoLoss": 2}
    assert s.total_deadweight_loss == outs[1].money_metric_loss > 0


def test_aggregate_report_is_order_invariant():
    outs = _outcomes()
    assert aggregate_report(outs) == aggregate_report(outs[::-1])


def test_aggregate_report_rejects_empty():
    with pytest.raises(ValueError):
        aggregate_report([])
