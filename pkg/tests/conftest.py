import numpy as np
import pytest

from mobility.core import InputBundle, MobilityTechnology, Preference, PriceSystem
from mobility.core import evaluate_mobility, marginal_products
from mobility.solver import SolverConfig

PATTERNS = [("L", "K"), ("L", "K", "l"), ("l", "k"), ("L", "K", "k")]


def planted_instance(rng, floor=0.05):
    """Random concave instance whose optimum is chosen first.

    Every active good gets at least ``floor`` of the budget.  Coefficients
    and phi are then backed out of the first-order conditions, so the known
    optimum is exact.  Returns (tech, pref, prices, E, bundle, A).
    """
    goods = PATTERNS[rng.integers(0, len(PATTERNS))]
    names = list(goods) + ["A"]
    shares = floor + (1 - floor * len(names)) * rng.dirichlet(np.ones(len(names)))
    sh = dict(zip(names, shares))
    prices = PriceSystem(*rng.uniform(0.5, 2.0, 3))
    E = float(rng.uniform(10, 1000))
    x = {n: sh[n] * E / prices.price_of(n) for n in names}
    gamma, delta = rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95)
    alpha = beta = 0.5
    if "L" in x:
        # the joint term's L:K spend ratio pins alpha:beta
        amax = 0.95 * sh["L"] / (sh["L"] + sh["K"])
        alpha = rng.uniform(0.5 * amax, amax)
        beta = alpha * sh["K"] / sh["L"]
    a = prices.wage / (alpha * x["L"] ** (alpha - 1) * x["K"] ** beta) if "L" in x else 0.0
    b = prices.wage / (gamma * x["l"] ** (gamma - 1)) if "l" in x else 0.0
    c = prices.capital_rate / (delta * x["k"] ** (delta - 1)) if "k" in x else 0.0
    tech = MobilityTechnology.from_params(a, b, c, alpha, beta, gamma, delta)
    bundle = InputBundle(x.get("L", 0.0), x.get("K", 0.0), x.get("l", 0.0), x.get("k", 0.0))
    M = evaluate_mobility(tech, bundle)
    eps = sum(q * d for q, d in zip(bundle.as_tuple(), marginal_products(tech, bundle))) / M
    sA = sh["A"]
    phi = (1 - sA) / (1 - sA + sA * eps)
    return tech, Preference(float(phi)), prices, E, bundle, x["A"]


def broad_instance(rng):
    """Unplanted instance with up to three active inputs and random scales."""
    on = [(1, 0, 0), (1, 1, 0), (0, 1, 1), (1, 0, 1)][rng.integers(0, 4)]
    alpha = rng.uniform(0.2, 0.6)
    beta = rng.uniform(0.2, 0.95 - alpha)
    gamma, delta = rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)
    pref = Preference(float(rng.uniform(0.2, 0.8)))
    prices = PriceSystem(*rng.uniform(0.5, 2.0, 3))
    E = float(rng.uniform(10, 1000))
    w = rng.uniform(0.5, 2.0, 3) * np.array(on)
    qL, qK = E / prices.wage, E / prices.capital_rate
    tech = MobilityTechnology.from_params(
        w[0] / (qL**alpha * qK**beta), w[1] / qL**gamma, w[2] / qK**delta,
        alpha, beta, gamma, delta)
    return tech, pref, prices, E


@pytest.fixture
def unit_prices():
    return PriceSystem()


@pytest.fixture
def cfg():
    return SolverConfig()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call" or "test_acceptance.py::test_criterion_" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1].removeprefix("test_criterion_")
            detail = dict(rep.user_properties).get("detail", "")
            lines.append((name, "PASS" if key == "passed" else "FAIL", detail))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, detail in sorted(lines):
        terminalreporter.write_line(f"{verdict}  {name}  {detail}".rstrip())
