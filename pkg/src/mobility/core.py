"""Domain types and pure evaluation of mobility production and utility.

A mobility creator combines caregiver labor and mobility-aid capital to
produce mobility::

    M = a * L**alpha * K**beta + b * l**gamma + c * k**delta

where ``(L, K)`` are labor and capital used jointly on the same task and
``l``/``k`` are labor or capital used on their own.  Preferences over
mobility ``M`` and all other goods ``A`` are Cobb-Douglas,
``U = M**phi * A**(1 - phi)``, optionally scaled by an accessibility
multiplier ``rho``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DomainError, InvariantViolation

INPUT_NAMES = ("L", "K", "l", "k")


class Category(str, enum.Enum):
    JOINT = "Joint"
    LABOR_ONLY = "LaborOnly"
    CAPITAL_ONLY = "CapitalOnly"


@dataclass(frozen=True)
class MobilityGood:
    label: str
    category: Category

    def __post_init__(self):
        if not self.label:
            raise InvariantViolation("mobility good label must be non-empty")
        object.__setattr__(self, "category", Category(self.category))


@dataclass(frozen=True)
class OrganicParameters:
    """Production exponents; smaller values mean a more severe impairment."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise InvariantViolation(f"{name}={v} must lie in (0, 1]")
        if self.alpha + self.beta > 1.0 + 1e-12:
            raise InvariantViolation(
                f"alpha + beta = {self.alpha + self.beta:g} exceeds 1 (concavity)"
            )


@dataclass(frozen=True)
class EndowmentCoefficients:
    """Counts (or weights) of joint, labor-only and capital-only goods.

    The all-zero triple is representable so that an empty bundle can be
    aggregated; :class:`MobilityTechnology` rejects it.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not (v >= 0.0) or math.isinf(v):
                raise InvariantViolation(f"coefficient {name}={v} must be finite and >= 0")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class MobilityTechnology:
    coefficients: EndowmentCoefficients
    organic: OrganicParameters

    def __post_init__(self):
        if self.coefficients.a + self.coefficients.b + self.coefficients.c <= 0.0:
            raise InvariantViolation("a + b + c must be positive")

    @classmethod
    def from_params(
        cls,
        a: float = 0.0,
        b: float = 0.0,
        c: float = 0.0,
        alpha: float = 0.5,
        beta: float = 0.5,
        gamma: float = 0.5,
        delta: float = 0.5,
    ) -> "MobilityTechnology":
        return cls(EndowmentCoefficients(a, b, c), OrganicParameters(alpha, beta, gamma, delta))

    def params(self) -> dict[str, float]:
        c, o = self.coefficients, self.organic
        return {
            "a": c.a, "b": c.b, "c": c.c,
            "alpha": o.alpha, "beta": o.beta, "gamma": o.gamma, "delta": o.delta,
        }

    def replace(self, **changes: float) -> "MobilityTechnology":
        p = self.params()
        p.update(changes)
        return MobilityTechnology.from_params(**p)


@dataclass(frozen=True)
class InputBundle:
    L: float = 0.0
    K: float = 0.0
    l: float = 0.0  # noqa: E741
    k: float = 0.0

    def __post_init__(self):
        for name in INPUT_NAMES:
            v = getattr(self, name)
            if not (v >= 0.0):
                raise InvariantViolation(f"input {name}={v} must be >= 0")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.L, self.K, self.l, self.k)

    def __add__(self, other: "InputBundle") -> "InputBundle":
        return InputBundle(*(x + y for x, y in zip(self.as_tuple(), other.as_tuple())))

    def scaled(self, factor: float) -> "InputBundle":
        return InputBundle(*(factor * x for x in self.as_tuple()))


@dataclass(frozen=True)
class PriceSystem:
    wage: float = 1.0
    capital_rate: float = 1.0
    composite_price: float = 1.0

    def __post_init__(self):
        for name in ("wage", "capital_rate", "composite_price"):
            v = getattr(self, name)
            if not (v > 0.0) or math.isinf(v):
                raise InvariantViolation(f"price {name}={v} must be finite and > 0")

    def price_of(self, name: str) -> float:
        if name in ("L", "l"):
            return self.wage
        if name in ("K", "k"):
            return self.capital_rate
        if name == "A":
            return self.composite_price
        raise KeyError(name)


@dataclass(frozen=True)
class Preference:
    phi: float
    discount_rate: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.phi < 1.0):
            raise InvariantViolation(f"phi={self.phi} must lie in (0, 1)")
        if not (self.discount_rate >= 0.0):
            raise InvariantViolation(f"discount_rate={self.discount_rate} must be >= 0")


@dataclass(frozen=True)
class EndowmentSplit:
    total: float
    mobility: float
    other: float
    device_cost: float = field(default=0.0)

    def __post_init__(self):
        for name in ("total", "mobility", "other"):
            if getattr(self, name) < 0.0:
                raise InvariantViolation(f"endowment {name} must be >= 0")


def aggregate_bundle(goods: Iterable[MobilityGood]) -> EndowmentCoefficients:
    """Count goods per category into the coefficients ``(a, b, c)``."""
    counts = {cat: 0 for cat in Category}
    for g in goods:
        counts[g.category] += 1
    return EndowmentCoefficients(
        float(counts[Category.JOINT]),
        float(counts[Category.LABOR_ONLY]),
        float(counts[Category.CAPITAL_ONLY]),
    )


def _pow(x: float, e: float) -> float:
    # 0**e := 0 for e > 0
    return 0.0 if x == 0.0 else x**e


def evaluate_mobility(tech: MobilityTechnology, bundle: InputBundle) -> float:
    c, o = tech.coefficients, tech.organic
    m = 0.0
    if c.a:
        m += c.a * _pow(bundle.L, o.alpha) * _pow(bundle.K, o.beta)
    if c.b:
        m += c.b * _pow(bundle.l, o.gamma)
    if c.c:
        m += c.c * _pow(bundle.k, o.delta)
    return m


def _partial(coef: float, x: float, e: float, other: float = 1.0, name: str = "") -> float:
    """d/dx of coef * x**e * other."""
    if coef == 0.0 or other == 0.0:
        if coef != 0.0 and x == 0.0 and e < 1.0:
            # 0 * inf: the joint term is not differentiable at the origin
            raise DomainError(f"marginal product in {name} undefined at the zero bundle")
        return 0.0
    if x == 0.0:
        if e < 1.0:
            raise DomainError(f"marginal product in {name} is unbounded at {name}=0")
        return coef * other
    return coef * e * x ** (e - 1.0) * other


def marginal_products(
    tech: MobilityTechnology, bundle: InputBundle
) -> tuple[float, float, float, float]:
    """Analytic partial derivatives ``(dM/dL, dM/dK, dM/dl, dM/dk)``.

    Raises :class:`DomainError` when an input with an exponent below one
    sits at zero while its term is active, since the derivative diverges.
    """
    c, o = tech.coefficients, tech.organic
    L, K, l, k = bundle.as_tuple()  # noqa: E741
    dL = _partial(c.a, L, o.alpha, _pow(K, o.beta), "L")
    dK = _partial(c.a, K, o.beta, _pow(L, o.alpha), "K")
    dl = _partial(c.b, l, o.gamma, 1.0, "l")
    dk = _partial(c.c, k, o.delta, 1.0, "k")
    return (dL, dK, dl, dk)


def utility(M: float, A: float, phi: float) -> float:
    if M < 0 or A < 0:
        raise DomainError("utility is defined for nonnegative M and A")
    if M == 0.0 or A == 0.0:
        return 0.0
    return M**phi * A ** (1.0 - phi)


def check_rho(rho: float) -> float:
    if not (0.0 < rho <= 1.0):
        raise InvariantViolation(f"rho={rho} must lie in (0, 1]")
    return rho


def utility_accessible(M: float, A: float, phi: float, rho: float) -> float:
    return check_rho(rho) * utility(M, A, phi)


def endowment_split(
    bundle: InputBundle, A: float, prices: PriceSystem, device_cost: float = 0.0
) -> EndowmentSplit:
    """Money value of an allocation; ``device_cost`` counts toward mobility."""
    mobility = (
        prices.wage * (bundle.L + bundle.l)
        + prices.capital_rate * (bundle.K + bundle.k)
        + device_cost
    )
    total = mobility + prices.composite_price * A
    # derive `other` from the rounded total so total - mobility - other == 0 exactly
    return EndowmentSplit(total=total, mobility=mobility, other=total - mobility,
                          device_cost=device_cost)
