"""Piecewise-linear parameter paths and the rehabilitation rate."""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import InputBundle, MobilityTechnology, evaluate_mobility
from ..errors import InvariantViolation, MixedSign

TECH_FIELDS = ("a", "b", "c", "alpha", "beta", "gamma", "delta")
_KNOT_TOL = 1e-12

_RANGES = {
    "a": (0.0, np.inf), "b": (0.0, np.inf), "c": (0.0, np.inf),
    "alpha": (0.0, 1.0), "beta": (0.0, 1.0), "gamma": (0.0, 1.0), "delta": (0.0, 1.0),
}


@dataclass(frozen=True)
class TimePath:
    """Breakpoints ``(t, value)``; linear in between, flat outside."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(v)) for t, v in self.breakpoints)
        if not pts:
            raise InvariantViolation("a time path needs at least one breakpoint")
        ts = [t for t, _ in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvariantViolation("breakpoints must be strictly increasing in t")
        object.__setattr__(self, "breakpoints", pts)

    @classmethod
    def constant(cls, value: float) -> "TimePath":
        return cls(((0.0, value),))

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.breakpoints)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.breakpoints)

    def at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))

    def check_range(self, name: str) -> None:
        lo, hi = _RANGES[name]
        for t, v in self.breakpoints:
            if name in ("a", "b", "c"):
                ok = lo <= v < hi
            else:
                ok = lo < v <= hi
            if not ok:
                raise InvariantViolation(f"{name}({t:g})={v} is outside its legal range")


@dataclass(frozen=True)
class TemporalTechnology:
    a: TimePath
    b: TimePath
    c: TimePath
    alpha: TimePath
    beta: TimePath
    gamma: TimePath
    delta: TimePath

    def __post_init__(self):
        for name in TECH_FIELDS:
            getattr(self, name).check_range(name)
        # both paths are linear between the union of knots, so checking knots suffices
        for t in self.knots() or (0.0,):
            tech_at(self, t)

    @classmethod
    def constant(cls, tech: MobilityTechnology) -> "TemporalTechnology":
        return cls(**{k: TimePath.constant(v) for k, v in tech.params().items()})

    @classmethod
    def from_paths(cls, base: MobilityTechnology, **paths) -> "TemporalTechnology":
        """Constant at ``base`` except for the named paths (TimePath or breakpoint list)."""
        fields = {k: TimePath.constant(v) for k, v in base.params().items()}
        for k, p in paths.items():
            fields[k] = p if isinstance(p, TimePath) else TimePath(tuple(p))
        return cls(**fields)

    def knots(self) -> tuple[float, ...]:
        ts = set()
        for name in TECH_FIELDS:
            ts.update(getattr(self, name).times)
        return tuple(sorted(ts))


def tech_at(temporal: TemporalTechnology, t: float) -> MobilityTechnology:
    return MobilityTechnology.from_params(
        **{name: getattr(temporal, name).at(t) for name in TECH_FIELDS}
    )


def _m(temporal, bundle, t):
    return evaluate_mobility(tech_at(temporal, t), bundle)


def r_rate(temporal: TemporalTechnology, bundle: InputBundle, t: float) -> float:
    """dM/dt at fixed inputs.

    Inside a segment the central difference uses a step of a tenth of the
    segment (shrunk to stay inside it).  At a knot the one-sided forward
    difference over the next segment is used; past the last knot the rate
    is zero.
    """
    knots = temporal.knots()
    if len(knots) < 2 or t >= knots[-1] - _KNOT_TOL * max(1.0, abs(knots[-1])):
        return 0.0
    if t < knots[0] - _KNOT_TOL * max(1.0, abs(knots[0])):
        return 0.0
    i = bisect.bisect_right(knots, t) - 1
    i = max(i, 0)
    left, right = knots[i], knots[i + 1]
    if abs(t - left) <= _KNOT_TOL * max(1.0, abs(left)) or t <= left:
        h = (right - left) / 10.0
        return (_m(temporal, bundle, left + h) - _m(temporal, bundle, left)) / h
    h = min((right - left) / 10.0, t - left, right - t)
    return (_m(temporal, bundle, t + h) - _m(temporal, bundle, t - h)) / (2.0 * h)


class MobilityType(str, enum.Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"


def classify(temporal: TemporalTechnology, bundle: InputBundle, grid: Sequence[float],
             tolerance: float = 1e-9) -> MobilityType:
    """Type1 if the r-rate is never below ``-tolerance`` on the grid, Type2 if always."""
    if len(grid) == 0:
        raise ValueError("classification grid is empty")
    rates = [r_rate(temporal, bundle, t) for t in grid]
    if all(r >= -tolerance for r in rates):
        return MobilityType.TYPE1
    if all(r < -tolerance for r in rates):
        return MobilityType.TYPE2
    raise MixedSign(
        f"r-rate changes sign on the grid (min {min(rates):.6g}, max {max(rates):.6g})"
    )
