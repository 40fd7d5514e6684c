"""Pareto comparison of matched utility vectors."""

from __future__ import annotations

import enum
from typing import Sequence

DEFAULT_TOLERANCE = 1e-9


class ParetoVerdict(str, enum.Enum):
    A_DOMINATES = "ADominates"
    B_DOMINATES = "BDominates"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


def _close(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def pareto_compare(outcomes_a: Sequence[float], outcomes_b: Sequence[float],
                   tolerance: float = DEFAULT_TOLERANCE) -> ParetoVerdict:
    """Weak dominance with strict improvement somewhere; ties within ``tolerance`` (relative)."""
    if len(outcomes_a) != len(outcomes_b):
        raise ValueError(f"length mismatch: {len(outcomes_a)} vs {len(outcomes_b)}")
    a_better = b_better = False
    for x, y in zip(outcomes_a, outcomes_b):
        if _close(x, y, tolerance):
            continue
        if x > y:
            a_better = True
        else:
            b_better = True
    if a_better and b_better:
        return ParetoVerdict.INCOMPARABLE
    if a_better:
        return ParetoVerdict.A_DOMINATES
    if b_better:
        return ParetoVerdict.B_DOMINATES
    return ParetoVerdict.EQUIVALENT
