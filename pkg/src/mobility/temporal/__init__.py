"""Time-varying technologies, investment appraisal and dynamics."""

from .dynamics import (
    ConvergencePath,
    GrowthRule,
    IntertemporalResidual,
    ParetoReport,
    StaticsVerdict,
    comparative_statics,
    intertemporal_foc_residual,
    long_run_convergence,
    ordered_map,
    technology_at,
)
from .investment import InvestmentScenario, independence_premium, npv, payback_period, pv_utility
from .paths import TECH_FIELDS, MobilityType, TemporalTechnology, TimePath, classify, r_rate, tech_at

__all__ = [
    "ConvergencePath", "GrowthRule", "IntertemporalResidual", "InvestmentScenario",
    "MobilityType", "ParetoReport", "StaticsVerdict", "TECH_FIELDS", "TemporalTechnology",
    "TimePath", "classify", "comparative_statics", "independence_premium",
    "intertemporal_foc_residual", "long_run_convergence", "npv", "ordered_map",
    "payback_period", "pv_utility", "r_rate", "tech_at", "technology_at",
]
