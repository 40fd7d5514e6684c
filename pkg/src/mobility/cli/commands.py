"""One function per subcommand; each turns a scenario into a Report."""

from __future__ import annotations

import math

from .. import __version__
from ..accessibility import (
    BenefitCache,
    base_utilities,
    fragmentation_sweep,
    kaldor_hicks_test,
    marginal_project_rule,
    monetized_benefit,
    social_benefit,
)
from ..core import evaluate_mobility
from ..errors import ScenarioError
from ..policy import regime_kind, solve_under_regime
from ..population import aggregate_report, generate_population
from ..solver import maximize_utility, require_converged
from ..temporal import (
    comparative_statics,
    independence_premium,
    npv,
    payback_period,
    pv_utility,
    technology_at,
)
from .report import Money, Report, config_hash
from .scenario import SCHEMA_VERSION, Scenario, dumps


def _need(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise ScenarioError([(path, msg)])


def _population(s: Scenario):
    if s.creators:
        return list(s.creators)
    _need(s.population is not None, "creators", "scenario needs creators or a population")
    return generate_population(s.population)


def cmd_solve(s: Scenario, parallel: int) -> Report:
    _need(bool(s.creators), "creators", "solve needs at least one inline creator")
    rows = []
    for c in s.creators:
        tech = technology_at(c.tech, 0.0)
        alloc = require_converged(maximize_utility(tech, c.pref, s.prices, c.budget, s.solver))
        b = alloc.bundle
        rows.append({
            "id": c.id, "L": b.L, "K": b.K, "l": b.l, "k": b.k, "A": alloc.A,
            "M": evaluate_mobility(tech, b), "U": alloc.utility_value,
            "E_M": Money(alloc.split.mobility), "E_A": Money(alloc.split.other),
            "status": alloc.status, "foc_residual": alloc.foc_residual_norm,
        })
    return Report("solve", {"creators": len(rows)}, {"allocations": rows})


def cmd_policy_compare(s: Scenario, parallel: int) -> Report:
    _need(bool(s.creators), "creators", "policy-compare needs at least one inline creator")
    _need(bool(s.regimes), "regimes", "policy-compare needs at least one regime")
    rows, outcomes = [], []
    for c in s.creators:
        tech = technology_at(c.tech, 0.0)
        for name, regime in s.regimes:
            o = solve_under_regime(tech, c.pref, s.prices, regime, s.solver, market=s.catalog)
            outcomes.append(o)
            rows.append({
                "creator": c.id, "regime": name, "kind": regime_kind(regime),
                "devices": [d.name for d in o.devices_chosen],
                "device_spend": Money(o.device_spend),
                "utility": o.utility, "benchmark_utility": o.benchmark_utility,
                "deadweight_loss": Money(o.money_metric_loss),
            })
    agg = aggregate_report(outcomes, s.prices)
    summary = {
        "outcomes": agg.count,
        "mean_utility": agg.mean_utility,
        "median_utility": agg.median_utility,
        "total_deadweight_loss": Money(agg.total_deadweight_loss),
        "expenditure_labor": Money(agg.expenditure["labor"]),
        "expenditure_capital": Money(agg.expenditure["capital"]),
        "expenditure_devices": Money(agg.expenditure["devices"]),
        "expenditure_other": Money(agg.expenditure["other"]),
        "with_loss": agg.loss_counts["Loss"],
    }
    return Report("policy-compare", summary, {"regimes": rows})


def cmd_invest(s: Scenario, parallel: int) -> Report:
    _need(bool(s.investments) or s.premium is not None, "investments",
          "invest needs investments or a premium block")
    rows = []
    for name, inv in s.investments:
        rows.append({
            "name": name, "horizon": inv.horizon, "discount_rate": inv.discount_rate,
            "npv": Money(npv(inv)), "payback": payback_period(inv),
            "pv_utility": pv_utility(inv),
        })
    summary = {"period_unit": s.period_unit, "investments": len(rows)}
    if s.premium is not None:
        pm = s.premium
        creator = {c.id: c for c in s.creators}[pm.creator]
        tech_old = technology_at(creator.tech, 0.0)
        old = solve_under_regime(tech_old, creator.pref, s.prices, s.regime(pm.old_regime),
                                 s.solver, market=s.catalog)
        new = solve_under_regime(pm.tech_new, creator.pref, s.prices, s.regime(pm.new_regime),
                                 s.solver, market=s.catalog)
        summary.update({
            "utility_old": old.utility,
            "utility_new": new.utility,
            "independence_premium": Money(independence_premium(
                old, new, pm.tech_new, creator.pref, s.prices, s.solver)),
        })
    return Report("invest", summary, {"investments": rows})


def cmd_access_cba(s: Scenario, parallel: int) -> Report:
    _need(s.cba is not None, "cba", "access-cba needs a cba block")
    cba = s.cba
    pop = _population(s)
    rho_a = cba.rho_base
    everyone = sum(p.delta_rho for p in s.projects if p.users is None)
    rho_b = min(1.0, rho_a + everyone)
    utilities = base_utilities(pop, s.prices, s.solver)
    summary = {
        "creators": len(pop),
        "rho_base": rho_a,
        "rho_all_projects": rho_b,
        "social_benefit": social_benefit(utilities, rho_a, rho_b),
        "monetized_benefit": Money(monetized_benefit(pop, rho_a, rho_b, s.prices, s.solver)),
    }
    cache = BenefitCache(pop, s.prices, s.solver, rho_a)
    plain = kaldor_hicks_test(s.projects, pop, cba, False, cache=cache)
    frag = kaldor_hicks_test(s.projects, pop, cba, True, cache=cache)
    accepted = {p.name for p in marginal_project_rule(s.projects, pop, cba, s.prices, s.solver)}
    summary.update({
        "kaldor_hicks": plain.verdict, "kaldor_hicks_margin": Money(plain.margin),
        "kaldor_hicks_fragmented": frag.verdict,
        "kaldor_hicks_fragmented_margin": Money(frag.margin),
        "residual_inefficiency_config": Money(cba.residual_inefficiency),
    })
    rows = []
    for p in s.projects:
        pv = cache.pv([p], cba)
        rows.append({
            "name": p.name, "cost": Money(p.cost), "delta_rho": p.delta_rho,
            "duration": p.duration, "pv_benefit": Money(pv),
            "ratio": math.inf if p.cost == 0 else pv / p.cost,
            "accepted": p.name in accepted,
        })
    tables = {"projects": rows}
    if s.kappa_sweep:
        _need(s.statics is not None, "statics", "a kappa sweep needs statics t0/t1")
        sweep = fragmentation_sweep(pop, s.statics.t0, s.statics.t1, s.kappa_sweep,
                                    s.prices, s.solver)
        tables["kappa_sweep"] = [
            {"kappa": k, "residual_utility": ru, "residual": Money(rm), "retained": n}
            for k, ru, rm, n in zip(sweep.kappas, sweep.residual_utility,
                                    sweep.residual_money, sweep.retained)
        ]
        measured = dict(zip(sweep.kappas, sweep.residual_money))
        if cba.fragmentation_kappa in measured:
            summary["residual_inefficiency_measured"] = Money(measured[cba.fragmentation_kappa])
    return Report("access-cba", summary, tables)


def cmd_population_run(s: Scenario, parallel: int) -> Report:
    _need(s.statics is not None, "statics", "population-run needs statics t0/t1")
    pop = _population(s)
    rep = comparative_statics(pop, s.statics.t0, s.statics.t1, s.prices, s.solver,
                              tolerance=s.statics.tolerance, parallel=parallel)
    rows = [{"id": r.id, "u0": r.u0, "u1": r.u1, "delta": r.delta, "error": r.error}
            for r in rep.results]
    ok = [r for r in rep.results if r.error is None]
    summary = {
        "creators": len(rows),
        "failed": len(rows) - len(ok),
        "verdict": rep.verdict,
        "tolerance": rep.tolerance,
        "t0": s.statics.t0,
        "t1": s.statics.t1,
        "mean_u0": math.fsum(r.u0 for r in ok) / len(ok) if ok else math.nan,
        "mean_u1": math.fsum(r.u1 for r in ok) / len(ok) if ok else math.nan,
        "improved": sum(1 for r in ok if r.delta > 0),
        "worsened": sum(1 for r in ok if r.delta < 0),
    }
    return Report("population-run", summary, {"creators": rows})


COMMANDS = {
    "solve": cmd_solve,
    "policy-compare": cmd_policy_compare,
    "invest": cmd_invest,
    "access-cba": cmd_access_cba,
    "population-run": cmd_population_run,
}


def run_scenario(command: str, scenario: Scenario, parallel: int = 1) -> Report:
    report = COMMANDS[command](scenario, parallel)
    report.meta = {
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "seed": scenario.seed,
        "config_hash": config_hash(command + "\n" + dumps(scenario)),
    }
    return report
