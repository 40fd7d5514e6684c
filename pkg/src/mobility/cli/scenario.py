"""Scenario documents: schema check, typed parse, and the inverse serialization."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from importlib import resources
from typing import Any, Callable

import jsonschema

from ..accessibility import AccessProject, CBAConfig
from ..core import MobilityTechnology, Preference, PriceSystem
from ..errors import ScenarioError
from ..policy import (
    ApprovedList,
    DeviceCatalogItem,
    Fungible,
    PolicyRegime,
    Siloed,
    TypeExclusion,
)
from ..population import CreatorSpec, Distribution, PopulationSpec
from ..solver import SolverConfig
from ..temporal import InvestmentScenario, TemporalTechnology, TimePath
from ..temporal.paths import TECH_FIELDS

SCHEMA_VERSION = "1.0"
_TECH_DEFAULTS = {"a": 0.0, "b": 0.0, "c": 0.0,
                  "alpha": 0.5, "beta": 0.5, "gamma": 0.5, "delta": 0.5}


def load_schema() -> dict:
    text = resources.files(__package__).joinpath("scenario.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class Statics:
    t0: float
    t1: float
    tolerance: float = 1e-9


@dataclass(frozen=True)
class PremiumSpec:
    creator: int
    old_regime: str
    new_regime: str
    tech_new: MobilityTechnology


@dataclass(frozen=True)
class Scenario:
    schema_version: str = SCHEMA_VERSION
    seed: int = 0
    period_unit: str = "period"
    solver: SolverConfig = field(default_factory=SolverConfig)
    prices: PriceSystem = field(default_factory=PriceSystem)
    creators: tuple[CreatorSpec, ...] = ()
    population: PopulationSpec | None = None
    statics: Statics | None = None
    catalog: tuple[DeviceCatalogItem, ...] = ()
    regimes: tuple[tuple[str, PolicyRegime], ...] = ()
    investments: tuple[tuple[str, InvestmentScenario], ...] = ()
    premium: PremiumSpec | None = None
    projects: tuple[AccessProject, ...] = ()
    cba: CBAConfig | None = None
    kappa_sweep: tuple[float, ...] = ()

    def regime(self, name: str) -> PolicyRegime:
        return dict(self.regimes)[name]

    def with_overrides(self, seed: int | None = None,
                       tolerance: float | None = None) -> "Scenario":
        s = self
        if seed is not None:
            s = replace(s, seed=seed, solver=replace(s.solver, seed=seed))
            if s.population is not None:
                s = replace(s, population=replace(s.population, seed=seed))
        if tolerance is not None:
            s = replace(s, solver=replace(s.solver, tolerance=tolerance))
        return s


# ---------------------------------------------------------------------------
# parsing


def _path_str(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _money(x) -> float:
    return float(Decimal(str(x)))


def _num(x) -> float:
    return float(x)


class _Parser:
    def __init__(self):
        self.diagnostics: list[tuple[str, str]] = []

    def guard(self, path: str, fn: Callable[[], Any]):
        try:
            return fn()
        except (ValueError, KeyError, TypeError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            self.diagnostics.append((path, str(msg)))
            return None

    def tech(self, d: dict):
        static = {k: _num(d[k]) for k in TECH_FIELDS if k in d}
        if "paths" in d:
            fields = {}
            for k in TECH_FIELDS:
                if k in d["paths"]:
                    fields[k] = TimePath(tuple((_num(t), _num(v)) for t, v in d["paths"][k]))
                else:
                    fields[k] = TimePath.constant(static.get(k, _TECH_DEFAULTS[k]))
            return TemporalTechnology(**fields)
        return MobilityTechnology.from_params(**static)

    def regime(self, d: dict, path: str, catalog: dict[str, DeviceCatalogItem]):
        kind = d["type"]
        items = []
        for j, name in enumerate(d.get("catalog", [])):
            if name not in catalog:
                raise KeyError(f"unknown device {name!r} (at {path}.catalog[{j}])")
            items.append(catalog[name])
        allowed = {
            "Fungible": {"E_T", "catalog"},
            "Siloed": {"labor_budget", "capital_budget", "other_budget", "catalog"},
            "ApprovedList": {"catalog", "capital_budget", "E_rest"},
            "TypeExclusion": {"excluded", "base"},
        }[kind]
        extra = set(d) - allowed - {"type"}
        if extra:
            raise ValueError(f"{kind} does not take {sorted(extra)}")
        if kind == "Fungible":
            return Fungible(_money(d["E_T"]), tuple(items))
        if kind == "Siloed":
            return Siloed(_money(d["labor_budget"]), _money(d["capital_budget"]),
                          _money(d["other_budget"]), tuple(items))
        if kind == "ApprovedList":
            return ApprovedList(tuple(items), _money(d["capital_budget"]), _money(d["E_rest"]))
        base = self.regime(d["base"], path + ".base", catalog)
        return TypeExclusion(tuple(d.get("excluded", [])), base)


def _schema_diagnostics(doc) -> list[tuple[str, str]]:
    validator = jsonschema.Draft202012Validator(load_schema())
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        msg = re.sub(r"Decimal\('([^']*)'\)", r"\1", err.message)
        out.append((_path_str(err.absolute_path), msg))
    return out


def parse_scenario(doc: dict) -> Scenario:
    """Validate ``doc`` against the schema and every type invariant.

    Raises :class:`ScenarioError` listing every problem with its path.
    """
    diags = _schema_diagnostics(doc)
    if diags:
        raise ScenarioError(diags)
    p = _Parser()
    g = p.guard
    seed = int(doc.get("seed", 0))
    solver = g("solver", lambda: SolverConfig(
        seed=seed, **{k: (float(v) if k == "tolerance" else int(v))
                      for k, v in doc.get("solver", {}).items()}))
    prices = g("prices", lambda: PriceSystem(
        **{k: _money(v) for k, v in doc.get("prices", {}).items()}))

    creators = []
    for i, c in enumerate(doc.get("creators", [])):
        base = f"creators[{i}]"
        tech = g(f"{base}.tech", lambda c=c: p.tech(c["tech"]))
        pref = g(f"{base}.pref", lambda c=c: Preference(**{k: _num(v) for k, v in c["pref"].items()}))
        if tech is not None and pref is not None:
            cs = g(base, lambda c=c, tech=tech, pref=pref: CreatorSpec(
                c["id"], tech, pref, _money(c["budget"])))
            if cs is not None:
                creators.append(cs)
    ids = [c["id"] for c in doc.get("creators", [])]
    if len(set(ids)) != len(ids):
        p.diagnostics.append(("creators", "creator ids must be unique"))

    population = None
    if "population" in doc:
        pd = doc["population"]

        def dists(key):
            return {k: Distribution(v["kind"], tuple(v["params"])) for k, v in pd.get(key, {}).items()}

        population = g("population", lambda: PopulationSpec(
            count=pd["count"], seed=seed, distributions=dists("distributions"),
            trend=dists("trend"), trend_horizon=_num(pd.get("trend_horizon", 10.0))))

    statics = None
    if "statics" in doc:
        sd = doc["statics"]
        statics = Statics(_num(sd["t0"]), _num(sd["t1"]), _num(sd.get("tolerance", 1e-9)))

    catalog = []
    for i, d in enumerate(doc.get("catalog", [])):
        item = g(f"catalog[{i}]", lambda d=d: DeviceCatalogItem(
            d["name"], _money(d["price"]), _num(d["capital_services"]), d.get("target", "K"),
            bool(d.get("required", False)), d.get("device_type", "")))
        if item is not None:
            catalog.append(item)
    by_name = {d.name: d for d in catalog}
    if len(by_name) != len(catalog):
        p.diagnostics.append(("catalog", "device names must be unique"))

    regimes = []
    for i, r in enumerate(doc.get("regimes", [])):
        path = f"regimes[{i}].regime"
        reg = g(path, lambda r=r, path=path: p.regime(r["regime"], path, by_name))
        if reg is not None:
            regimes.append((r["name"], reg))
    names = [n for n, _ in regimes]
    if len(set(names)) != len(names):
        p.diagnostics.append(("regimes", "regime names must be unique"))

    investments = []
    for i, d in enumerate(doc.get("investments", [])):
        inv = g(f"investments[{i}]", lambda d=d: InvestmentScenario(
            {int(t): _money(v) for t, v in d["upfront_costs"].items()},
            {int(t): _money(v) for t, v in d["recurring_savings"].items()},
            d["horizon"], _num(d.get("discount_rate", 0.0)),
            {int(t): _num(v) for t, v in d.get("utility_deltas", {}).items()}))
        if inv is not None:
            investments.append((d["name"], inv))

    premium = None
    if "premium" in doc:
        pd = doc["premium"]
        for key in ("old_regime", "new_regime"):
            if pd[key] not in names:
                p.diagnostics.append((f"premium.{key}", f"unknown regime {pd[key]!r}"))
        if pd["creator"] not in ids:
            p.diagnostics.append(("premium.creator", f"unknown creator id {pd['creator']}"))
        tech_new = g("premium.tech_new", lambda: p.tech(pd["tech_new"]))
        if isinstance(tech_new, TemporalTechnology):
            p.diagnostics.append(("premium.tech_new", "must be a static technology"))
        premium = PremiumSpec(pd["creator"], pd["old_regime"], pd["new_regime"], tech_new)

    projects = []
    for i, d in enumerate(doc.get("projects", [])):
        pr = g(f"projects[{i}]", lambda d=d: AccessProject(
            d["name"], _money(d["cost"]), _num(d["delta_rho"]), d["duration"],
            frozenset(d["users"]) if "users" in d else None))
        if pr is not None:
            projects.append(pr)

    cba = None
    kappas: tuple[float, ...] = ()
    if "cba" in doc:
        cd = dict(doc["cba"])
        kappas = tuple(_num(k) for k in cd.pop("kappa_sweep", []))
        if "residual_inefficiency" in cd:
            cd["residual_inefficiency"] = _money(cd["residual_inefficiency"])
        cba = g("cba", lambda: CBAConfig(**{k: (_num(v) if k != "horizon" else v)
                                            for k, v in cd.items()}))

    if p.diagnostics:
        raise ScenarioError(p.diagnostics)
    return Scenario(
        schema_version=doc.get("schema_version", SCHEMA_VERSION),
        seed=seed,
        period_unit=doc.get("period_unit", "period"),
        solver=solver,
        prices=prices,
        creators=tuple(creators),
        population=population,
        statics=statics,
        catalog=tuple(catalog),
        regimes=tuple(regimes),
        investments=tuple(investments),
        premium=premium,
        projects=tuple(projects),
        cba=cba,
        kappa_sweep=kappas,
    )


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioError([(f"line {exc.lineno} column {exc.colno}", exc.msg)]) from None
    if not isinstance(doc, dict):
        raise ScenarioError([("<root>", "scenario must be a JSON object")])
    return parse_scenario(doc)


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError([(str(path), exc.strerror or str(exc))]) from None
    return loads(text)


def validate_document(text: str) -> list[tuple[str, str]]:
    try:
        loads(text)
    except ScenarioError as exc:
        return exc.diagnostics
    return []


# ---------------------------------------------------------------------------
# serialization


def _money_out(x: float) -> str:
    # repr is the shortest string that round-trips the float exactly
    return str(Decimal(repr(float(x))))


def _tech_out(tech) -> dict:
    if isinstance(tech, TemporalTechnology):
        return {"paths": {k: [[t, v] for t, v in getattr(tech, k).breakpoints]
                          for k in TECH_FIELDS}}
    return dict(tech.params())


def _regime_out(r) -> dict:
    if isinstance(r, Fungible):
        d = {"type": "Fungible", "E_T": _money_out(r.E_T)}
    elif isinstance(r, Siloed):
        d = {"type": "Siloed", "labor_budget": _money_out(r.labor_budget),
             "capital_budget": _money_out(r.capital_budget),
             "other_budget": _money_out(r.other_budget)}
    elif isinstance(r, ApprovedList):
        d = {"type": "ApprovedList", "capital_budget": _money_out(r.capital_budget),
             "E_rest": _money_out(r.E_rest)}
    else:
        return {"type": "TypeExclusion", "excluded": list(r.excluded), "base": _regime_out(r.base)}
    if r.catalog or isinstance(r, ApprovedList):
        d["catalog"] = [item.name for item in r.catalog]
    return d


def _dist_out(d: Distribution) -> dict:
    return {"kind": d.kind, "params": list(d.params)}


def serialize_scenario(s: Scenario) -> dict:
    doc: dict[str, Any] = {
        "schema_version": s.schema_version,
        "seed": s.seed,
        "period_unit": s.period_unit,
        "solver": {"tolerance": s.solver.tolerance, "max_iterations": s.solver.max_iterations,
                   "multistarts": s.solver.multistarts, "oracle_grid": s.solver.oracle_grid},
        "prices": {"wage": _money_out(s.prices.wage),
                   "capital_rate": _money_out(s.prices.capital_rate),
                   "composite_price": _money_out(s.prices.composite_price)},
    }
    if s.creators:
        doc["creators"] = [
            {"id": c.id, "tech": _tech_out(c.tech),
             "pref": {"phi": c.pref.phi, "discount_rate": c.pref.discount_rate},
             "budget": _money_out(c.budget)}
            for c in s.creators
        ]
    if s.population is not None:
        pop = s.population
        doc["population"] = {
            "count": pop.count,
            "distributions": {k: _dist_out(v) for k, v in pop.distributions.items()},
            "trend": {k: _dist_out(v) for k, v in pop.trend.items()},
            "trend_horizon": pop.trend_horizon,
        }
    if s.statics is not None:
        doc["statics"] = {"t0": s.statics.t0, "t1": s.statics.t1,
                          "tolerance": s.statics.tolerance}
    if s.catalog:
        doc["catalog"] = [
            {"name": d.name, "price": _money_out(d.price), "capital_services": d.capital_services,
             "target": d.target, "required": d.required, "device_type": d.device_type}
            for d in s.catalog
        ]
    if s.regimes:
        doc["regimes"] = [{"name": n, "regime": _regime_out(r)} for n, r in s.regimes]
    if s.investments:
        doc["investments"] = [
            {"name": n,
             "upfront_costs": {str(t): _money_out(v) for t, v in inv.upfront_costs.items()},
             "recurring_savings": {str(t): _money_out(v)
                                   for t, v in inv.recurring_savings.items()},
             "horizon": inv.horizon, "discount_rate": inv.discount_rate,
             "utility_deltas": {str(t): v for t, v in inv.utility_deltas.items()}}
            for n, inv in s.investments
        ]
    if s.premium is not None:
        doc["premium"] = {"creator": s.premium.creator, "old_regime": s.premium.old_regime,
                          "new_regime": s.premium.new_regime,
                          "tech_new": _tech_out(s.premium.tech_new)}
    if s.projects:
        doc["projects"] = []
        for pr in s.projects:
            d = {"name": pr.name, "cost": _money_out(pr.cost), "delta_rho": pr.delta_rho,
                 "duration": pr.duration}
            if pr.users is not None:
                d["users"] = sorted(pr.users)
            doc["projects"].append(d)
    if s.cba is not None:
        c = s.cba
        doc["cba"] = {"discount_rate": c.discount_rate, "horizon": c.horizon,
                      "residual_inefficiency": _money_out(c.residual_inefficiency),
                      "fragmentation_kappa": c.fragmentation_kappa, "rho_base": c.rho_base,
                      "kappa_sweep": list(s.kappa_sweep)}
    return doc


def dumps(s: Scenario) -> str:
    return json.dumps(serialize_scenario(s), sort_keys=True, indent=2)
