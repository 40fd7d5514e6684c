import copy
import json
import subprocess
import sys
from pathlib import Path

import pytest

from mobility.cli import main
from mobility.cli.report import Money
from mobility.cli.scenario import dumps, load_scenario, loads, serialize_scenario, validate_document

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _doc(name):
    return json.loads((SCEN / name).read_text())


def test_money_rounding():
    assert Money(1000.0).cents == 100000
    assert Money(0.125).cents == 12
    assert Money(0.135).cents == 14
    assert Money(1234567.891).text() == "$1,234,567.89"
    assert Money(-5.0).text() == "-$5.00"


def test_solve_closed_form_json(capsys):
    code, out, _ = _run(capsys, "solve", "--scenario", str(SCEN / "closed_form.json"),
                        "--format", "json")
    assert code == 0
    rep = json.loads(out)
    row = rep["tables"]["allocations"][0]
    assert (row["L"], row["K"], row["A"]) == (25.0, 25.0, 50.0)
    assert row["E_M_cents"] == 5000
    assert row["status"] == "Converged"
    assert set(rep) >= {"tool_version", "schema_version", "seed", "config_hash"}


def test_solve_text_default(capsys):
    code, out, _ = _run(capsys, "solve", "--scenario", str(SCEN / "closed_form.json"))
    assert code == 0
    assert "$50.00" in out


def test_policy_compare_turner_lift(capsys):
    code, out, _ = _run(capsys, "policy-compare", "--scenario", str(SCEN / "turner_lift.json"),
                        "--format", "json")
    assert code == 0
    rows = {r["regime"]: r for r in json.loads(out)["tables"]["regimes"]}
    assert rows["fungible"]["deadweight_loss_cents"] == 0
    assert rows["turner-excluded"]["deadweight_loss_cents"] == 100000
    assert rows["turner-excluded"]["devices"] == ["lift"]
    assert rows["approved-lift-only"]["deadweight_loss_cents"] == 100000


def test_invest_wheelchair(capsys):
    code, out, _ = _run(capsys, "invest", "--scenario", str(SCEN / "wheelchair.json"),
                        "--format", "json")
    assert code == 0
    rep = json.loads(out)
    rows = {r["name"]: r for r in rep["tables"]["investments"]}
    assert rows["power-wheelchair-1y"]["payback"] == 1
    assert rows["power-wheelchair-1y"]["npv_cents"] == 0
    assert rows["power-wheelchair-3y"]["npv_cents"] == 1800000
    assert rows["power-wheelchair-5y-5pct"]["npv_cents"] == 2996529
    assert rep["summary"]["independence_premium_cents"] > 0


def test_csv_and_out_file(capsys, tmp_path):
    out_path = tmp_path / "r.csv"
    code, out, _ = _run(capsys, "solve", "--scenario", str(SCEN / "closed_form.json"),
                        "--format", "csv", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[:3] == ["# summary", "key,value", "creators,1"]
    i = lines.index("# allocations")
    assert lines[i + 1].startswith("id,L,K,l,k,A")
    assert out  # human table still printed


def test_validate_ok(capsys):
    for name in ("closed_form.json", "turner_lift.json", "wheelchair.json",
                 "access.json", "population.json"):
        code, out, _ = _run(capsys, "validate", "--scenario", str(SCEN / name))
        assert (code, out.strip()) == (0, "ok"), name


def test_validate_reports_every_bad_path(capsys, tmp_path):
    doc = _doc("closed_form.json")
    doc["creators"][0]["tech"]["a"] = -1
    doc["creators"][0]["pref"]["phi"] = 1.5
    code, out, _ = _run(capsys, "validate", "--scenario", _write(tmp_path, doc))
    assert code == 1
    assert "creators[0].tech.a" in out
    assert "creators[0].pref.phi" in out


def test_validate_domain_rule(capsys, tmp_path):
    doc = _doc("closed_form.json")
    doc["creators"][0]["tech"].update(alpha=0.7, beta=0.6)
    code, out, _ = _run(capsys, "validate", "--scenario", _write(tmp_path, doc))
    assert code == 1
    assert "creators[0].tech" in out


def test_validate_unknown_regime_reference(capsys, tmp_path):
    doc = _doc("wheelchair.json")
    doc["premium"]["old_regime"] = "nope"
    code, out, _ = _run(capsys, "validate", "--scenario", _write(tmp_path, doc))
    assert code == 1
    assert "premium.old_regime" in out


def test_json_syntax_error_has_position():
    diags = validate_document('{"a":\n 1,,}')
    assert diags[0][0] == "line 2 column 4"


def test_solve_invalid_scenario_exit_1(capsys, tmp_path):
    doc = _doc("closed_form.json")
    doc["schema_version"] = "9.9"
    code, _, err = _run(capsys, "solve", "--scenario", _write(tmp_path, doc))
    assert code == 1
    assert "schema_version" in err


def test_nonconvergence_exit_2(capsys, tmp_path):
    doc = _doc("closed_form.json")
    doc["solver"] = {"max_iterations": 1}
    doc["creators"][0]["tech"].update(b=1, gamma=0.5)
    code, _, err = _run(capsys, "solve", "--scenario", _write(tmp_path, doc))
    assert code == 2
    assert "non-convergence" in err


def test_infeasible_exit_3(capsys, tmp_path):
    doc = _doc("turner_lift.json")
    doc["regimes"] = [{"name": "no-transfer", "regime": {
        "type": "TypeExclusion", "excluded": ["transfer"],
        "base": {"type": "Fungible", "E_T": "20000.00", "catalog": ["turner", "lift"]}}}]
    code, _, err = _run(capsys, "policy-compare", "--scenario", _write(tmp_path, doc))
    assert code == 3
    assert "infeasible" in err


def test_round_trip_is_stable():
    for name in ("closed_form.json", "turner_lift.json", "wheelchair.json",
                 "access.json", "population.json"):
        s = load_scenario(SCEN / name)
        again = loads(dumps(s))
        assert again == s, name
        assert dumps(again) == dumps(s)


def test_serialized_document_validates():
    s = load_scenario(SCEN / "access.json")
    assert validate_document(json.dumps(serialize_scenario(s))) == []


def test_seed_override_changes_hash(capsys, tmp_path):
    args = ["solve", "--scenario", str(SCEN / "closed_form.json"), "--format", "json"]
    _, a, _ = _run(capsys, *args)
    _, b, _ = _run(capsys, *args)
    _, c, _ = _run(capsys, *args, "--seed", "5")
    ja, jc = json.loads(a), json.loads(c)
    assert a == b
    assert ja["config_hash"] != jc["config_hash"]
    assert jc["seed"] == 5


def test_money_strings_parse_exactly(tmp_path):
    doc = _doc("closed_form.json")
    doc["creators"][0]["budget"] = "0.10"
    s = loads(json.dumps(doc))
    assert s.creators[0].budget == 0.1


def test_population_run_parallel_matches_serial(tmp_path):
    doc = _doc("population.json")
    doc["population"]["count"] = 12
    path = _write(tmp_path, doc)
    outs = []
    for par in ("1", "3"):
        target = tmp_path / f"p{par}.json"
        subprocess.run([sys.executable, "-m", "mobility.cli", "population-run",
                        "--scenario", path, "--parallel", par, "--out", str(target)],
                       check=True, capture_output=True)
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["summary"]["creators"] == 12


def test_access_cba_runs(capsys):
    code, out, _ = _run(capsys, "access-cba", "--scenario", str(SCEN / "access.json"),
                        "--format", "json")
    assert code == 0
    rep = json.loads(out)
    accepted = {r["name"]: r["accepted"] for r in rep["tables"]["projects"]}
    assert accepted["sidewalks"] and accepted["subway-cars"]
    assert not accepted["restaurant-renovations"]
    sweep = [r["residual_cents"] for r in rep["tables"]["kappa_sweep"]]
    assert sweep[0] == 0 and sweep == sorted(sweep)
