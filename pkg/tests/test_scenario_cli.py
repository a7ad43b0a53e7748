import io
from pathlib import Path

import numpy as np
import pytest

from bertrand_lab.cli import main
from bertrand_lab.scenario import (ScenarioError, baseline, dump_scenario, extended_baseline, linear_baseline,
                                   load_scenario, parse_scenario, random_scenario)

ROOT = Path(__file__).resolve().parents[1]
S0 = str(ROOT / "scenarios" / "S0.cfg")
SX = str(ROOT / "scenarios" / "SX.cfg")
LIN = str(ROOT / "scenarios" / "linear.cfg")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    lines = text.strip().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_shipped_scenarios_match_builtins():
    for path, sc in ((S0, baseline()), (SX, extended_baseline()), (LIN, linear_baseline())):
        got = load_scenario(path)
        assert (got.prims, got.funcs, got.kind, got.linear) == (sc.prims, sc.funcs, sc.kind, sc.linear)


def test_round_trip():
    for sc in (baseline(), linear_baseline(), random_scenario(np.random.default_rng(3))):
        back = parse_scenario(dump_scenario(sc))
        assert (back.prims, back.funcs, back.kind, back.linear, back.dynamics) == \
               (sc.prims, sc.funcs, sc.kind, sc.linear, sc.dynamics)


def test_field_errors_are_qualified():
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(Path(S0).read_text().replace("q = 2.56", "q = -1"))
    assert any(e.startswith("market.q:") for e in ei.value.errors)
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(Path(S0).read_text().replace("kind = specific", "kind = cournot"))
    assert ei.value.errors[0].startswith("demand.kind")
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(Path(S0).read_text() + "\n[beta]\n")
    assert "parse error" in ei.value.errors[0]
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(Path(S0).read_text().replace("b_beta = 0.5", "b_beta = 0.5\nbb = 1\n[extra]\nx = 1"))
    assert set(ei.value.errors) >= {"beta.bb: unknown key", "extra: unknown section"}
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(Path(S0).read_text().replace("P0 = 0.4", "P0 = high").replace("R = 2.0", ""))
    assert any(e.startswith("prob.P0: not a number") for e in ei.value.errors)
    assert "market.R: missing" in ei.value.errors
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(Path(S0).read_text().replace("kind = specific", "kind = linear"))
    assert "demand.A: required for linear demand" in ei.value.errors
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(ROOT / "no_such.cfg")


def test_random_scenarios_valid():
    rng = np.random.default_rng(0)
    for _ in range(50):
        from bertrand_lab.equilibrium import closed_form_equilibrium
        sc = random_scenario(rng)
        assert closed_form_equilibrium(sc.prims, sc.funcs).conditions.all_hold


def test_solve_row():
    code, out, _ = run("solve", S0)
    assert code == 0
    head, body = rows(out)
    assert head[:2] == ["p_UE", "p_LE"]
    assert body[0][:2] == ["1.33333333333", "1.66666666667"]
    assert body[0][head.index("CS_agg")] == "0.402777777778"
    code, out, _ = run("solve", LIN)
    assert code == 0 and rows(out)[1][0][-1] == ""


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(Path(S0).read_text().replace("q = 2.56", "q = -1"))
    code, _, err = run("solve", str(bad))
    assert code == 2 and "market.q" in err
    assert run("solve", str(tmp_path / "missing.cfg"))[0] == 2
    assert run("bogus", S0)[0] == 2
    assert run("sweep", S0, "--param", "q", "--from", "1", "--to", "2", "--steps", "0")[0] == 2
    code, _, err = run("extended", S0)
    assert code == 3 and "NoInteriorSolution" in err
    assert run("extended", SX)[0] == 0


def test_check_failure_exit(tmp_path):
    # q below the L price violates Condition 1, so the check report fails
    bad = tmp_path / "thin.cfg"
    bad.write_text(Path(S0).read_text().replace("q = 2.56", "q = 1.5"))
    code, out, _ = run("check", str(bad), "--trials", "2")
    assert code == 1 and "FAIL" in out
    code, _, err = run("solve", str(bad))
    assert code == 0 and "warning" in err.lower()


def test_check_baseline_deterministic():
    code1, out1, _ = run("check", S0, "--trials", "5")
    code2, out2, _ = run("check", S0, "--trials", "5")
    assert code1 == code2 == 0
    assert out1 == out2
    assert "FAIL" not in out1


def test_sweep(tmp_path):
    code, out, _ = run("sweep", S0, "--param", "cL", "--from", "0", "--to", "0.5", "--steps", "41")
    assert code == 0
    head, body = rows(out)
    assert len(body) == 41 and head[0] == "c_bar_L"
    ge = [float(r[head.index("G_E")]) for r in body]
    assert all(b < a for a, b in zip(ge, ge[1:]))
    _, one, _ = run("sweep", S0, "--param", "cL", "--from", "0.1", "--to", "9", "--steps", "1")
    _, solve, _ = run("solve", S0)
    h1, b1 = rows(one)
    hs, bs = rows(solve)
    assert h1[1:1 + len(hs)] == hs and b1[0][1:1 + len(hs)] == bs[0]
    dest = tmp_path / "sweep.csv"
    code, out, _ = run("sweep", S0, "--param", "G", "--from", "0", "--to", "1", "--steps", "3", "--out", str(dest))
    assert code == 0 and out == "" and len(dest.read_text().splitlines()) == 4


def test_sweep_parallel_matches_serial():
    args = ["sweep", S0, "--param", "R", "--from", "1.5", "--to", "2.5", "--steps", "4"]
    assert run(*args)[1] == run(*args, "--jobs", "2")[1]


def test_statics_policy_curves_dynamics():
    code, out, err = run("statics", S0, "--param", "cL")
    assert code == 0
    head, body = rows(out)
    assert head[:3] == ["quantity", "analytic", "fd"]
    errs = [r[head.index("abs_err")] for r in body]
    assert all(float(e) < 1e-6 for e in errs if e)
    # aggregate surplus has no closed form, only the numeric column
    assert [r[0] for r in body if not r[head.index("abs_err")]] == ["CS_agg"]
    code, out, _ = run("statics", LIN, "--param", "R")
    assert code == 0 and rows(out)[0][:2] == ["quantity", "full"]
    code, out, _ = run("policy", S0)
    head, body = rows(out)
    assert code == 0 and abs(float(body[0][0]) - 0.608626) < 1e-6
    assert run("policy", LIN)[0] == 2
    code, out, _ = run("curves", S0, "--points", "11")
    head, body = rows(out)
    assert code == 0 and head == ["series", "x", "y"]
    assert {r[0] for r in body} >= {"reaction_U", "reaction_L"}
    code, out, _ = run("dynamics", S0, "--p0", "1.5,2.0", "--dt", "0.05", "--steps", "400")
    head, body = rows(out)
    assert code == 0 and len(body) >= 2
    assert run("dynamics", S0, "--p0", "oops")[0] == 2
