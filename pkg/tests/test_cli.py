import json
from pathlib import Path

import pytest

from radonweights import systems
from radonweights.cli import main
from radonweights.specfile import (FIXTURE_DIR, SpecError, emit, parse_spec, parse_spec_data,
                                   spec_equal)

FIXTURES = sorted(p.stem for p in FIXTURE_DIR.glob("*.spec"))


def minimal_spec(**over):
    data = {"d": 3, "variables": ["t", "x1", "x2"], "mode": "submersions",
            "submersions": [["x1", "x2"], ["x1 - t", "x2 - t**2"]], "x0": ["0", "0", "0"]}
    data.update(over)
    return data


def test_parabola_fixture_matches_builder():
    spec = parse_spec("parabola")
    assert spec.k == 2 and spec.d == 3
    assert spec.system().fields == systems.parabola().fields


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip(name):
    spec = parse_spec(name)
    again = parse_spec_data(json.loads(json.dumps(emit(spec))))
    assert spec_equal(spec, again)


def test_triple_form_polynomials():
    data = minimal_spec(submersions=[[[[[0, 1, 0], 1, 1]], [[[0, 0, 1], 1, 1]]],
                                     ["x1 - t", [[[0, 0, 1], 1, 1], [[2, 0, 0], -1, 1]]]])
    assert parse_spec_data(data).system().fields == systems.parabola().fields


def test_k_below_two():
    with pytest.raises(SpecError) as err:
        parse_spec_data(minimal_spec(submersions=[["x1", "x2"]]))
    assert "k >= 2" in str(err.value)


def test_float_literal_named():
    with pytest.raises(SpecError) as err:
        parse_spec_data(minimal_spec(x0=["0", 0.5, "0"]))
    assert [i.path for i in err.value.issues] == ["x0[1]"]


def test_unknown_key_and_dimension():
    with pytest.raises(SpecError) as err:
        parse_spec_data(minimal_spec(colour="red", x0=["0", "0"]))
    paths = {i.path for i in err.value.issues}
    assert paths == {"colour", "x0"}


def test_float_in_expression():
    with pytest.raises(SpecError) as err:
        parse_spec_data(minimal_spec(submersions=[["x1", "x2"], ["x1 - 0.5*t", "x2"]]))
    assert err.value.issues[0].path == "submersions[1][0]"


def run_cli(tmp_path, *args):
    out = tmp_path / "out"
    code = main(list(args) + ["--out", str(out)])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, out, report


def test_polytope_command(tmp_path):
    code, out, rep = run_cli(tmp_path, "polytope", "parabola")
    assert code == 0
    assert [e["degree"] for e in rep["results"]["extremes"]] == [[2, 2]]
    assert (out / "tuples.csv").read_text().startswith("degree,tuple,lambda")
    assert json.loads((out / "timing.json").read_text())["polytope"] >= 0


def test_equivalence_remark(tmp_path):
    code, _, rep = run_cli(tmp_path, "equivalence", "--spec", str(FIXTURE_DIR / "remark.spec"))
    assert code == 0
    assert rep["results"]["targets"][0]["verdict"] == "non-extreme failure reproduced"


def test_separate_and_weight(tmp_path):
    code, _, rep = run_cli(tmp_path, "separate", "parabola")
    assert code == 0 and rep["results"]["separation"]["v0"] == ["1", "1"]
    code, out, rep = run_cli(tmp_path, "weight", "parabola")
    assert code == 0
    assert rep["results"]["rho"]["values"][0]["radicand"] == "2"
    assert rep["results"]["q"] == ["2/3", "2/3"]
    assert [v["admissible"] for v in rep["results"]["exponents"]] == [False, False]
    assert (out / "coefficients.csv").exists()


def test_invariance_commands(tmp_path):
    assert run_cli(tmp_path, "invariance", "parabola")[0] == 0
    code, _, rep = run_cli(tmp_path, "invariance", "cubic")
    assert code == 0
    assert not rep["results"]["pairs"][0]["minimal"]


def test_failing_expectation_exit_code(tmp_path):
    data = emit(parse_spec("parabola"))
    data["expect"] = {"extremes": [[1, 3]]}
    path = tmp_path / "bad.spec"
    path.write_text(json.dumps(data))
    code, out, rep = run_cli(tmp_path, "polytope", str(path))
    assert code == 1
    fails = json.loads((out / "failures.json").read_text())
    assert [f["name"] for f in fails] == ["expected extremes"]


def test_schema_error_exit_code(tmp_path, capsys):
    path = tmp_path / "k1.spec"
    path.write_text(json.dumps(minimal_spec(submersions=[["x1", "x2"]])))
    assert main(["polytope", str(path), "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["failures"][0]["name"] == "submersions"


def test_missing_requirement_exit_code(tmp_path):
    assert main(["optimality", "commuting3", "--out", str(tmp_path / "o")]) == 2


def test_deterministic_reports(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    main(["estimate", "parabola", "--out", str(a), "--seed", "3"])
    main(["estimate", "parabola", "--out", str(b), "--seed", "3"])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "sweep_rho.csv").read_bytes() == (b / "sweep_rho.csv").read_bytes()
    rep = json.loads((a / "report.json").read_text())
    assert rep["spec"]["seed"] == 3


def test_estimate_t4_flags(tmp_path):
    code, out, rep = run_cli(tmp_path, "estimate", "t4", "--jobs", "2")
    assert code == 0
    sweeps = rep["results"]["sweeps"]
    assert sweeps["unweighted"]["flag"] == "blowup"
    assert sweeps["rho"]["flag"] == "bounded"
    assert (out / "sweep_unweighted.csv").exists()


def test_stdout_report(capsys):
    assert main(["brackets", "parabola"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["subcommand"] == "brackets" and rep["ok"]
