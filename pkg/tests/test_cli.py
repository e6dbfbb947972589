"""Command-line interface: output shapes, exit codes, file handling,
and byte-stability.  Tests drive run() in-process; one subprocess test
covers the module entry point."""

import csv
import io
import json
import math
import subprocess
import sys

import pytest

import support
from toricmu import maximize_over_vectors
from toricmu.cli import run

E = math.e
TWO_PI = 2.0 * math.pi


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def report_dict(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["quantity", "value"]
    return {name: value for name, value in rows[1:]}


def test_integrate_square_csv(capsys):
    code, out = invoke(capsys, "integrate", "--polytope", "square")
    assert code == 0
    values = report_dict(out)
    assert float(values["interior_triangulation"]) == pytest.approx(1.0)
    assert float(values["boundary_triangulation"]) == pytest.approx(4.0)
    assert float(values["rel_gap"]) <= 1e-12


def test_integrate_json_shape(capsys):
    code, out = invoke(
        capsys, "integrate", "--polytope", "square", "--format", "json"
    )
    assert code == 0
    data = json.loads(out)
    assert data["columns"] == ["quantity", "value"]
    assert data["meta"]["method"] == "auto"
    assert all(isinstance(v, str) for row in data["rows"] for v in row)


def test_integrate_q_file_closed_form(capsys, tmp_path):
    qfile = tmp_path / "diag.json"
    qfile.write_text(json.dumps({"pieces": [{"eta": [1, 1], "lambda": 0}]}))
    x = 0.7
    code, out = invoke(
        capsys,
        "integrate",
        "--polytope",
        "blowup-delta:1",
        "--q",
        str(qfile),
        "--rho",
        str(x),
    )
    assert code == 0
    values = report_dict(out)
    interior = (math.exp(-2 * x) - 2 + (1 + x) * math.exp(x)) / (x * x)
    boundary = -(2 * math.exp(-2 * x) - (2 + x) * math.exp(x)) / x
    assert float(values["interior_triangulation"]) == pytest.approx(
        interior, rel=1e-10
    )
    assert float(values["interior_localization"]) == pytest.approx(
        interior, rel=1e-10
    )
    assert float(values["boundary_triangulation"]) == pytest.approx(
        boundary, rel=1e-10
    )


def test_entropy_curve_csv(capsys):
    code, out = invoke(
        capsys, "entropy", "--polytope", "cp1", "--grid=-1:1:5"
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == [
        "parameter",
        "numerator",
        "denominator",
        "mu",
        "sigma",
        "mu_lambda",
        "scaled",
    ]
    assert len(rows) == 6
    mid = dict(zip(rows[0], rows[3]))
    assert float(mid["parameter"]) == pytest.approx(0.0)
    assert float(mid["mu"]) == pytest.approx(-4 * math.pi, rel=1e-12)
    for row in rows[1:]:
        rec = dict(zip(rows[0], row))
        assert float(rec["scaled"]) == pytest.approx(
            -float(rec["mu"]) / TWO_PI, rel=1e-12
        )
        assert float(rec["mu_lambda"]) == pytest.approx(float(rec["mu"]), rel=1e-12)


def test_futaki_donaldson_vanishing(capsys, tmp_path):
    qfile = tmp_path / "eta.json"
    qfile.write_text(json.dumps({"pieces": [{"eta": [-1, 0], "lambda": 0}]}))
    code, out = invoke(
        capsys,
        "futaki",
        "--polytope",
        "donaldson",
        "--q",
        str(qfile),
        "--xi",
        "0,0",
    )
    assert code == 0
    values = report_dict(out)
    assert abs(float(values["futaki"])) <= 1e-8


def test_futaki_requires_q(capsys):
    code, _ = invoke(capsys, "futaki", "--polytope", "square", "--xi", "0,0")
    assert code == 2


def test_optimize_matches_library(capsys):
    code, out = invoke(capsys, "optimize", "--polytope", "blowup-delta:1")
    assert code == 0
    values = report_dict(out)
    res = maximize_over_vectors(support.blowup_polytope())
    assert float(values["value"]) == pytest.approx(res.value, rel=1e-9)
    xi = [float(c) for c in values["xi"].split(",")]
    assert xi[0] == pytest.approx(res.xi[0], abs=1e-6)
    assert xi[1] == pytest.approx(res.xi[1], abs=1e-6)
    assert values["status"] == "converged"


def test_calabi_square_qn(capsys):
    code, out = invoke(
        capsys, "calabi", "--polytope", "square", "--q", "square-qn:5"
    )
    assert code == 0
    values = report_dict(out)
    assert float(values["m_na"]) == pytest.approx(13.0 / 15.0, rel=1e-12)
    variance = 1.0 / 12.0 - 1.0 / 900.0
    assert float(values["variance"]) == pytest.approx(variance, rel=1e-12)
    assert float(values["c_na"]) == pytest.approx(
        -TWO_PI * 13.0 / 15.0 - variance / 2.0, rel=1e-12
    )


def test_dh_exact_rationals(capsys):
    code, out = invoke(
        capsys,
        "dh",
        "--polytope",
        "square",
        "--q",
        "const:1",
        "--grid=-2:0:3",
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["parameter", "cdf"]
    assert [r[1] for r in rows[1:]] == ["1", "1", "0"]


def test_dh_default_grid(capsys):
    code, out = invoke(capsys, "dh", "--polytope", "square", "--q", "zero")
    assert code == 0
    assert out.splitlines()[0] == "parameter,cdf"
    assert len(out.splitlines()) > 2


def test_metric_exp_and_p(capsys):
    code, out = invoke(
        capsys, "metric", "--polytope", "square", "--q", "const:1", "--p", "exp"
    )
    assert code == 0
    assert float(report_dict(out)["d_exp"]) == pytest.approx(
        1.0 / math.log(2.0), rel=1e-9
    )
    code, out = invoke(
        capsys, "metric", "--polytope", "square", "--q", "const:1", "--p", "2"
    )
    assert code == 0
    assert float(report_dict(out)["d_2"]) == pytest.approx(1.0, rel=1e-12)


def test_filtration_corner_rows(capsys):
    code, out = invoke(capsys, "filtration", "--case", "corner", "--m", "1,2,4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["m", "atoms", "total_mass", "exp_integral"]
    by_m = {r[0]: r for r in rows[1:]}
    assert by_m["1"][1] == "-1:1/2;0:1/2"
    assert by_m["2"][1] == "-1:1/3;0:2/3"
    assert by_m["4"][1] == "-1:1/5;0:4/5"
    assert by_m["2"][2] == "1"
    assert float(by_m["2"][3]) == pytest.approx((E + 2) / 3, rel=1e-12)


def test_filtration_estimate_meta(capsys):
    code, out = invoke(
        capsys,
        "filtration",
        "--case",
        "corner",
        "--m",
        "10,20,50,100,200",
        "--format",
        "json",
    )
    assert code == 0
    data = json.loads(out)
    est = float(data["meta"]["char_mu_estimate"])
    assert est == pytest.approx(-4 * math.pi * (E - 1), rel=1e-4)


def test_filtration_flat_exact_meta(capsys):
    code, out = invoke(
        capsys,
        "filtration",
        "--case",
        "corner-flat:2",
        "--m",
        "4,8,16",
        "--format",
        "json",
    )
    assert code == 0
    data = json.loads(out)
    exact = float(data["meta"]["char_mu_exact"])
    assert exact == pytest.approx(-2 * math.pi * (1 + E) * 2 / E, rel=1e-12)


@pytest.mark.parametrize(
    "case", ["blowup-delta:1", "donaldson", "square-qn:5", "corner", "cp1"]
)
def test_reproduce_cases_pass(capsys, case):
    code, out = invoke(capsys, "reproduce", case)
    assert code == 0
    assert out.strip()


def test_reproduce_nonunit_delta_routes(capsys):
    code, out = invoke(capsys, "reproduce", "blowup-delta:1/2")
    assert code == 0


def test_exit_code_2_on_bad_input(capsys):
    assert invoke(capsys, "integrate", "--polytope", "dodecahedron")[0] == 2
    assert invoke(capsys, "entropy", "--polytope", "square", "--grid", "oops")[0] == 2
    assert invoke(capsys, "reproduce", "unknown-case")[0] == 2
    assert (
        invoke(capsys, "calabi", "--polytope", "cp1", "--q", "square-qn:3")[0] == 2
    )
    assert invoke(capsys, "metric", "--polytope", "square", "--p", "0.5")[0] == 2


def test_exit_code_2_on_bad_q_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert invoke(capsys, "integrate", "--polytope", "square", "--q", str(bad))[0] == 2
    missing = tmp_path / "missing.json"
    assert (
        invoke(capsys, "integrate", "--polytope", "square", "--q", str(missing))[0]
        == 2
    )


def test_exit_code_3_on_failed_check(capsys, monkeypatch):
    import toricmu.cli as cli_mod

    monkeypatch.setattr(
        cli_mod, "_blowup_closed_interior", lambda x: 1.0 + math.exp(x)
    )
    code, _ = invoke(capsys, "reproduce", "blowup-delta:1")
    assert code == 3


def test_out_file_and_byte_stability(capsys, tmp_path):
    target = tmp_path / "curve.csv"
    args = (
        "entropy",
        "--polytope",
        "blowup-delta:1",
        "--grid=-1:1:9",
        "--out",
        str(target),
    )
    code, _ = invoke(capsys, *args)
    assert code == 0
    first = target.read_bytes()
    code, _ = invoke(capsys, *args)
    assert code == 0
    assert target.read_bytes() == first
    assert first.endswith(b"\n")
    assert b"\r" not in first


def test_stdout_byte_stability(capsys):
    argv = ("entropy", "--polytope", "donaldson", "--grid", "0:2:5")
    _, out1 = invoke(capsys, *argv)
    _, out2 = invoke(capsys, *argv)
    assert out1 == out2


def test_json_rationals_as_strings(capsys):
    code, out = invoke(
        capsys,
        "dh",
        "--polytope",
        "square",
        "--q",
        "const:1",
        "--grid=-2:-1:2",
        "--format",
        "json",
    )
    assert code == 0
    data = json.loads(out)
    flat = [v for row in data["rows"] for v in row]
    assert "1" in flat  # exact Fraction serialized without a decimal point


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "toricmu.cli", "integrate", "--polytope", "square"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("quantity,value")
