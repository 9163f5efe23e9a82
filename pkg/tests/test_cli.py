import csv
import io
import json
import math
import subprocess
import sys

import pytest

from minlength import cli
from minlength.errors import NoConvergence


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_algebra_three_dimensions():
    code, out, _ = run("verify-algebra", "--dim", "3")
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "ok"
    assert all(rel["status"] == "ok" for rep in data["reports"] for rel in rep["relations"])
    assert "betap" in data["weight_exponent"]


def test_verify_algebra_numeric_weight():
    code, out, _ = run("verify-algebra", "--dim", "3", "--beta", "0", "--beta-prime", "1/7", "--gamma", "0")
    assert code == 0
    assert json.loads(out)["weight_exponent"] == "5/2"


def test_verify_poincare():
    code, out, _ = run("verify-poincare", "--dim", "1")
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "ok"
    assert data["two_particle_difference"]["nonzero_components"] > 0


def test_spectrum_example_row():
    code, out, _ = run("spectrum", "--beta-tilde", "0.25", "--omega-tilde", "0.5", "--n-max", "10")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["n", "tau", "p0_tilde", "e_n", "E_over_mc2", "upper_bound_ratio"]
    row = next(r for r in table if r["n"] == "2" and r["tau"] == "1")
    # root-finding oracle value; the rounded figure 1.442220 agrees to 6 digits
    assert float(row["p0_tilde"]) == pytest.approx(1.4422205101855958, rel=1e-13)
    assert len(table) == 21


def test_spectrum_undeformed_column():
    code, out, _ = run("spectrum", "--beta-tilde", "0", "--omega-tilde", "1", "--n-max", "4", "--tau", "1")
    assert code == 0
    p0 = [float(r["p0_tilde"]) for r in rows(out)]
    expected = [1, math.sqrt(3), math.sqrt(5), math.sqrt(7), 3]
    assert p0 == pytest.approx(expected, rel=1e-14)


def test_spectrum_physical_units_and_json():
    code, out, _ = run("spectrum", "--mass", "2", "--c", "1", "--omega", "0.5", "--beta-physical", "0.05",
                       "--n-max", "2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["cfg"]["beta_tilde"] == pytest.approx(0.2)
    assert data["levels"][0]["E"] == pytest.approx(2.0)


def test_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, out, _ = run("residuals", "--beta-tilde", "0.2", "--omega-tilde", "0.7", "--n-max", "3",
                           "--detune", "0.01", "--format", "csv", "--output", str(path))
        assert code == 0
        assert "residuals" in out
    assert a.read_bytes() == b.read_bytes()


def test_fifteen_significant_digits():
    code, out, _ = run("spectrum", "--beta-tilde", "0.25", "--omega-tilde", "0.5", "--n-max", "2")
    value = rows(out)[3]["p0_tilde"]
    assert value == "%.15g" % float(value)
    assert value == "1.4422205101856"


def test_wavefunction_csv_and_metadata():
    code, out, err = run("wavefunction", "--beta-tilde", "0.2", "--omega-tilde", "0.5", "--n", "0",
                         "--samples", "11")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["p_tilde", "z", "psi1", "psi2"]
    assert len(table) == 11
    assert all(float(r["psi2"]) == 0 for r in table)
    meta = json.loads(err)
    assert meta["N2"] == 0 and meta["lambda"] == pytest.approx(10.0)


def test_wavefunction_rejects_zero_beta():
    code, _, err = run("wavefunction", "--beta-tilde", "0", "--omega-tilde", "0.5")
    assert code == 2
    assert "conventional" in err


def test_residuals_with_detuning():
    code, out, _ = run("residuals", "--beta-tilde", "0.2", "--omega-tilde", "0.7", "--n-max", "3",
                       "--detune", "0.01")
    assert code == 0
    data = json.loads(out)
    for row in data["levels"]:
        assert row["residual"] < 1e-10
        assert row["detuned_residual"] > 1e-3
        assert row["status"] == "ok"


def test_residuals_verification_failure():
    code, _, err = run("residuals", "--beta-tilde", "0.2", "--omega-tilde", "0.7", "--n-max", "1",
                       "--tolerance", "1e-30")
    assert code == 1
    assert "verification failed" in err


def test_uncertainty_report():
    code, out, _ = run("uncertainty", "--beta-tilde", "0.2", "--omega-tilde", "0.5")
    assert code == 0
    data = json.loads(out)
    for key in ("lhs", "rhs", "holds", "dx_min", "dx_abs_min", "hermiticity_defect"):
        assert key in data
    assert data["holds"] is True
    assert data["dx_min"] == pytest.approx(0.4)


def test_limits_report():
    code, out, _ = run("limits", "--beta-tilde", "0", "--omega-tilde", "0.5", "--n-max", "3")
    assert code == 0
    for row in json.loads(out)["levels"]:
        assert row["small_deformation"] == pytest.approx(row["exact"], rel=1e-14)


def test_ortho_report():
    code, out, _ = run("ortho-report", "--beta-tilde", "0.2", "--omega-tilde", "0.5", "--n-max", "1",
                       "--weight", "fm", "--tau", "1")
    assert code == 0
    data = json.loads(out)
    assert len(data["products"]) == 4
    assert "not orthogonal" in data["note"]


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--beta-tilde", "0.2"],
        ["spectrum", "--beta-tilde", "1.5", "--omega-tilde", "0.5"],
        ["spectrum", "--beta-tilde", "0.2", "--omega-tilde", "0.5", "--mass", "1"],
        ["spectrum", "--beta-tilde", "0.2", "--omega-tilde", "0.5", "--n-max", "-1"],
        ["uncertainty", "--beta-tilde", "0.2", "--omega-tilde", "0.5", "--n", "0", "--tau", "-1"],
        ["verify-algebra", "--dim", "5"],
        ["no-such-command"],
        ["spectrum", "--bogus"],
    ],
)
def test_usage_errors(argv):
    code, _, _ = run(*argv)
    assert code == 2


def test_no_convergence_exit_code(monkeypatch):
    def boom(*args, **kwargs):
        raise NoConvergence("panel budget exhausted", 1.0, 0.5)

    monkeypatch.setattr(cli.oscillator, "normalization_integral", boom)
    code, _, err = run("residuals", "--beta-tilde", "0.2", "--omega-tilde", "0.5", "--n-max", "0")
    assert code == 3
    detail = json.loads(err)
    assert detail["error"] == "no convergence" and detail["estimate"] == 1.0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minlength", "spectrum", "--beta-tilde", "0.25",
                           "--omega-tilde", "0.5", "--n-max", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("n,tau,p0_tilde")
