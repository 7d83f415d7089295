import json

import numpy as np
import pytest

from qbound.cli import main, parse_matrix_text
from qbound.errors import ParseError
from qbound.operators import spin1_nine_set


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_json_matrix(path, m):
    m = np.asarray(m, dtype=complex)
    entries = [[float(z.real), float(z.imag)] for z in m.ravel()]
    path.write_text(json.dumps({"dim": len(m), "entries": entries}))
    return str(path)


def test_validate_state(tmp_path, capsys):
    ok = write_json_matrix(tmp_path / "mixed.json", np.eye(3) / 3)
    code, out, _ = run(capsys, "validate-state", ok)
    data = json.loads(out)
    assert code == 0 and data["valid"]
    assert np.allclose(data["S"], [1, 1 / 3, 1 / 27])
    bad = tmp_path / "bad.csv"
    bad.write_text("1.5,0\n0,-0.5\n")
    code, out, _ = run(capsys, "validate-state", str(bad))
    data = json.loads(out)
    assert code == 1 and data["S"][1] == pytest.approx(-0.75)


def test_parse_errors_carry_location(tmp_path, capsys):
    broken = tmp_path / "broken.csv"
    broken.write_text("1,0\n0,abc\n")
    code, _, err = run(capsys, "validate-state", str(broken))
    assert code == 2 and "line 2, column 2" in err
    with pytest.raises(ParseError) as info:
        parse_matrix_text('{"dim": 2,\n "entries": [1, }')
    assert info.value.line == 2
    code, _, _ = run(capsys, "validate-state", str(tmp_path / "missing.json"))
    assert code == 2
    code, _, _ = run(capsys, "no-such-command")
    assert code == 2


def test_membership_commands(capsys):
    code, out, _ = run(capsys, "membership", "--set", "fig1", "--point", "0.8,0.8")
    data = json.loads(out)
    assert code == 1 and data["verdict"] == "outside" and not data["closed_form"]["inside"]
    code, out, _ = run(capsys, "membership", "--set", "spin", "--two-j", "4", "--point", "0,0,2")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "boundary" and abs(data["margin"]) <= 1e-7
    code, out, _ = run(capsys, "membership", "--set", "spin", "--two-j", "4", "--point", "0,0,0")
    assert json.loads(out)["verdict"] == "inside"
    code, out, _ = run(capsys, "membership", "--set", "qubit-axes", "--dots", "0.5", "--point", "0.9,-0.9")
    data = json.loads(out)
    assert code == 1 and data["closed_form"]["inside"] is False
    code, _, err = run(capsys, "membership", "--set", "fig1", "--point", "1,2,3")
    assert code == 2 and "ArityMismatch" in err


def test_file_selector_round_trip(tmp_path, capsys):
    path = tmp_path / "ops.json"
    path.write_text(spin1_nine_set().subset([6, 7, 8]).to_json())
    point = "0.6666666666666666,0.6666666666666666,0.6666666666666666"
    code, out, _ = run(capsys, "membership", "--set", f"file:{path}", "--point", point)
    first = json.loads(out)
    code2, out2, _ = run(capsys, "membership", "--set", f"file:{path}", "--point", point)
    assert code == code2 == 0 and first == json.loads(out2)


def test_catalog_command(capsys):
    code, out, _ = run(capsys, "catalog", "--only", "spin1.std6")
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["reference_expr"] == "1 + 2 sqrt 2"
    assert "e" in data["deviation"]
    code, out, _ = run(capsys, "catalog", "--only", "sic.entropy", "--witnesses", "--format", "csv")
    header, row = out.strip().splitlines()
    assert code == 0 and "witness_angles" in header and ",4," in row
    code, out, _ = run(capsys, "catalog", "--list")
    assert "spin1.H" in out.split()
    code, _, _ = run(capsys, "catalog", "--only", "bogus")
    assert code == 2


def test_bound_command(capsys):
    code, out, _ = run(capsys, "bound", "--set", "qubit-axes", "--dots", "0.5", "--measure", "u_kappa", "--kappa", "2")
    assert code == 0 and json.loads(out)["computed"] == pytest.approx(1.75)
    code, out, _ = run(capsys, "bound", "--set", "spin", "--two-j", "2", "--measure", "var")
    assert json.loads(out)["computed"] == pytest.approx(1.0, abs=1e-9)


def test_qc_command(capsys):
    mixed = ",".join(["0"] * 6 + ["0.6666666666666666"] * 3)
    code, out, _ = run(capsys, "qc", "--set", "spin1-nine", "--values", mixed)
    data = json.loads(out)
    assert code == 0 and np.allclose(data["moments"], [1, 1 / 3, 1 / 9])
    code, out, _ = run(capsys, "qc", "--set", "mub", "--dim", "3", "--values", ",".join(["1,0,0"] * 4))
    assert code == 1 and json.loads(out)["quadratic"] == 4
    code, _, _ = run(capsys, "qc", "--set", "spin1-nine", "--values", "1,2")
    assert code == 2


def test_mub_command(tmp_path, capsys):
    ket0 = np.zeros((3, 3))
    ket0[0, 0] = 1
    path = write_json_matrix(tmp_path / "ket0.json", ket0)
    code, out, _ = run(capsys, "mub", "--dim", "3", "--state", path)
    data = json.loads(out)
    assert code == 0 and data["quadratic"] == pytest.approx(2.0)
    assert float(data["max_overlap_deviation"]) < 1e-10
    assert len(data["bases"]) == 4
    code, _, err = run(capsys, "mub", "--dim", "6")
    assert code == 2 and "NotPrime" in err


def test_region_command(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QBOUND_SEED", "3")
    prefix = tmp_path / "spin"
    code, out, _ = run(capsys, "region", "--set", "spin", "--two-j", "4", "--out", str(prefix),
                       "--directions", "50")
    assert code == 0
    rows = np.loadtxt(f"{prefix}_boundary.csv", delimiter=",", skiprows=1)
    assert rows.shape == (50, 7)
    assert np.allclose(np.linalg.norm(rows[:, 3:6], axis=1), 2.0)
    prefix = tmp_path / "fig1"
    code, _, _ = run(capsys, "region", "--set", "fig1", "--out", str(prefix), "--measure", "H",
                     "--bound", "0.3", "--resolution", "20", "--directions", "30")
    grid = np.loadtxt(f"{prefix}_grid.csv", delimiter=",", skiprows=1)
    assert code == 0 and grid.shape == (400, 4)
    code, _, err = run(capsys, "region", "--set", "spin1-nine", "--out", str(prefix))
    assert code == 2 and "TooManyOperators" in err
