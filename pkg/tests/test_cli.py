import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hgm.cli import run
from hgm.geometry import elliptic_ap


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def call_json(capsys, *argv):
    code, out, err = call(capsys, *argv, "--json")
    assert code == 0, err
    data = json.loads(out)
    assert data["schema"] == "hgm/1"
    return data


def test_info(capsys):
    d = call_json(capsys, "info", "--param", "[-5,-2,3,4]")
    assert (d["n"], d["vol"], d["kappa"]) == (4, 7, 1)
    assert d["cyclotomic"] == "[3,4];[5]"


def test_euler_legendre(capsys):
    d = call_json(capsys, "euler", "--param", "[1,1];[2,2]", "--t", "2", "--p", "5")
    assert d["coeffs"] == [1, -elliptic_ap(Fraction(2), 5), 5]
    code, out, _ = call(capsys, "euler", "--param", "[1,1];[2,2]", "--t", "2", "--p", "5")
    assert code == 0 and out.startswith("1 + 2*x + 5*x^2")


def test_hodge(capsys):
    d = call_json(capsys, "hodge", "--param", "[-21,1,2,3,4,5,6]")
    assert d["hodge"] == [1, 2, 12, 2, 1] and d["weight"] == 4


def test_conductor_and_dirichlet(capsys):
    d = call_json(capsys, "conductor", "--param", "[1,1];[2,2]", "--t", "2")
    assert d["value"] == 32 and d["exact"]
    d = call_json(capsys, "dirichlet", "--param", "[1,1];[2,2]", "--t", "2", "--n", "12")
    assert d["dirichlet"][4] == elliptic_ap(Fraction(2), 5)


def test_monodromy_and_splice(capsys):
    d = call_json(capsys, "monodromy", "--param", "[1,1];[2,2]")
    assert d["kind"] == "symplectic"
    d = call_json(capsys, "splice", "--param", "[-12,-3,-2,1,1,1,6,8]")
    assert [[-12, -3, 1, 6, 8], [-2, 1, 1]] in d["splicings"]


def test_counting_commands(capsys):
    assert call_json(capsys, "mum", "--n", "5")["counts"] == [1, 1, 4, 4, 14, 14]
    d = call_json(capsys, "census", "--n", "3")
    assert [r["total"] for r in d["records"]] == [24, 12]
    assert d["dp_total"] == 24
    d = call_json(capsys, "trace", "--param", "[1,1];[2,2]", "--t", "2", "--q", "7")
    assert d["trace"] == elliptic_ap(Fraction(2), 7)


def test_export_to_file(capsys, tmp_path):
    out = tmp_path / "m.json"
    code, _, err = call(capsys, "export", "--param", "[1,1];[2,2]", "--t", "2", "--n", "20",
                        "--out", str(out))
    assert code == 0, err
    d = json.loads(out.read_text())
    assert {"param", "t", "weight", "hodge", "gamma_factors", "conductor",
            "euler_factors", "dirichlet"} <= set(d)


def test_satotate_writes_files(capsys, tmp_path):
    code, _, err = call(capsys, "satotate", "--param", "[1,1];[2,2]", "--t", "2",
                        "--p-max", "50", "--out-dir", str(tmp_path))
    assert code == 0, err
    assert (tmp_path / "satotate_histogram.tsv").exists()


def test_cache_round_trip(capsys, tmp_path):
    args = ("trace", "--param", "[1,1,1,1,1];[2,2,2,2,2]", "--t", "3", "--q", "7",
            "--cache-dir", str(tmp_path), "--json")
    first = call(capsys, *args)
    second = call(capsys, *args)
    assert first[0] == second[0] == 0 and first[1] == second[1]
    assert any(tmp_path.iterdir())
    assert call(capsys, "cache-compact", "--cache-dir", str(tmp_path))[0] == 0


def test_domain_error_exit_one(capsys):
    code, out, err = call(capsys, "info", "--param", "[1,0]")
    assert code == 1 and out == "" and "nonzero" in err
    code, _, err = call(capsys, "trace", "--param", "[1,1];[2,2]", "--t", "3", "--q", "3")
    assert code == 1 and err
    code, _, err = call(capsys, "trace", "--param", "[1,1];[2,2]", "--t", "3", "--q", "6")
    assert code == 1 and "prime power" in err


@pytest.mark.parametrize("argv", [
    ["info", "--bogus"],
    [],
    ["nosuchcommand"],
    ["census", "--mode", "weird", "--n", "3"],
])
def test_usage_error_exit_two(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2 and out == "" and err


def test_usage_error_lists_flags(capsys):
    _, _, err = call(capsys, "info", "--bogus")
    for flag in ("--param", "--t", "--json", "--cache-dir", "--threads", "--fixtures"):
        assert flag in err


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hgm.cli", "hodge", "--param",
                           "[-21,1,2,3,4,5,6]", "--json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["hodge"] == [1, 2, 12, 2, 1]
