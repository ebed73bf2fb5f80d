import json
import math
import subprocess
import sys

import pytest

from susyqc.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "k2.txt").write_text("2\n1 2\n")
    (tmp_path / "p3.txt").write_text("# path\n3\n1 2\n2 3\n")
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def result(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_build_hardcore_and_witten(workdir, capsys):
    doc = result(capsys, "build", "hardcore", "--graph", "k2.txt", "--out", "hc_k2.json")
    assert doc["result"]["projected_dim"] == 3
    assert doc["result"]["validation"]["passed"]
    assert doc["manifest"]["subcommand"] == "build hardcore"
    assert "k2.txt" in doc["manifest"]["inputs"]
    doc = result(capsys, "witten", "--model", "hc_k2.json")
    assert doc["result"] == {"witten_index": -1}


def test_build_syk(workdir, capsys):
    doc = result(capsys, "build", "syk", "--n", "3", "--q", "3", "--seed", "1")
    assert doc["result"]["validation"]["passed"]
    assert doc["result"]["model"]["labels"]["family"] == "syk"


def test_build_syk_even_q_rejected(workdir, capsys):
    code, out, err = run(capsys, "build", "syk", "--n", "4", "--q", "4")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "validation"


def test_build_syk_from_couplings(workdir, capsys):
    (workdir / "c.json").write_text(json.dumps({"N": 3, "q": 3, "couplings": [[[1, 2, 3], 1.0, 0.0]]}))
    doc = result(capsys, "build", "syk", "--n", "3", "--q", "3", "--couplings", "c.json")
    assert doc["result"]["validation"]["passed"]


def test_build_jordan(workdir, capsys):
    doc = result(capsys, "build", "jordan", "--partition", "2,0", "--out", "j.json")
    assert doc["result"]["labels"]["partition"] == [2, 2]
    doc = result(capsys, "spectrum", "--model", "j.json")
    assert doc["result"]["n_B"] + doc["result"]["n_F"] == 0


def test_build_ansatz_failure_exit_code(workdir, capsys):
    # B_1 = I, B_2 = n_1 (index 1 is |10>) is not nilpotent.
    ident = [[k, k, 1.0, 0.0] for k in range(4)]
    n1 = [[1, 1, 1.0, 0.0], [3, 3, 1.0, 0.0]]
    (workdir / "b.json").write_text(json.dumps({"N": 2, "B": [ident, n1]}))
    code, _, err = run(capsys, "build", "ansatz", "--b-ops", "b.json")
    assert code == 2
    assert "validation" in err


def test_validate_and_spectrum(workdir, capsys):
    assert result(capsys, "validate", "--graph", "p3.txt")["result"]["passed"]
    spec = result(capsys, "spectrum", "--graph", "p3.txt")["result"]
    assert spec["witten_index"] == -1
    assert spec["pairing_violations"] == []


def test_sykindex(workdir, capsys):
    doc = result(capsys, "sykindex", "--n", "3", "--q", "3", "--r", "1", "--compare-brute")["result"]
    assert doc["closed_form"]["im"] == pytest.approx(-3 * math.sqrt(3))
    assert doc["relative_difference"] <= 1e-9


def test_approx(workdir, capsys):
    doc = result(capsys, "approx", "--graph", "k2.txt", "--mu", "0", "--epsilon", "0.1",
                 "--confidence", "0.9", "--seed", "42")["result"]
    assert doc["shots"] == 2397
    assert abs(doc["z_hat"]["re"] + 0.25) <= 0.1
    assert doc["exact_z"]["re"] == pytest.approx(-0.25)


def test_hadamard_and_trace(workdir, capsys):
    doc = result(capsys, "hadamard", "--graph", "k2.txt", "--shots", "10000", "--seed", "3")["result"]
    assert doc["p0_exact"] == pytest.approx(1.0)
    assert doc["sample"]["p0_hat"] == 1.0
    doc = result(capsys, "trace", "--graph", "k2.txt", "--op", "identity",
                 "--normalization", "projected", "--shots", "100000", "--seed", "1")["result"]
    assert doc["p0_exact"] == pytest.approx(1 / 3)
    assert abs(doc["sample"]["p0_hat"] - 1 / 3) <= 3 * math.sqrt(2 / 9 / 1e5)


def test_trace_syk_symmetry(workdir, capsys):
    result(capsys, "build", "syk", "--n", "3", "--q", "3", "--seed", "1", "--out", "syk.json")
    doc = result(capsys, "trace", "--model", "syk.json", "--op", "zq:3:1")["result"]
    assert doc["p0_exact"] == pytest.approx(0.5)


def test_gwitten_and_correlator(workdir, capsys):
    doc = result(capsys, "gwitten", "--graph", "p3.txt", "--insert", "evolve:0.5@0", "--insert", "identity@0.2")
    assert doc["result"]["generalized_witten"]["re"] == pytest.approx(-1)
    doc = result(capsys, "correlator", "--graph", "k2.txt", "--insert", "hamiltonian@0.3")
    assert doc["result"]["average"]["re"] == pytest.approx(0, abs=1e-12)


def test_euler(workdir, capsys):
    doc = result(capsys, "euler", "--graph", "p3.txt")["result"]
    assert doc == {"euler_characteristic": -1, "independent_sets": 5}


def test_plain_output(workdir, capsys):
    for argv in (["--plain", "witten", "--graph", "k2.txt"], ["witten", "--graph", "k2.txt", "--plain"]):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        assert out.split() == ["witten_index", "-1"]


def test_usage_errors(workdir, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["witten", "--bogus"])
    assert exc.value.code == 1
    assert run(capsys, "witten")[0] == 1
    assert run(capsys, "witten", "--model", "missing.json")[0] == 1
    (workdir / "bad.txt").write_text("2\n1 1\n")
    code, _, err = run(capsys, "euler", "--graph", "bad.txt")
    assert code == 1
    assert "line 2" in err


def test_gwitten_bad_times(workdir, capsys):
    code, _, _ = run(capsys, "gwitten", "--graph", "k2.txt", "--insert", "identity@1", "--insert", "identity@0.5")
    assert code == 1


def test_hadamard_without_ground_states(workdir, capsys):
    result(capsys, "build", "jordan", "--partition", "2,0", "--out", "j.json")
    code, _, _ = run(capsys, "hadamard", "--model", "j.json")
    assert code == 2


def strip_duration(text):
    doc = json.loads(text)
    doc["manifest"].pop("duration_s")
    return doc


@pytest.mark.parametrize("argv", [
    ["approx", "--graph", "k2.txt", "--seed", "7"],
    ["trace", "--graph", "p3.txt", "--shots", "5000", "--seed", "2"],
    ["build", "syk", "--n", "4", "--q", "3", "--seed", "9"],
])
def test_byte_determinism(workdir, capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert strip_duration(first) == strip_duration(second)


def test_module_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "susyqc", "euler", "--graph", "k2.txt"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["euler_characteristic"] == -1
