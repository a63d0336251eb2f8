import csv
import io
import json
import subprocess
import sys

import pytest

from tlcells.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_kl_identity(capsys):
    assert run(capsys, "kl", "e") == (0, "C'(e) = 1:0 * Tt(e)\n", "")


def test_fc_count(capsys):
    assert run(capsys, "fc", "--type", "A", "--rank", "3", "--count") == (0, "14\n", "")


def test_verify_d4_fails_with_witness(capsys):
    code, out, _ = run(capsys, "verify", "--type", "D", "--rank", "4", "--condition", "vi")
    assert code == 1
    assert "2.3.4.3.1.2.3" in out and "1.2.4.3" in out


def test_verify_b3_all_json(capsys):
    code, out, _ = run(capsys, "verify", "--type", "B", "--rank", "3", "--format", "json", "--threads", "3")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"command", "config", "results", "witnesses", "timings"}
    assert [r["condition"] for r in doc["results"]] == ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii"]
    assert all(r["holds"] for r in doc["results"])
    assert doc["witnesses"] == []
    assert json.loads(json.dumps(doc)) == doc


def test_csv_output(capsys):
    code, out, _ = run(capsys, "corollary-table", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    by = {r["graph"]: r for r in rows}
    assert by["D4"]["fc_union_of_two_sided_cells"] == "False"
    assert by["F4"]["fc_union_of_two_sided_cells"] == "True"
    assert all(r["agrees"] == "True" for r in rows)
    assert "H4" not in by


@pytest.mark.parametrize("argv", [
    ["kl", "1.2", "--type", "Q"],
    ["kl", "1.x"],
    ["kl", "7"],
    ["theta", "1.2.1", "--clprime", "--type", "E", "--rank", "8"],
    ["tl-mult", "1.2.1", "1", "--type", "A", "--rank", "2"],
    ["report-b-intersections", "--type", "A", "--rank", "3"],
])
def test_usage_errors_write_nothing(capsys, tmp_path, argv):
    target = tmp_path / "out.txt"
    code, out, err = run(capsys, *argv, "--output", str(target))
    assert code == 2
    assert out == "" and err.startswith("tlcells: error:")
    assert list(tmp_path.iterdir()) == []


def test_unknown_command_exit_code(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2


def test_output_file(capsys, tmp_path):
    target = tmp_path / "mu.txt"
    code, out, _ = run(capsys, "mu", "1.2", "1.2.1", "--output", str(target))
    assert code == 0 and out == ""
    assert target.read_text().strip().endswith("1")


def test_warm_and_cold_cache_agree(capsys, tmp_path):
    argv = ["verify", "--type", "B", "--rank", "3", "--cache-dir", str(tmp_path)]
    cold = run(capsys, *argv)
    klc = (tmp_path / "B3.klc").read_text()
    warm = run(capsys, *argv)
    assert cold == warm
    assert (tmp_path / "B3.klc").read_text() == klc
    cj = json.loads(run(capsys, *argv, "--format", "json")[1])
    wj = json.loads(run(capsys, *argv, "--format", "json")[1])
    assert cj["results"] == wj["results"]


def test_cache_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TLCELLS_CACHE_DIR", str(tmp_path))
    assert run(capsys, "kl", "1.2", "--type", "B", "--rank", "2")[0] == 0
    assert (tmp_path / "B2.klc").exists()


def test_other_commands(capsys):
    code, out, _ = run(capsys, "enumerate", "--type", "B", "--rank", "2", "--max-length", "1")
    assert code == 0 and out.splitlines() == ["0 e 0", "1 1 1", "2 2 1"]
    code, out, _ = run(capsys, "cells", "--side", "left")
    assert code == 0 and out.count("\n") == 4
    code, out, _ = run(capsys, "theta", "1.2.1", "--clprime")
    assert (code, out.split("=")[1].strip()) == (0, "0")
    code, out, _ = run(capsys, "tl-mult", "1", "2", "--basis", "b", "--type", "B", "--rank", "2")
    assert out == "b(1) * b(2) = 1:0 * b(1.2)\n"
    code, out, _ = run(capsys, "canonical", "--type", "B", "--rank", "2")
    assert code == 0 and out.splitlines()[0].startswith("e : e=1:0")
    code, out, _ = run(capsys, "report-b-intersections", "--type", "B", "--rank", "3", "--format", "json")
    assert code == 0 and json.loads(out)["results"]


def test_capacity_guard(capsys):
    code, _, err = run(capsys, "fc", "--type", "E", "--rank", "6", "--count")
    assert code == 2 and "long-run" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tlcells", "fc", "--count"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "5\n"
