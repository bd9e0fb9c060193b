import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest

from embgame.cli import SWEEP_COLUMNS, main
from embgame.qcore import NumericalError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_ghz(capsys):
    code, out, _ = run(capsys, "eval", "--game", "ghz", "--strategy", "honest")
    assert code == 0
    data = json.loads(out)
    assert data["total"] == pytest.approx(1.0, abs=1e-10)
    assert data["schema_version"] == 1


def test_eval_structured_parts(capsys):
    code, out, _ = run(capsys, "eval", "--game", "main", "--strategy", "emb:4",
                       "--engine", "structured")
    assert code == 0
    parts = json.loads(out)["parts"]
    for tag in ("a", "b_i", "b_ii", "c"):
        assert parts[tag]["success"] == 1.0
    assert parts["d"]["success"] < 1


def test_eval_dimension_limit(capsys):
    code, _, err = run(capsys, "eval", "--game", "main", "--strategy", "emb:99999",
                       "--engine", "dense")
    assert code == 2
    assert "dense limit" in err


@pytest.mark.parametrize("argv", [
    ("eval", "--game", "ms", "--strategy", "emb:2"),
    ("eval", "--game", "main", "--strategy", "honest"),
    ("eval", "--game", "ghz", "--strategy", "bogus"),
    ("eval", "--game", "ghz", "--engine", "structured"),
    ("eval", "--game", "nope"),
    ("sweep", "--d-min", "3", "--d-max", "2"),
    ("bound", "--delta", "0.5"),
    ("stab", "--state", "ghz3"),
    ("eval", "--game", "ghz", "--strategy", "file:/nonexistent.json"),
])
def test_validation_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_resource_errors(capsys):
    assert run(capsys, "classical", "--game", "main")[0] == 3
    assert run(capsys, "bound", "--delta", "1e-12")[0] == 3


def test_numerical_error_exit(capsys, monkeypatch):
    import embgame.cli as cli

    def boom(*a, **k):
        raise NumericalError("tolerance breach")
    monkeypatch.setattr(cli, "value_structured", boom)
    code, _, err = run(capsys, "eval", "--game", "main", "--strategy", "emb:2",
                       "--engine", "structured")
    assert code == 4 and "tolerance" in err


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--d-min", "1", "--d-max", "3")
    assert code == 0
    assert out.endswith("\n")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == SWEEP_COLUMNS
    assert f"{float(rows[0]['overlap']):.6f}" == "0.707107"
    assert f"{float(rows[1]['overlap']):.6f}" == "0.853553"
    for r in rows:
        assert float(r["total_success"]) <= 1 and float(r["eps"]) >= 0
        assert float(r["d_times_eps"]) == pytest.approx(int(r["d"]) * float(r["eps"]), rel=1e-10)
    assert out.splitlines()[0] == ",".join(SWEEP_COLUMNS)


def test_sweep_dense_matches_structured(capsys):
    _, a, _ = run(capsys, "sweep", "--d-min", "1", "--d-max", "2", "--engine", "dense")
    _, b, _ = run(capsys, "sweep", "--d-min", "1", "--d-max", "2")
    assert a == b


def test_sweep_geometric(capsys):
    _, out, _ = run(capsys, "sweep", "--d-min", "4", "--d-max", "64", "--geometric")
    ds = [int(line.split(",")[0]) for line in out.splitlines()[1:]]
    assert ds == [4, 8, 16, 32, 64]


def test_classical(capsys):
    code, out, _ = run(capsys, "classical", "--game", "ghz", "--mode", "exact")
    data = json.loads(out)
    assert code == 0 and data["value"] == 0.75 and data["fraction"] == "3/4"


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--delta", "0.0001")
    data = json.loads(out)
    assert code == 0 and data["t_min"] == 11184811 and data["qubits_min"] == 24
    _, out, _ = run(capsys, "bound", "--t", "2")
    assert json.loads(out)["emb_bound"] == pytest.approx(0.009354, abs=1e-6)


def test_stab(capsys):
    _, out, _ = run(capsys, "stab", "--state", "ghz1")
    lines = out.splitlines()
    assert len(lines) == 8 and "-YYX" in lines
    _, out, _ = run(capsys, "stab", "--state", "ghz2")
    assert len(out.splitlines()) == 64


def test_seesaw_and_strategy_roundtrip(capsys, tmp_path):
    strat = tmp_path / "best.json"
    out = tmp_path / "seesaw.json"
    code, _, _ = run(capsys, "seesaw", "--game", "ghz", "--qubits", "1", "--restarts", "4",
                     "--seed", "0", "--out", str(out), "--strategy-out", str(strat))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["dims"] == [2, 2, 2] and len(data["trace"]) >= 2
    code, ev, _ = run(capsys, "eval", "--game", "ghz", "--strategy", f"file:{strat}")
    assert code == 0
    assert json.loads(ev)["total"] == pytest.approx(data["best"], abs=1e-9)
    man = json.loads((tmp_path / "seesaw.json.manifest.json").read_text())
    assert man["sha256"][str(strat)] == hashlib.sha256(strat.read_bytes()).hexdigest()


def test_outputs_are_byte_identical_with_manifest(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(capsys, "sweep", "--d-min", "1", "--d-max", "4", "--out", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert man["subcommand"] == "sweep"
    assert man["sha256"][str(paths[0])] == hashlib.sha256(paths[0].read_bytes()).hexdigest()
    assert {"flags", "seed", "version", "wall_clock_s", "schema_version"} <= set(man)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "embgame.cli", "stab", "--state", "ghz1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "+XXX" in res.stdout
    res = subprocess.run([sys.executable, "-m", "embgame.cli", "frobnicate"],
                         capture_output=True, text=True)
    assert res.returncode == 2
