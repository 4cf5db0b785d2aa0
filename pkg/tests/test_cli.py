import csv
import json
import subprocess
import sys

import pytest

from decoherence_rates.cli import main

QUBIT = {"type": "explicit", "d": 2, "omega": [[[1, 0], [0.6, 0]], [[0.6, 0], [1, 0]]]}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def config(tmp_path):
    return _write(tmp_path, "cfg.json", {"channel": QUBIT, "probe": {"type": "werner", "q": 0.9},
                                         "scheme": "swap", "shots": 2000, "seed": 5})


def _strip_wall_time(text):
    data = json.loads(text)
    data.pop("wall_time")
    return json.dumps(data, sort_keys=True, indent=2)


def test_run_to_stdout(config, capsys):
    assert main(["run", "--config", config]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["scheme"] == "swap"
    assert report["estimates"][0]["std_error"] > 0


def test_run_byte_identical(config, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", "--config", config, "--out", str(a)]) == 0
    assert main(["run", "--config", config, "--out", str(b)]) == 0
    assert _strip_wall_time(a.read_text()) == _strip_wall_time(b.read_text())


def test_run_subprocess(config, tmp_path):
    outs = []
    for name in ("x.json", "y.json"):
        out = tmp_path / name
        subprocess.run([sys.executable, "-m", "decoherence_rates", "run", "--config", config, "--out", str(out)],
                       check=True)
        outs.append(_strip_wall_time(out.read_text()))
    assert outs[0] == outs[1]


def test_exit_code_config_error(tmp_path):
    bad = _write(tmp_path, "bad.json", {"channel": QUBIT, "scheme": "swap", "shots": "exact", "probe":
                                        {"type": "werner", "q": 0.9}, "unexpected": 1})
    assert main(["run", "--config", bad]) == 2


def test_exit_code_missing_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.json")]) == 2


def test_exit_code_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["run", "--config", str(p)]) == 2


def test_exit_code_singular(tmp_path):
    cfg = _write(tmp_path, "sing.json", {"channel": QUBIT, "probe": {"type": "werner", "q": 0.75},
                                         "scheme": "swap", "shots": "exact"})
    assert main(["run", "--config", cfg]) == 3


def test_sweep_with_csv(tmp_path, capsys):
    cfg = _write(tmp_path, "s.json", {"channel": QUBIT, "probe": {"type": "werner", "q": 0.9},
                                      "scheme": "swap", "shots": "exact"})
    table = tmp_path / "t.csv"
    assert main(["sweep", "--config", cfg, "--param", "probe.q", "--values", "0.8,0.9,1.0",
                 "--csv", str(table)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [row["param_value"] for row in out["table"]] == [0.8, 0.9, 1.0]
    rows = list(csv.DictReader(table.open()))
    assert list(rows[0]) == ["param_value", "mean", "std_error", "estimate"]
    for row in rows:
        assert abs(float(row["estimate"]) - 0.36) <= 1e-10


def test_sweep_bad_path(config):
    assert main(["sweep", "--config", config, "--param", "probe.z", "--values", "1"]) == 2


def test_sweep_bad_values(config):
    assert main(["sweep", "--config", config, "--param", "probe.q", "--values", "a,b"]) == 2


def test_purity(tmp_path, capsys):
    eta = _write(tmp_path, "eta.json", {"eta": [0.9, 0.1]})
    assert main(["purity", "--eta", eta, "--shots", "100000", "--seed", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["purity_exact"] == pytest.approx(0.82)
    assert out["q_predicted"] == pytest.approx(0.91)
    assert abs(out["mean"] - 0.82) <= 5 * out["std_error"]


def test_purity_bare_list(tmp_path, capsys):
    eta = _write(tmp_path, "eta.json", [[0.5, 0.0], [0.0, 0.5]])
    assert main(["purity", "--eta", eta, "--shots", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["shots"] == 10


def test_purity_bad_shots(tmp_path):
    eta = _write(tmp_path, "eta.json", [1.0, 0.0])
    assert main(["purity", "--eta", eta, "--shots", "0"]) == 2


def test_twirl_check(tmp_path):
    out = tmp_path / "tc.json"
    assert main(["twirl-check", "--d", "3", "--samples", "20000", "--seed", "1", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["trace_distance_to_werner"] <= 0.02


def test_twirl_check_bad_args():
    assert main(["twirl-check", "--d", "1", "--samples", "10"]) == 2
