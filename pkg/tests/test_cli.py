import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qwalk.analysis import SpectrumReport, SweepReport
from qwalk.cli import main, parse_angle
from qwalk.io import atomic_write, dumps_report, format_float, loads_report
from qwalk.trace import TransferTrace


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--output", str(out)])
    return code, out


def test_parse_angle():
    assert parse_angle("0.25") == 0.25
    assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
    assert parse_angle("pi/2N", 30) == pytest.approx(math.pi / 60)
    assert parse_angle("pi/(2*N)", 30) == pytest.approx(math.pi / 60)
    assert parse_angle("-2pi/3") == pytest.approx(-2 * math.pi / 3)
    for bad in ("__import__('os')", "pi/0", "N", "1;2"):
        with pytest.raises(ValueError):
            parse_angle(bad)


def test_format_float_round_trips():
    for x in (0.1, 1.0, -2.5e-300, 1 / 3, 1e16):
        s = format_float(x)
        assert float(s) == x
        assert any(c in s for c in ".e")


def test_report_json_is_canonical():
    a = dumps_report("x", {"b": 1, "a": 0.5}, {"z": [1.0, 2], "y": None}, "0")
    b = dumps_report("x", {"a": 0.5, "b": 1}, {"y": None, "z": [1.0, 2]}, "0")
    assert a == b
    doc = loads_report(a)
    assert list(doc) == ["data", "meta"]
    assert doc["meta"]["params"] == {"a": 0.5, "b": 1}


def test_atomic_write_leaves_no_temp(tmp_path):
    p = atomic_write(tmp_path / "sub" / "f.txt", "hello")
    assert p.read_text() == "hello"
    assert [x.name for x in p.parent.iterdir()] == ["f.txt"]


def test_simulate_csv(tmp_path):
    code, out = run(tmp_path, "simulate", "--n", "30", "--lambda", "0.03", "--steps", "120",
                    "--initial-coin", "right", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "p_source", "p_target", "p_rest", "coin_fidelity"]
    assert len(rows) == 1 + 121
    body = np.array(rows[1:], dtype=float)
    np.testing.assert_allclose(body[:, 1:4].sum(axis=1), 1, atol=1e-9)
    assert body[:, 2].max() > 0.99


def test_simulate_json_round_trip(tmp_path):
    code, out = run(tmp_path, "simulate", "--steps", "20", "--format", "json",
                    "--initial-coin", "custom", "--alpha", "0.6", "--beta", "0.8j")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["command"] == "simulate"
    tr = TransferTrace.from_dict(doc["data"])
    assert TransferTrace.from_dict(tr.to_dict()) == tr
    assert len(tr) == 21


def test_byte_identical_reruns(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for p in (a, b):
        assert main(["spectrum", "--n", "12", "--lambda", "0.1", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spectrum_json(tmp_path):
    code, out = run(tmp_path, "spectrum", "--n", "30", "--lambda", "0.03", "--format", "json")
    assert code == 0
    data = json.loads(out.read_text())["data"]
    assert len(data["phases"]) == 60
    assert set(data["class_sizes"]) == {2}
    rep = SpectrumReport.from_dict(data)
    assert rep.gap_at_zero > 0 and rep.gap_at_pi > 0


def test_sweep_csv(tmp_path):
    code, out = run(tmp_path, "sweep", "--n", "30", "--lambda-min", "0.005",
                    "--lambda-max", "5", "--points", "40", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 40
    f = np.array([float(r["peak_fidelity"]) for r in rows])
    lam = np.array([float(r["lambda"]) for r in rows])
    assert 0.05 < lam[np.argmin(f)] < 0.2


def test_sweep_json_round_trip(tmp_path):
    code, out = run(tmp_path, "sweep", "--points", "5", "--lambda-min", "0.05", "--lambda-max", "0.5",
                    "--format", "json")
    assert code == 0
    rep = SweepReport.from_dict(json.loads(out.read_text())["data"])
    assert SweepReport.from_dict(rep.to_dict()) == rep


def test_weakcoupling_epsilon_shorthand(tmp_path):
    code, out = run(tmp_path, "weakcoupling", "--n", "30", "--theta", "pi/4", "--epsilon", "pi/2N",
                    "--steps", "10")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["params"]["epsilon"] == pytest.approx(math.pi / 60)
    assert doc["data"]["top4_weight"] >= 0.95


def test_convert_and_grover_and_oracle(tmp_path):
    assert main(["convert", "--hopping", "0.5+0.5j,0.5", "--mode", "combined",
                 "-o", str(tmp_path / "c.json")]) == 0
    data = json.loads((tmp_path / "c.json").read_text())["data"]
    assert data["vector_potential_angles"][0] == pytest.approx(math.atan(0.5))
    assert main(["grover2d", "--side", "4", "-o", str(tmp_path / "g.json")]) == 0
    data = json.loads((tmp_path / "g.json").read_text())["data"]
    assert data["fraction_pm1"] > 0.5
    assert main(["oracle", "--n", "6", "--seed", "2", "-o", str(tmp_path / "o.json")]) == 0
    data = json.loads((tmp_path / "o.json").read_text())["data"]
    assert max(data["max_amplitude_deviation"]) < 1e-8


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("QWALK_OUTPUT_DIR", str(tmp_path))
    assert main(["grover2d", "--side", "2"]) == 0
    assert (tmp_path / "grover2d.json").exists()


@pytest.mark.parametrize("argv, flag", [
    (["simulate", "--source", "2"], "--source"),
    (["simulate", "--target", "30"], "--target"),
    (["simulate", "--n", "7"], "--n"),
    (["simulate", "--lambda", "-1"], "--lambda"),
    (["simulate", "--initial-coin", "custom", "--alpha", "1", "--beta", "1"], "--alpha"),
    (["weakcoupling", "--epsilon", "pi"], "--epsilon"),
    (["weakcoupling", "--epsilon", "banana"], "--epsilon"),
    (["sweep", "--points", "1"], "--points"),
    (["grover2d", "--side", "3"], "--side"),
    (["oracle", "--n", "15"], "--n"),
])
def test_validation_exit_code(argv, flag, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv + ["-o", "-"])
    assert exc.value.code == 2
    assert flag in capsys.readouterr().err


def test_numerical_failure_exit_code(monkeypatch, capsys):
    from qwalk import cli
    from qwalk.errors import EigensolverFailure

    def boom(*a, **k):
        raise EigensolverFailure("no convergence")

    monkeypatch.setattr(cli, "spectrum_report", boom)
    assert main(["spectrum", "-o", "-"]) == 1
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qwalk", "grover2d", "--side", "2", "-o", "-"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["meta"]["command"] == "grover2d"
