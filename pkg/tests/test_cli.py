import json
import subprocess
import sys

import pytest

from ionmzi import cli
from ionmzi.protocols import ConsistencyError, teleport
from ionmzi.report import dumps, loads, report_to_json


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_teleport_example(capsys):
    code, out, _ = run(capsys, "teleport", "--alpha", "0.6", "--beta", "0.8")
    assert code == 0
    doc = json.loads(out)
    assert doc["herald_probability"] == pytest.approx(0.125, abs=1e-12)
    assert len(doc["outcomes"]) == 4
    assert all(o["fidelity_vs_target"] == pytest.approx(1, abs=1e-9) for o in doc["outcomes"])
    for key in ("schema_version", "protocol", "inputs", "total_success_probability", "failure_mass", "notes"):
        assert key in doc


def test_unnormalized_input_rejected(capsys):
    code, out, err = run(capsys, "teleport", "--alpha", "0.5", "--beta", "0.5")
    assert code == 2 and out == "" and "invalid input" in err


def test_normalize_flag_records_rescaling(capsys):
    code, out, _ = run(capsys, "teleport", "--alpha", "0.5", "--beta", "0.5", "--normalize")
    assert code == 0
    assert any("rescaled" in n for n in json.loads(out)["notes"])


def test_feasibility_example(capsys):
    code, out, _ = run(capsys, "feasibility", "--pcav", "0.01", "--eta", "0.7", "--xi", "1.0", "--rate", "1e6", "--a2", "0.7")
    assert code == 0
    assert json.loads(out)["results"]["pairs_per_second"] == pytest.approx(7.35, abs=1e-9)


def test_feasibility_cavity_model_notes_gamma(capsys):
    args = ["feasibility", "--fcav", "19000", "--length", "3mm", "--wavelength", "854nm", "--dipole", "1e-29"]
    args += ["--gamma-nc", "1.3e8", "--eta", "0.7", "--xi", "1", "--rate", "1e6", "--a2", "0.7"]
    code, out, _ = run(capsys, *args)
    doc = json.loads(out)
    assert code == 0
    assert doc["results"]["gamma_per_s"] == pytest.approx(6.61e7, rel=1e-3)
    assert 0 < doc["results"]["p_cav"] < 1
    assert any("does not reproduce" in n for n in doc["notes"])


def test_feasibility_config_file(tmp_path, capsys):
    cfg = tmp_path / "f.cfg"
    cfg.write_text("pcav = 0.01\neta = 0.7  # detector\nxi = 1\nrate = 1e6\na2 = 0.5\n")
    code, out, _ = run(capsys, "feasibility", "--config", str(cfg), "--a2", "0.7")
    assert code == 0
    assert json.loads(out)["results"]["pairs_per_second"] == pytest.approx(7.35, abs=1e-9)


def test_feasibility_missing_inputs(capsys):
    code, _, err = run(capsys, "feasibility", "--eta", "0.7", "--xi", "1", "--rate", "1e6", "--a2", "0.7")
    assert code == 2 and "--pcav" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        [],
        ["teleport", "--alpha", "zero", "--beta", "1"],
        ["rsp", "--a", "1", "--b", "0", "--mu", "1"],
        ["feasibility", "--length", "3 furlongs"],
    ],
)
def test_bad_arguments_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_concentrate_defaults_to_matched(capsys):
    code, out, _ = run(capsys, "concentrate", "--a", "0.8366600265340756", "--b", "0.5477225575051661")
    doc = json.loads(out)
    assert code == 0
    assert doc["total_success_probability"] == pytest.approx(0.105, abs=1e-12)
    assert doc["inputs"]["alpha"] == doc["inputs"]["a"]


def test_rsp_complex_input(capsys):
    code, out, _ = run(capsys, "rsp", "--a", "0.6", "--b", "0.8j", "--mu", "0.6", "--nu", "-0.8")
    assert code == 0
    doc = json.loads(out)
    assert doc["inputs"]["b"] == {"re": 0.0, "im": 0.8}


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "teleport", "--alpha", "1", "--beta", "0", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["protocol"] == "teleport"


def test_hidden_dense_engine(capsys):
    _, sparse, _ = run(capsys, "rsp", "--a", "0.6", "--b", "0.8", "--mu", "0.6", "--nu", "0.8")
    code, dense, _ = run(capsys, "rsp", "--a", "0.6", "--b", "0.8", "--mu", "0.6", "--nu", "0.8", "--engine", "dense")
    assert code == 0
    s, d = json.loads(sparse), json.loads(dense)
    assert d["header"]["engine"] == "dense"
    assert d["total_success_probability"] == pytest.approx(s["total_success_probability"], abs=1e-12)
    assert "--engine" not in cli.build_parser()._subparsers._group_actions[0].choices["rsp"].format_help()


def test_consistency_failure_exit_3(monkeypatch, capsys):
    def broken(report, tol=1e-9):
        raise ConsistencyError("budget")

    monkeypatch.setattr(cli, "check_report", broken)
    code, _, err = run(capsys, "teleport", "--alpha", "1", "--beta", "0")
    assert code == 3 and "consistency" in err


@pytest.mark.parametrize("alpha, beta", [(0.6, 0.8), (0.6j, -0.8), (1 / 3, (8 / 9) ** 0.5)])
def test_json_roundtrip(alpha, beta):
    r = teleport(alpha, beta)
    assert loads(dumps(report_to_json(r))) == r


def test_byte_identical_output(capsys):
    argv = ["concentrate", "--a", "0.6", "--b", "0.8", "--alpha", "0.8", "--beta", "0.6"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second


def test_sweep(tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("protocol = rsp\na2 = 0.3, 0.7\nmu2 = 0.2, 0.5, 0.9\n")
    serial = run(capsys, "sweep", "--config", str(cfg))
    parallel = run(capsys, "sweep", "--config", str(cfg), "--jobs", "2")
    assert serial[0] == parallel[0] == 0
    assert serial[1] == parallel[1]
    doc = json.loads(serial[1])
    assert doc["grid_keys"] == ["a2", "mu2"]
    assert [p["index"] for p in doc["points"]] == list(range(6))
    for p in doc["points"]:
        a2, mu2 = p["params"]["a2"]["re"], p["params"]["mu2"]["re"]
        want = 0.5 * a2 * (1 - a2) * (mu2**2 + (1 - mu2) ** 2)
        assert p["report"]["total_success_probability"] == pytest.approx(want, abs=1e-12)


def test_sweep_feasibility(tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("protocol = feasibility\npcav = 0.01\neta = 0.7\nxi = 1\nrate = 1e6\na2 = 0.1, 0.5, 0.9\n")
    code, out, _ = run(capsys, "sweep", "--config", str(cfg))
    rates = [p["report"]["results"]["pairs_per_second"] for p in json.loads(out)["points"]]
    assert code == 0
    assert rates[0] == pytest.approx(rates[2]) and rates[1] > rates[0]


@pytest.mark.parametrize(
    "text",
    ["a2 = 0.5\n", "protocol = dense-coding\n", "protocol = teleport\nalpha = 0.6\n", "protocol = teleport\nalpha = 0.5\nbeta = 0.5\n"],
)
def test_sweep_bad_config(tmp_path, text, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert run(capsys, "sweep", "--config", str(cfg))[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ionmzi", "teleport", "--alpha", "0.6", "--beta", "0.8"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["herald_probability"] == pytest.approx(0.125)
