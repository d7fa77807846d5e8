"""CLI contract: subcommands, exit codes, deterministic outputs, figures."""

import json
import math

import numpy as np
import pytest

from capflow import cli

FLOW_CFG = {
    "n": 2, "theta": math.pi / 2, "flow_kind": "icf", "N_beta": 64,
    "t_max": 0.01, "monitor_cadence": 10, "initial": {"kind": "cap", "r": 1.0},
}


def write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def test_flow_outputs_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, FLOW_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["flow", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["flow", "--config", cfg, "--out", str(out2), "--seed", "0"]) == 0
    b1 = (out1 / "trace.csv").read_bytes()
    b2 = (out2 / "trace.csv").read_bytes()
    assert b1 == b2
    assert (out1 / "summary.json").exists()
    assert (out1 / "trace_monitors.png").exists()
    summary = json.loads((out1 / "summary.json").read_text())
    assert summary["stop_reason"] == "t_max"
    header = b1.decode().splitlines()
    assert header[0] == "# capflow-trace-v1"
    cols = header[1].split(",")
    assert cols[:10] == ["t", "W0", "W1", "W2", "W3", "maxF", "maxH", "Q",
                         "height_min", "height_max"]
    t = np.array([float(line.split(",")[0]) for line in header[2:]])
    assert np.all(np.diff(t) > 0)


def test_flow_json_format(tmp_path):
    cfg = write_cfg(tmp_path, FLOW_CFG)
    out = tmp_path / "j"
    assert cli.main(["flow", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    payload = json.loads((out / "trace.json").read_text())
    assert payload["schema"] == "capflow-trace-v1"
    assert len(payload["rows"][0]) == len(payload["columns"])


def test_flow_malformed_configs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["flow", "--config", str(bad), "--out", str(tmp_path / "x")]) == 3
    cfg = write_cfg(tmp_path, {**FLOW_CFG, "dt_safety": 0.0}, "zero.json")
    assert cli.main(["flow", "--config", cfg, "--out", str(tmp_path / "y")]) == 3
    cfg2 = write_cfg(tmp_path, {**FLOW_CFG, "bogus_key": 1}, "unk.json")
    assert cli.main(["flow", "--config", cfg2, "--out", str(tmp_path / "z")]) == 3
    cfg3 = write_cfg(tmp_path, {"theta": 1.0}, "missing.json")
    assert cli.main(["flow", "--config", cfg3, "--out", str(tmp_path / "w")]) == 3


def test_verify_exit_codes(tmp_path):
    out = tmp_path / "v"
    assert cli.main(["verify", "identities", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert all(r["verdict"] == "pass" for r in report)
    assert (out / "margins.png").exists()
    # deliberately corrupted quermass vector fixture -> exit 1
    cfg = write_cfg(tmp_path, {"af_main": {"fixtures": [
        {"kind": "values", "n": 3, "k": 1,
         "W": [0.3, 1.0471975511965976, 0.8, 0.2, 2.4]},
    ]}})
    assert cli.main(["verify", "af_main", "--config", cfg, "--out", str(out)]) == 1
    assert cli.main(["verify", "no_such_suite", "--out", str(out)]) == 3


def test_verify_af_main_flat_disk_fixture(tmp_path):
    out = tmp_path / "af"
    cfg = write_cfg(tmp_path, {"af_main": {"fixtures": [
        {"kind": "flat_disk_analytic", "n": 3, "k": 1},
    ]}})
    assert cli.main(["verify", "af_main", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert abs(report[0]["margin"]) <= 1e-8


def test_captable_outputs(tmp_path):
    out = tmp_path / "cap"
    rc = cli.main(["captable", "--theta", str(math.pi / 2), "--n", "2",
                   "--r-min", "0.5", "--r-max", "10", "--r-count", "12",
                   "--N-beta", "100", "--out", str(out)])
    assert rc == 0
    lines = (out / "captable.csv").read_text().strip().splitlines()
    assert lines[0] == "r,f_0,f_1,f_2"
    assert len(lines) == 14
    assert lines[-1].startswith("inf,")
    body = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:-1]])
    assert np.all(np.diff(body[:, 1:4], axis=0) > 0)  # monotone f_0..f_2
    # flat endpoint row matches the closed-form references
    from capflow import quermass
    ex = quermass.cap_quermass_exact(math.pi / 2, math.inf, 2)
    inf_vals = [float(x) for x in lines[-1].split(",")[1:]]
    assert inf_vals[0] == pytest.approx(ex.Wtheta[0], abs=1e-3)
    assert (out / "captable.png").exists()


def test_captable_bad_args(tmp_path):
    assert cli.main(["captable", "--theta", "1.0", "--n", "2", "--r-count", "0",
                     "--out", str(tmp_path / "c")]) == 3
    assert cli.main(["captable", "--theta", "3.0", "--n", "2",
                     "--out", str(tmp_path / "c")]) == 3
    assert cli.main(["captable", "--theta", "1.0", "--n", "2", "--r-min", "5.0",
                     "--r-max", "1.0", "--out", str(tmp_path / "c")]) == 3


def test_flow_numerical_failure_exit_code(tmp_path, monkeypatch):
    from capflow import flow

    cfg = write_cfg(tmp_path, FLOW_CFG)

    def fake_run(config):
        trace = flow.FlowTrace(config=config, columns=["t"], rows=[[0.0]],
                               step_t=np.zeros(1), step_maxF=np.ones(1),
                               step_maxH=np.ones(1), step_kappa_min=np.ones(1),
                               stop_reason="nonfinite")
        return trace

    monkeypatch.setattr(cli.flow, "run", fake_run)
    assert cli.main(["flow", "--config", cfg, "--out", str(tmp_path / "nf")]) == 2

    def raising_run(config):
        raise flow.FlowAborted("synthetic failure")

    monkeypatch.setattr(cli.flow, "run", raising_run)
    assert cli.main(["flow", "--config", cfg, "--out", str(tmp_path / "nf2")]) == 2
