import csv
import json
import os

import pytest

from fracburgers import cli

RUN_CFG = """s = 0.45
eps1 = 1e-3
n = 128
domain_length = 16
dt = 0.01
t_end = {t_end}
output_every = 10
init.l2 = 1
"""


def write(path, text):
    path.write_text(text)
    return str(path)


def test_simulate_and_force(tmp_path, capsys):
    cfg = write(tmp_path / "a.cfg", RUN_CFG.format(t_end=0.5))
    out = str(tmp_path / "run")
    assert cli.main(["simulate", "--config", cfg, "--out", out]) == 0
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["status"] == "completed" and manifest["code_version"]
    assert manifest["outputs"] and all(os.path.exists(p) for p in manifest["outputs"])
    first = (tmp_path / "run" / "series.csv").read_bytes()
    assert cli.main(["simulate", "--config", cfg, "--out", out]) == 2
    assert "--force" in capsys.readouterr().err
    assert cli.main(["simulate", "--config", cfg, "--out", out, "--force"]) == 0
    assert (tmp_path / "run" / "series.csv").read_bytes() == first


def test_simulate_t_end_zero(tmp_path):
    cfg = write(tmp_path / "z.cfg", RUN_CFG.format(t_end=0))
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "z")]) == 0
    meta = json.loads((tmp_path / "z" / "metadata.json").read_text())
    assert meta["snapshot_times"] == [0.0]
    assert len(list((tmp_path / "z" / "snapshots").glob("*.bin"))) == 1


def test_simulate_blowup_is_exit_zero(tmp_path):
    text = ("s = 0.2\neps1 = 0\nn = 256\ndomain_length = 32\ndt = 1e-3\nt_end = 2\noutput_every = 100\n"
            "blowup_grad_fraction = 0.2\ninit = steep_shock\ninit.amplitude = 10\n")
    cfg = write(tmp_path / "b.cfg", text)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    assert json.loads((tmp_path / "b" / "manifest.json").read_text())["status"] == "blowup"


def test_env_default_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "root"))
    cfg = write(tmp_path / "e.cfg", RUN_CFG.format(t_end=0.1))
    assert cli.main(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "root" / "e" / "manifest.json").exists()


def test_validation_and_usage_codes(tmp_path, capsys):
    bad = write(tmp_path / "bad.cfg", "s = 0.45\nnope = 1\n")
    assert cli.main(["simulate", "--config", bad, "--out", str(tmp_path / "x")]) == 2
    assert "bad.cfg:2" in capsys.readouterr().err
    assert cli.main(["simulate"]) == 1
    assert cli.main([]) == 1
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["decay-check", str(tmp_path / "missing")]) == 2
    assert cli.main(["constants", "--rho", "0.01", "--out", str(tmp_path / "c")]) == 2


def test_decay_check_and_ladder(tmp_path):
    cfg = write(tmp_path / "a.cfg", RUN_CFG.format(t_end=1.0))
    run_dir = tmp_path / "run"
    assert cli.main(["simulate", "--config", cfg, "--out", str(run_dir)]) == 0
    assert cli.main(["decay-check", str(run_dir), "--tmin", "0.1"]) == 0
    summary = json.loads((run_dir / "reports" / "decay.json").read_text())
    assert summary["passed"] and summary["max_ratio"] < 1
    assert cli.main(["decay-check", str(run_dir)]) == 2  # refuses to overwrite
    assert cli.main(["ladder", str(run_dir), "--rho", "0.25", "--alpha", "0.1", "--center", "0,1",
                     "--r0", "1", "--kmax", "3"]) == 0
    with open(run_dir / "reports" / "ladder.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and rows[0]["k"] == "0"


def test_decay_violation_exit_three(tmp_path):
    # edit the stored series so that sup|theta| exceeds the bound
    cfg = write(tmp_path / "a.cfg", RUN_CFG.format(t_end=0.5))
    run_dir = tmp_path / "run"
    cli.main(["simulate", "--config", cfg, "--out", str(run_dir)])
    lines = (run_dir / "series.csv").read_text().splitlines()
    header = lines[0].split(",")
    j = header.index("sup_abs")
    last = lines[-1].split(",")
    last[j] = "100.0"
    lines[-1] = ",".join(last)
    (run_dir / "series.csv").write_text("\n".join(lines) + "\n")
    assert cli.main(["decay-check", str(run_dir)]) == 3


def test_constants_command(tmp_path):
    out = tmp_path / "c"
    assert cli.main(["constants", "--rho", "0.00125", "--out", str(out)]) == 0
    doc = json.loads((out / "certificate.json").read_text())
    assert doc["inputs"]["rho"] == 0.00125
    assert 1e-6 < doc["certificate"]["alpha1"] < 1e-3
    assert (out / "feasibility.csv").read_text().startswith("rho,alpha,c1,c2,c3")


def test_sweep_empty_and_deterministic(tmp_path):
    empty = write(tmp_path / "e.cfg", "n = 128\n")
    assert cli.main(["sweep", "--config", empty, "--out", str(tmp_path / "e")]) == 0
    assert (tmp_path / "e" / "summary.csv").read_text().strip() == ",".join(cli.SWEEP_COLUMNS)
    text = RUN_CFG.format(t_end=0.5) + "sweep.eps1 = 1e-2, 1e-3\nsweep.holder_times = 0.2, 0.5\n"
    cfg = write(tmp_path / "s.cfg", text)
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "s1"), "--threads", "2"]) == 0
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "s2")]) == 0
    a = (tmp_path / "s1" / "summary.csv").read_text()
    assert a == (tmp_path / "s2" / "summary.csv").read_text()
    assert len(a.strip().splitlines()) == 1 + 4
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "s1"), "--threads", "0"]) == 1
