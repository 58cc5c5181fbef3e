import csv
import json
import math
import subprocess
import sys

import pytest

from jumphedge.cli import main
from jumphedge.config import ConfigError, load_config


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_value_log(capsys):
    assert main(["value", "--payoff", "log"]) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert float(lines["value"]) == pytest.approx(4.6004804, abs=5e-8)
    assert float(lines["tail_bound"]) <= 1e-12
    assert int(lines["terms_used"]) > 0
    assert float(lines["delta"]) == pytest.approx(0.01, rel=1e-12)


def test_value_constant_within_certificate(capsys):
    assert main(["value", "--payoff", "const:5"]) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert abs(float(lines["value"]) - 5.0) <= float(lines["tail_bound"])


def test_value_call_has_no_delta_line(capsys):
    assert main(["value", "--payoff", "call:100"]) == 0
    out = capsys.readouterr().out
    assert "delta" not in out
    assert main(["value", "--payoff", "call:100", "--delta"]) == 3


@pytest.mark.parametrize("argv,code", [
    (["value", "--payoff", "bogus"], 1),
    (["value", "--sigma", "-0.1"], 1),
    (["simulate", "--strategy", "delta", "--payoff", "call:100", "--paths", "5"], 3),
    (["bms-demo", "--payoff", "call:100", "--paths", "5"], 3),
    # y^4 overflows on the lattice although the value itself is finite
    (["value", "--payoff", "power:4", "--lambda", "50", "--sigma", "0.5", "--horizon", "2"], 2),
    # x e^{-beta T} underflows to zero
    (["value", "--payoff", "power:4", "--lambda", "50", "--sigma", "0.5", "--horizon", "200"], 2),
])
def test_exit_codes(argv, code, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == code


def test_unknown_command_exit_status():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_config_file_and_unknown_key(tmp_path, capsys):
    good = tmp_path / "run.json"
    good.write_text(json.dumps({"payoff": "power:-1", "lambda": 1.0, "sigma": 0.1}))
    assert main(["value", "--config", str(good)]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert float(first.split()[1]) == pytest.approx(0.01 * math.exp(0.1 / 11), rel=1e-12)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"payof": "log"}))
    assert main(["value", "--config", str(bad)]) == 1


def test_flags_override_config(tmp_path):
    f = tmp_path / "run.json"
    f.write_text(json.dumps({"paths": 10, "seed": 3}))
    cfg = load_config(str(f), {"seed": 8})
    assert (cfg.paths, cfg.seed) == (10, 8)
    with pytest.raises(ConfigError):
        load_config(None, {"paths": "many"})


def test_path_report(tmp_path):
    assert main(["path-report", "--payoff", "log", "--grid", "8", "--seed", "5", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "path_report.csv")
    assert list(rows[0]) == ["t", "n_jumps", "stock", "wealth_repl", "wealth_delta", "value_fn"]
    assert float(rows[0]["t"]) == 0.0 and float(rows[-1]["t"]) == 1.0
    u0 = float(rows[0]["value_fn"])
    for r in rows:
        assert abs(float(r["wealth_repl"]) - float(r["value_fn"])) <= 1e-9
        expected = u0 + 0.1 * (int(r["n_jumps"]) - float(r["t"]))
        assert float(r["wealth_delta"]) == pytest.approx(expected, abs=1e-12)


def test_path_report_call_leaves_delta_empty(tmp_path):
    assert main(["path-report", "--payoff", "call:100", "--grid", "4", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "path_report.csv")
    assert all(r["wealth_delta"] == "" for r in rows)


def test_simulate_outputs_and_repeatability(tmp_path):
    argv = ["simulate", "--payoff", "log", "--strategy", "delta", "--paths", "3000",
            "--real-lambda", "2", "--seed", "4"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a), "--threads", "1"]) == 0
    assert main(argv + ["--out", str(b), "--threads", "2"]) == 0
    assert (a / "simulate.csv").read_bytes() == (b / "simulate.csv").read_bytes()
    assert (a / "simulate_meta.json").read_bytes() == (b / "simulate_meta.json").read_bytes()
    row = _rows(a / "simulate.csv")[0]
    assert int(row["n_paths"]) == 3000
    assert float(row["intensity_used"]) == 2.0
    meta = json.loads((a / "simulate_meta.json").read_text())
    assert meta["pricing_intensity"] == 1.0 and meta["sampling_intensity"] == 2.0
    assert meta["config"]["seed"] == 4


def test_suicide_demo_csv(tmp_path):
    assert main(["suicide-demo", "--x", "2", "--grid", "10", "--seed", "7", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "suicide.csv")
    assert list(rows[0]) == ["t", "n_jumps", "integrand", "suicide_wealth", "arbitrage_wealth"]
    assert float(rows[0]["suicide_wealth"]) == 2.0
    assert abs(float(rows[-1]["suicide_wealth"])) <= 1e-9 * 2
    assert float(rows[-1]["arbitrage_wealth"]) == pytest.approx(2.0, abs=1e-9)
    levels = [float(r["integrand"]) for r in rows]
    assert all(v > 0 for v in levels) and levels == sorted(levels)


def test_bms_demo(tmp_path):
    assert main(["bms-demo", "--paths", "2000", "--steps", "16,64,256", "--bms-grid", "1000",
                 "--out", str(tmp_path)]) == 0
    conv = _rows(tmp_path / "bms_convergence.csv")
    stds = [float(r["std"]) for r in conv]
    assert [int(r["n_steps"]) for r in conv] == [16, 64, 256]
    assert stds[0] > stds[1] > stds[2]
    hit = float(_rows(tmp_path / "bms_suicide.csv")[0]["hit_fraction"])
    assert 0.8 <= hit <= 1.0
    path = _rows(tmp_path / "bms_suicide_path.csv")
    assert len(path) == 1001 and all(float(r["stopped_value"]) >= 0 for r in path)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jumphedge", "value", "--payoff", "power:1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert float(proc.stdout.split()[1]) == pytest.approx(100.0, rel=1e-13)
