import json
import math
import subprocess
import sys

import pytest

from lrperc.cli import ConfigError, main, parse_config, run, selftest_checks
from lrperc.montecarlo import read_csv


def test_happy_path():
    cfg = parse_config("density --n 500 --b 50 --profile gaussian --reps 50 --seed 42".split())
    assert cfg.subcommand == "density"
    assert (cfg.params["n"], cfg.params["b"], cfg.params["reps"], cfg.params["seed"]) == (500, 50.0, 50, 42)


def test_real_z_rejected_with_key_name():
    with pytest.raises(ConfigError, match="z must be non-real"):
        parse_config(["stats", "--n", "10", "--b", "3", "--z", "0,0"])


def test_file_then_flag_override(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# ensemble\nn = 500\nb = 50   # bandwidth\n")
    cfg = parse_config(["density", "--config", str(f), "--n", "800"])
    assert cfg.params["n"] == 800 and cfg.params["b"] == 50.0
    assert cfg.sources["n"] == "flag" and cfg.sources["b"] == "file"


@pytest.mark.parametrize("argv,key", [
    (["density", "--b", "3"], "'n'"),
    (["density", "--n", "x", "--b", "3"], "'n'"),
    (["density", "--n", "10", "--b", "30"], "b"),
    (["theory", "--z1", "0,4", "--z2", "0,-4", "--profile", "stable"], "profile"),
    (["correlation", "--n", "10", "--b", "3", "--z1", "0,1", "--z2", "0,-4"], "z1"),
    (["density", "--n", "10", "--b", "3", "--plot"], "out"),
])
def test_errors_name_the_key(argv, key):
    with pytest.raises(ConfigError) as info:
        parse_config(argv)
    assert key in str(info.value)


def test_unknown_file_key(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("n = 5\ncolour = blue\n")
    with pytest.raises(ConfigError, match="colour"):
        parse_config(["density", "--config", str(f), "--b", "2"])


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as info:
        parse_config(["density", "--colour", "blue"])
    assert info.value.code == 2


def test_theory_json(capsys):
    assert main(["theory", "--v", "1", "--z1", "0,4", "--z2", "0,-4", "--profile", "gaussian", "--dist", "gaussian", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    w1 = data["results"]["w1"]
    assert w1["re"] == 0.0
    assert w1["im"] == pytest.approx(0.236068, abs=1e-6)


def test_exponent_csv(tmp_path):
    prefix = tmp_path / "exp"
    assert main(["exponent", "--profile", "stable", "--nu", "1.5", "--lambda", "0", "--out", str(prefix), "--plot"]) == 0
    rows = read_csv(f"{prefix}.csv")
    assert len(rows) == 7 and all(r["nb_xi"] < 0 for r in rows)
    summary = json.loads((tmp_path / "exp.json").read_text())
    assert summary["results"]["slope"] == pytest.approx(-4 / 3, abs=0.05)
    assert (tmp_path / "exp_plot.py").exists()


def test_json_records_reproduction_data(tmp_path):
    prefix = tmp_path / "st"
    assert main(["stats", "--n", "10", "--b", "4", "--z", "0,4;1,-3", "--reps", "5", "--seed", "9", "--out", str(prefix)]) == 0
    s = json.loads((tmp_path / "st.json").read_text())
    assert {"version", "subcommand", "config", "seed", "workers", "wall_time"} <= set(s)
    assert s["config"]["z"] == [[0.0, 4.0], [1.0, -3.0]]
    rows = read_csv(f"{prefix}.csv")
    assert {"value_re", "value_im", "stderr", "R", "N", "b", "seed"} <= set(rows[0])


def test_cumulant_check_table(capsys):
    assert main(["cumulant-check", "--law", "rademacher", "--q", "1;3"]) == 0
    out = capsys.readouterr().out
    assert "x^3" in out


def test_selftest():
    checks = selftest_checks()
    assert len(checks) >= 8 and all(ok for _, ok, _ in checks)
    assert main(["selftest"]) == 0


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "lrperc", "selftest"], capture_output=True, text=True)
    assert done.returncode == 0, done.stderr


def test_runtime_error_exit_code(tmp_path):
    # an unwritable prefix is an I/O failure, reported with exit 1
    assert main(["theory", "--z1", "0,4", "--z2", "0,-4", "--out", str(tmp_path / "missing" / "x")]) == 1
