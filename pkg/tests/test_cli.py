import json

import pytest

from netlewis import cli
from netlewis.experiment import read_records

TINY = ["--nodes", "5", "--edges", "6", "--schedule-size", "2", "--games-per-pairing", "32",
        "--eval-games", "20", "--eval-pairs", "2", "--seed", "0"]


def test_config_file_and_precedence(tmp_path):
    cfgfile = tmp_path / "c.txt"
    cfgfile.write_text("# demo\ntopology = er\nnodes = 12\n--games-per-pairing = 64\nseeds = 4, 5\n"
                       f"out-dir = {tmp_path / 'x'}\nlr = 0.5\n")
    args = cli.build_parser().parse_args(["run", "--config", str(cfgfile), "--nodes", "10"])
    config, out_dir = cli.config_from_args(args)
    assert config.topology == "er" and config.n_agents == 10
    assert config.games_per_pairing == 64 and config.seeds == (4, 5) and config.lr == 0.5
    assert out_dir == str(tmp_path / "x")


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("nodes 4\n")
    with pytest.raises(ValueError, match="key = value"):
        cli.read_config_file(bad)
    bad.write_text("colour = red\n")
    with pytest.raises(ValueError, match="unknown"):
        cli.read_config_file(bad)


def test_run_requires_out_dir():
    with pytest.raises(SystemExit):
        cli.main(["run"] + TINY)


def test_run_and_report(tmp_path, capsys):
    ba, rnd = tmp_path / "ba", tmp_path / "rnd"
    assert cli.main(["run", "--topology", "ba", "--out-dir", str(ba)] + TINY) == 0
    assert cli.main(["run", "--topology", "random", "--out-dir", str(rnd), "--no-eval"] + TINY) == 0
    assert len(read_records(ba / "records.csv")) == 2 * 32 + 2 * 20
    assert json.loads((ba / "manifest.json").read_text())["config"]["n_agents"] == 5

    out = tmp_path / "rep"
    assert cli.main(["report", str(ba), str(rnd), "--out", str(out), "--window", "8"]) == 0
    for name in ("ba-degree_train_curve.csv", "ba-degree_eval_curve.csv", "random_train_curve.csv",
                 "rewards_train.png", "rewards_eval.png", "ba-degree_agents.png", "random_agents.csv",
                 "summary.txt"):
        assert (out / name).stat().st_size > 0, name
    assert "[ba-degree] phase=train" in capsys.readouterr().out


def test_degrees(tmp_path):
    assert cli.main(["degrees", "--nodes", "60", "--edges", "120", "--out", str(tmp_path), "--dump"]) == 0
    for kind in ("er", "ws", "ba"):
        assert (tmp_path / f"{kind}_degrees.csv").read_text().startswith("degree,count\n")
        assert (tmp_path / f"{kind}_graph.txt").exists()
    assert (tmp_path / "degree_distributions.png").stat().st_size > 0
