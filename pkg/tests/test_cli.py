import json

from taptype.cli import main
from taptype.harness import study_decay


def test_simulate_writes_csv(tmp_path, capsys):
    rc = main(
        [
            "simulate",
            "--users", "2",
            "--words", "10",
            "--seed", "3",
            "--lexicon-top-n", "300",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    lines = (tmp_path / "sessions.csv").read_text().strip().splitlines()
    assert lines[0].startswith("user,words,avg_spatial_cost")
    assert len(lines) == 3


def test_experiment_from_config(tmp_path):
    cfg = study_decay(users=3, prompts=8, seed=2)
    cfg.lexicon_top_n = 300
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_document()))
    rc = main(["experiment", "--config", str(path), "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "report.csv").exists()


def test_sweep_runs_preset(tmp_path):
    rc = main(
        ["sweep", "--study", "covariance", "--users", "3", "--words", "8",
         "--seed", "4", "--out", str(tmp_path)]
    )
    assert rc == 0
    assert (tmp_path / "covariance" / "summary.txt").exists()


def test_plotdata(tmp_path):
    rc = main(["plotdata", "--words", "20", "--seed", "5", "--lexicon-top-n", "300",
               "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "touch_offsets.csv").exists()
    assert (tmp_path / "clusters.csv").exists()


def test_bad_config_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"arms": [], "control": "x"}))
    rc = main(["experiment", "--config", str(path), "--out", str(tmp_path)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
