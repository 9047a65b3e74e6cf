import json

import pytest

from airfed.cli import main
from airfed.config import SimConfig, parse_config
from airfed.records import read_jsonl, read_summary_csv

TINY = ["--set", "M=2", "--set", "T=3", "--set", "I=1", "--set", "K=1",
        "--set", "samples_per_device=20", "--set", "input_dim=2",
        "--set", "num_classes=2", "--set", "test_samples=30"]


def _run(tmp_path, name, extra=()):
    out = tmp_path / name
    code = main(["run", "--out", str(out), "--seed", "5", *TINY, *extra])
    assert code == 0
    return out


def test_run_writes_artifact_set(tmp_path, capsys):
    out = _run(tmp_path, "one")
    for artifact in ("config.txt", "rounds.jsonl", "summary.csv",
                     "diagnostics.json", "geometry.json"):
        assert (out / artifact).exists()

    echoed = parse_config(out / "config.txt")
    assert echoed.seed == 5 and echoed.M == 2 and echoed.T == 3
    assert echoed == parse_config(out / "config.txt", base=SimConfig())

    rounds = read_jsonl(out / "rounds.jsonl")
    assert [r["t"] for r in rounds] == [1, 2, 3]
    assert all(len(r["battery_after"]) == 2 for r in rounds)

    summary = read_summary_csv(out / "summary.csv")
    assert len(summary) == 3

    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["available"] is True
    assert "bound_value" in diag

    geometry = json.loads((out / "geometry.json").read_text())
    assert len(geometry["device_pos"]) == 2

    assert "final_accuracy=" in capsys.readouterr().out


def test_run_worker_count_is_invisible_in_output(tmp_path):
    a = _run(tmp_path, "w1", extra=("--workers", "1"))
    b = _run(tmp_path, "w8", extra=("--workers", "8"))
    assert (a / "rounds.jsonl").read_bytes() == (b / "rounds.jsonl").read_bytes()
    assert (a / "summary.csv").read_bytes() == (b / "summary.csv").read_bytes()


def test_run_config_file_layered_with_sets(tmp_path):
    cfg = tmp_path / "base.cfg"
    cfg.write_text("M = 2\nT = 2\nI = 1\nK = 1\nsamples_per_device = 20\n"
                   "input_dim = 2\nnum_classes = 2\ntest_samples = 30\n")
    out = tmp_path / "layered"
    code = main(["run", "--config", str(cfg), "--out", str(out),
                 "--set", "T=4", "--seed", "9"])
    assert code == 0
    echoed = parse_config(out / "config.txt")
    assert echoed.T == 4 and echoed.M == 2 and echoed.seed == 9


def test_run_rejects_bad_set(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path / "x"), "--set", "nope=1"]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["run", "--out", str(tmp_path / "x"), "--set", "gibberish"]) == 2
    assert main(["run", "--out", str(tmp_path / "x"), "--set", "M=0"]) == 2


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])


def test_sweep_runs_per_value(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main(["sweep", "--axis", "denoise", "--values", "fading,ideal",
                 "--out", str(out), "--seed", "5", *TINY])
    assert code == 0
    assert (out / "denoise=fading" / "summary.csv").exists()
    assert (out / "denoise=ideal" / "summary.csv").exists()
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "denoise,run_dir,final_accuracy,mean_participation,cumulative_energy"
    assert lines[1].startswith("fading,denoise=fading,")
    assert lines[2].startswith("ideal,denoise=ideal,")
    capsys.readouterr()


def test_sweep_sanitizes_unit_values(tmp_path):
    out = tmp_path / "psweep"
    code = main(["sweep", "--axis", "P_in", "--values", "off,10 dBm",
                 "--out", str(out), "--seed", "5", *TINY])
    assert code == 0
    assert (out / "P_in=off").is_dir()
    assert (out / "P_in=10_dBm").is_dir()


def test_sweep_rejects_bad_axis(tmp_path, capsys):
    code = main(["sweep", "--axis", "workers", "--values", "1,2",
                 "--out", str(tmp_path / "s")])
    assert code == 2
    assert "not sweepable" in capsys.readouterr().err
    code = main(["sweep", "--axis", "denoise", "--values", " , ",
                 "--out", str(tmp_path / "s")])
    assert code == 2


def test_report_compares_runs(tmp_path, capsys):
    a = _run(tmp_path, "a")
    b = _run(tmp_path, "b", extra=("--set", "denoise=ideal"))
    out = tmp_path / "rep"
    code = main(["report", str(a), str(b), "--out", str(out),
                 "--targets", "0.4,0.9"])
    assert code == 0
    assert (out / "comparison.csv").exists()
    assert (out / "energy_to_target.csv").exists()
    assert (out / "accuracy.png").exists()
    assert "final accuracy" in capsys.readouterr().out


def test_report_rejects_non_run_dir(tmp_path, capsys):
    (tmp_path / "junk").mkdir()
    code = main(["report", str(tmp_path / "junk"), "--out", str(tmp_path / "r")])
    assert code == 2
    assert "summary.csv" in capsys.readouterr().err
