"""Command-line interface: schemas, exit codes, and reproducibility."""

import json
import subprocess
import sys

import pytest

from aoikit.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def data_rows(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")]


# ---------------------------------------------------------------- analyze


def test_analyze_stdout(capsys):
    code, out, _ = run_cli(
        ["analyze", "--policy", "nonpre", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--s-steps", "5", "--s-min", "-1", "--s-max", "0"],
        capsys,
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    rows = data_rows(out)
    assert rows[0] == "s,sBar,mgf_oracle,mgf_printed,relError"
    assert len(rows) == 1 + 5
    last = rows[-1].split(",")
    assert float(last[0]) == 0.0
    assert float(last[2]) == pytest.approx(1.0, abs=1e-10)
    assert float(last[3]) == pytest.approx(29.0 / 15.0, rel=1e-12)


def test_analyze_file_and_figure(tmp_path, capsys):
    out_path = tmp_path / "curve.csv"
    code, _, _ = run_cli(
        ["analyze", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--out", str(out_path)],
        capsys,
    )
    assert code == 0
    assert out_path.exists()
    png = out_path.with_suffix(".png")
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    # default grid: 101 points
    assert len(data_rows(out_path.read_text())) == 1 + 101


def test_analyze_no_plot(tmp_path, capsys):
    out_path = tmp_path / "curve.csv"
    code, _, _ = run_cli(
        ["analyze", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--out", str(out_path), "--no-plot"],
        capsys,
    )
    assert code == 0
    assert out_path.exists()
    assert not out_path.with_suffix(".png").exists()


def test_analyze_stdout_never_plots(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run_cli(
        ["analyze", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--s-steps", "3"],
        capsys,
    )
    assert code == 0
    assert len(data_rows(out)) == 1 + 3
    assert list(tmp_path.iterdir()) == []


def test_analyze_rerun_byte_identical(tmp_path, capsys):
    argv = ["analyze", "--policy", "nonpre", "--lambda1", "2", "--lambda2",
            "0.5", "--mu", "1", "--out", None]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for target in (a, b):
        argv[-1] = str(target)
        assert main(list(argv)) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".png").read_bytes() == b.with_suffix(".png").read_bytes()


def test_analyze_rejects_inadmissible_range(capsys):
    code, _, err = run_cli(
        ["analyze", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--s-max", "1.0"],
        capsys,
    )
    assert code == 1
    assert "s0" in err


# ---------------------------------------------------------------- moments


def test_moments_json(capsys):
    code, out, _ = run_cli(
        ["moments", "--policy", "nonpre", "--lambda1", "1", "--lambda2", "0",
         "--mu", "1"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["policy"] == "non-preemptive"
    result = payload["result"]
    assert result["mean"] == pytest.approx(2.5, rel=1e-12)
    assert result["second_moment"] == pytest.approx(9.0, rel=1e-6)
    assert result["variance"] == pytest.approx(2.75, rel=1e-5)
    assert result["source_of_truth"] == "oracle"


def test_moments_csv(capsys):
    code, out, _ = run_cli(
        ["moments", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--format", "csv"],
        capsys,
    )
    assert code == 0
    rows = data_rows(out)
    assert rows[0] == "mean,second_moment,variance,std_dev"
    mean = float(rows[1].split(",")[0])
    assert mean == pytest.approx(73.0 / 30.0, rel=1e-12)
    # .17g renders the full double
    assert "2.4333333333333331" in rows[1]


# ---------------------------------------------------------------- sweep


def test_sweep_default(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run_cli(["sweep", "--out", str(out_path)], capsys)
    assert code == 0
    rows = data_rows(out_path.read_text())
    header = rows[0].split(",")
    assert header == ["lambda1", "policy", "mean_oracle", "second_oracle",
                      "std_oracle", "mean_plus_std", "mean_minus_std"]
    assert len(rows) == 1 + 2 * 49
    assert out_path.with_suffix(".png").exists()
    for row in rows[1:]:
        parts = row.split(",")
        mean, std = float(parts[2]), float(parts[4])
        assert std > 0.0
        assert float(parts[5]) == pytest.approx(mean + std, rel=1e-12)
        assert float(parts[6]) == pytest.approx(mean - std, rel=1e-12)


def test_sweep_single_policy(capsys):
    code, out, _ = run_cli(["sweep", "--policy", "self", "--steps", "3"], capsys)
    assert code == 0
    rows = data_rows(out)
    assert len(rows) == 1 + 3
    assert all(r.split(",")[1] == "self-preemptive" for r in rows[1:])


# ---------------------------------------------------------------- simulate


def test_simulate_json(capsys):
    argv = ["simulate", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
            "--mu", "1", "--events", "50000", "--seed", "7",
            "--s-probe", "-0.5", "--s-probe", "0.1"]
    code, out, _ = run_cli(argv, capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == "aoikit.simulate/1"
    cfg = payload["config"]
    assert cfg["seed"] == 7
    assert cfg["horizon_events"] == 50000
    assert cfg["replications"] == 1
    assert cfg["s_probes"] == [-0.5, 0.1]
    assert payload["meta"]["generator"] == "PCG64"
    assert len(payload["mgf_estimates"]) == 2
    assert payload["mean_aoi"] > 0
    # byte-identical rerun
    code2, out2, _ = run_cli(argv, capsys)
    assert code2 == 0 and out2 == out


def test_simulate_csv(capsys):
    code, out, _ = run_cli(
        ["simulate", "--policy", "nonpre", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--events", "20000", "--format", "csv",
         "--s-probe", "0.1"],
        capsys,
    )
    assert code == 0
    rows = data_rows(out)
    assert rows[0] == "metric,s,estimate,standard_error"
    metrics = [r.split(",")[0] for r in rows[1:]]
    assert "mean_aoi" in metrics
    assert "second_moment_aoi" in metrics
    assert "mgf" in metrics


def test_simulate_rejects_probe_beyond_bound(capsys):
    code, _, err = run_cli(
        ["simulate", "--policy", "self", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1", "--s-probe", "5.0"],
        capsys,
    )
    assert code == 2
    assert "domain error" in err


# ---------------------------------------------------------------- validate


def test_validate_subcommand(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(
        ["validate", "--sim-events", "0", "--out", str(out_path)], capsys
    )
    assert code == 0
    assert "documented discrepancies" in out
    payload = json.loads(out_path.read_text())
    assert payload["schema"] == "aoikit.validation/1"
    assert payload["summary"][("FAIL")] == 0
    assert payload["summary"]["DOCUMENTED-DISCREPANCY"] > 0


# ---------------------------------------------------------------- errors


def test_exit_codes(capsys):
    # missing required argument
    code, _, _ = run_cli(["analyze", "--policy", "self"], capsys)
    assert code == 1
    # unknown policy token
    code, _, err = run_cli(
        ["moments", "--policy", "fifo", "--lambda1", "1", "--lambda2", "1",
         "--mu", "1"],
        capsys,
    )
    assert code == 1
    assert "parameter error" in err
    # invalid rate
    code, _, err = run_cli(
        ["moments", "--policy", "self", "--lambda1", "-1", "--lambda2", "1",
         "--mu", "1"],
        capsys,
    )
    assert code == 1
    assert "parameter error" in err


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_installed_script():
    proc = subprocess.run(
        ["aoikit", "moments", "--policy", "nonpre", "--lambda1", "1",
         "--lambda2", "0", "--mu", "1"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout)
    assert payload["result"]["mean"] == pytest.approx(2.5, rel=1e-12)
    assert sys.executable  # sanity: suite itself runs under an interpreter
