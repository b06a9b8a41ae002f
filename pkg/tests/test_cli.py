import json
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
FIXTURE = REPO / "configs" / "main_fixture.toml"
COCYCLES = REPO / "configs" / "cocycles_two_level.toml"


def run_cli(*args, timeout=900):
    return subprocess.run(
        [sys.executable, "-m", "accelsum.cli", *args],
        capture_output=True, text=True, timeout=timeout,
    )


def test_missing_spec_file_exits_2(tmp_path):
    res = run_cli("solve", "--spec", str(tmp_path / "nope.toml"))
    assert res.returncode == 2


def test_unknown_suite_exits_2():
    res = run_cli("verify", "--suite", "nonsense")
    assert res.returncode == 2
    assert "usage error" in res.stderr


def test_verify_recursion_suite_passes():
    res = run_cli("verify", "--suite", "recursion", "--spec", str(FIXTURE))
    assert res.returncode == 0, res.stdout + res.stderr
    assert "pass" in res.stdout
    assert "FAIL" not in res.stdout


def test_kernel_command_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    r1 = run_cli("kernel", "--k", "1", "--ktilde", "2",
                 "--ratios", "0.5..2.0:9", "--out", str(out1))
    r2 = run_cli("kernel", "--k", "1", "--ktilde", "2",
                 "--ratios", "0.5..2.0:9", "--out", str(out2))
    assert r1.returncode == 0 and r2.returncode == 0
    assert (out1 / "kernel.csv").read_bytes() == (out2 / "kernel.csv").read_bytes()
    summary = json.loads((out1 / "summary.json").read_text())
    assert abs(summary["fit"]["exponent"] - 2.0) < 0.1


def test_kernel_bad_ratio_syntax_exits_2(tmp_path):
    res = run_cli("kernel", "--ratios", "junk", "--out", str(tmp_path))
    assert res.returncode == 2


def test_rs_command_passes(tmp_path):
    res = run_cli("rs", "--cocycles", str(COCYCLES), "--out", str(tmp_path))
    assert res.returncode == 0, res.stdout + res.stderr
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["telescoping_max"] < 1e-6
    assert summary["level1_check"]["ok"] and summary["level2_check"]["ok"]
    csv = (tmp_path / "rs_telescoping.csv").read_text().splitlines()
    assert csv[0] == "overlap,gap"
    assert len(csv) == 5


def test_solve_command_writes_outputs(tmp_path):
    res = run_cli("solve", "--spec", str(FIXTURE), "--eps", "0.05",
                  "--out", str(tmp_path))
    assert res.returncode == 0, res.stdout + res.stderr
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert "main_k2" in summary["reports"]
    assert (tmp_path / "omega_k2_center.csv").exists()


def test_sum_command(tmp_path):
    res = run_cli("sum", "--spec", str(FIXTURE), "--eps", "0.05",
                  "--t", "0.1", "--z", "0.2", "--out", str(tmp_path))
    assert res.returncode == 0, res.stdout + res.stderr
    rows = (tmp_path / "sum_samples.csv").read_text().splitlines()
    assert rows[0] == "t,u,f"
    assert len(rows) == 9


def test_geometry_command(tmp_path):
    res = run_cli("geometry", "--spec", str(FIXTURE), "--out", str(tmp_path))
    assert res.returncode == 0, res.stdout + res.stderr
    plan = json.loads((tmp_path / "sector_plan.json").read_text())
    assert len(plan["directions"]) == 4
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["constants"]["M1"] > 0


def test_flatness_threads_deterministic(tmp_path):
    """Thread count must not change any output byte (pair 0, short grid)."""
    out1 = tmp_path / "t1"
    out2 = tmp_path / "t2"
    r1 = run_cli("flatness", "--spec", str(FIXTURE), "--pairs", "0",
                 "--points", "10", "--threads", "1", "--out", str(out1),
                 timeout=1200)
    r2 = run_cli("flatness", "--spec", str(FIXTURE), "--pairs", "0",
                 "--points", "10", "--threads", "3", "--out", str(out2),
                 timeout=1200)
    assert r1.returncode == 0, r1.stdout + r1.stderr
    assert r2.returncode == 0, r2.stdout + r2.stderr
    assert (out1 / "flatness.csv").read_bytes() == (out2 / "flatness.csv").read_bytes()


def test_json_config_variant(tmp_path):
    """The loader accepts the same schema as JSON."""
    import tomli

    raw = tomli.loads(FIXTURE.read_text())
    json_path = tmp_path / "fixture.json"
    json_path.write_text(json.dumps(raw))
    from accelsum.config import load_problem
    from accelsum.cauchy import validate_constraints

    spec = load_problem(json_path)
    assert validate_constraints(spec)["ok"]


def test_threads_env_fallback(monkeypatch):
    from accelsum.cli import _threads

    monkeypatch.setenv("ACCELSUM_THREADS", "5")
    assert _threads(None) == 5
    assert _threads(2) == 2
    monkeypatch.delenv("ACCELSUM_THREADS")
    assert _threads(None) == 1
