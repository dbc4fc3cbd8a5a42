"""CLI surface: exit codes, artifact files, schemas, determinism."""

from pathlib import Path

import pytest

from thermsim.cli import main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

MINI_SIMULATE = """
[experiment]
scenario = simulate
seed = 5

[problem]
m = 2.0
kappa = 1.0
domain = 1.0
horizon = {horizon}

[initial]
family = bump
amplitude = 0.5

[grid]
cells = 16

[stepper]
dt = 0.05

[record]
count = {count}

[ensemble]
count = {members}
family = bump
amplitude_min = 0.2
amplitude_max = 0.8
"""


def write_config(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestSimulate:
    def test_zero_horizon_single_row_per_run(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.0, count=1, members=3))
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_rows(out / "trajectory.csv")
        assert len(rows) == 3
        assert [r["run_id"] for r in rows] == ["0", "1", "2"]
        assert all(r["step"] == "0" for r in rows)

    def test_artifacts_written(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.2, count=3, members=1))
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        for name in ("trajectory.csv", "constants.csv", "verdicts.csv",
                     "manifest.txt"):
            assert (out / name).exists()

    def test_schema_complete_and_column_order(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.2, count=3, members=2))
        out = tmp_path / "out"
        main(["simulate", "--config", cfg, "--out", str(out)])
        header, rows = read_rows(out / "trajectory.csv")
        assert header == ["run_id", "step", "time", "linf", "l1", "l2",
                          "lp_max", "w1m_seminorm", "energy_psi_star",
                          "dalpha_dt_l2", "nonlocal_coeff", "newton_iters",
                          "picard_iters", "r", "m"]
        for row in rows:
            for col, cell in row.items():
                assert cell.strip() != "", f"empty {col}"

    def test_rerun_byte_identical_csv(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.2, count=3, members=2))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--config", cfg, "--out", str(out1)])
        main(["simulate", "--config", cfg, "--out", str(out2)])
        for name in ("trajectory.csv", "constants.csv", "verdicts.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_jobs_do_not_change_output(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.2, count=3, members=3))
        out1, out2 = tmp_path / "j1", tmp_path / "j2"
        main(["simulate", "--config", cfg, "--out", str(out1), "--jobs", "1"])
        main(["simulate", "--config", cfg, "--out", str(out2), "--jobs", "2"])
        assert (out1 / "trajectory.csv").read_bytes() == \
            (out2 / "trajectory.csv").read_bytes()

    def test_2d_config_plumbing(self, tmp_path):
        cfg = write_config(tmp_path, """
[experiment]
scenario = simulate
seed = 0
[problem]
m = 2.0
kappa = 1.0
domain = 1.0,2.0
horizon = 0.0
[initial]
family = bump
amplitude = 0.5
[grid]
cells = 8,12
[record]
count = 1
""")
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_rows(out / "trajectory.csv")
        assert len(rows) == 1

    def test_seed_override_changes_ensemble(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.0, count=1, members=2))
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        main(["simulate", "--config", cfg, "--out", str(out1)])
        main(["simulate", "--config", cfg, "--out", str(out2), "--seed", "99"])
        assert (out1 / "trajectory.csv").read_text() != \
            (out2 / "trajectory.csv").read_text()


class TestExitCodes:
    def test_missing_config_is_config_error(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.ini"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_scenario_mismatch_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon=0.0, count=1, members=1))
        assert main(["verify", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_bad_value_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, MINI_SIMULATE.format(
            horizon="not_a_number", count=1, members=1))
        assert main(["simulate", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_failed_verdict_exits_one(self, tmp_path):
        cfg = write_config(tmp_path, """
[experiment]
scenario = reg-sweep
seed = 0
[problem]
m = 4.0
kappa = 10.0
domain = 1.0
horizon = 0.5
[initial]
family = bump
amplitude = 0.05
[grid]
cells = 16
[stepper]
dt = 0.05
newton_max_iters = 120
[record]
count = 6
[sweep]
r_values = 1e-1,1e-2
spread_tol = 0.0
""")
        out = tmp_path / "o"
        assert main(["reg-sweep", "--config", cfg, "--out", str(out)]) == 1
        header, rows = read_rows(out / "verdicts.csv")
        by_name = {r["check"]: r for r in rows}
        assert by_name["supnorm_spread"]["pass"] == "false"

    def test_cutoff_beyond_records_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, """
[experiment]
scenario = attractor
seed = 1
[problem]
m = 4.0
kappa = 1.0
domain = 1.0
horizon = 0.2
reg_r = 1e-2
[grid]
cells = 12
[stepper]
dt = 0.05
[record]
count = 3
[attractor]
count = 2
cutoff = 5.0
[ensemble_a]
family = bump
amplitude = 0.5
[ensemble_b]
family = constant
amplitude = 1.5
""")
        assert main(["attractor", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_step_failure_exits_three(self, tmp_path):
        cfg = write_config(tmp_path, """
[experiment]
scenario = simulate
seed = 0
[problem]
m = 4.0
kappa = 50.0
domain = 1.0
horizon = 1.0
reg_r = 1e-4
[material]
family = cubic-affine
linear = 1.0
cubic = 2.0
[initial]
family = bump
amplitude = 80.0
[grid]
cells = 32
[stepper]
dt = 0.5
newton_max_iters = 1
dt_halving_max = 0
[record]
count = 3
""")
        assert main(["simulate", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 3


class TestShippedConfigs:
    CONFIGS = ["simulate", "mms", "reg_sweep", "uniqueness", "absorbing",
               "attractor"]

    @pytest.mark.parametrize("name", CONFIGS)
    def test_shipped_config_passes(self, tmp_path, name):
        cfg = CONFIG_DIR / f"{name}.ini"
        scenario = name.replace("_", "-")
        out = tmp_path / "o"
        assert main([scenario, "--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_rows(out / "verdicts.csv")
        assert all(r["pass"] == "true" for r in rows)


class TestVerifyScenario:
    def test_shipped_defaults_pass(self, tmp_path):
        cfg = CONFIG_DIR / "verify.ini"
        out = tmp_path / "o"
        assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_rows(out / "verdicts.csv")
        assert rows and all(r["pass"] == "true" for r in rows)

    def test_small_verify_passes(self, tmp_path):
        cfg = write_config(tmp_path, """
[experiment]
scenario = verify
seed = 7
[verify]
tartar_samples = 5000
ghidaglia_draws = 25
""")
        out = tmp_path / "o"
        assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_rows(out / "verdicts.csv")
        assert all(r["pass"] == "true" for r in rows)
        names = {r["check"] for r in rows}
        assert "tartar_suite" in names
        assert "ghidaglia_domination" in names
        assert "legendre_identity_identity" in names


class TestMmsScenario:
    def test_small_mms_passes_and_writes_orders(self, tmp_path):
        cfg = write_config(tmp_path, """
[experiment]
scenario = mms
seed = 0
[problem]
horizon = 0.25
[mms]
levels = 3
fine_cells = 128
base_dt = 0.025
base_cells = 8
temporal_order_min = 0.8
spatial_order_min = 1.8
""")
        out = tmp_path / "o"
        assert main(["mms", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_rows(out / "mms_convergence.csv")
        assert header == ["axis", "level", "cells", "dt", "h", "l2_error",
                          "fitted_order"]
        assert len(rows) == 6
        errs = [float(r["l2_error"]) for r in rows if r["axis"] == "dt"]
        assert errs == sorted(errs, reverse=True)
