"""Tests for the command-line interface: exit codes, outputs, overrides."""

import json

import pytest

from kellypool.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestQuote:
    def test_reference_quote(self, capsys):
        code, out, _ = run_cli(
            capsys, "quote", "--q", "0.4", "--amount", "800", "--liquidity", "1800", "--premium", "0"
        )
        assert code == 0
        assert "f: 0.4444" in out
        assert "b: 0.3789" in out
        assert "premium: 303.16" in out

    def test_small_share_small_premium(self, capsys):
        code, out, _ = run_cli(
            capsys, "quote", "--q", "0.05", "--amount", "100", "--liquidity", "10000"
        )
        assert code == 0
        assert "premium: 0.26" in out

    def test_unpriceable_invoice_exits_2(self, capsys):
        code, _, err = run_cli(
            capsys, "quote", "--q", "0.6", "--amount", "700", "--liquidity", "300"
        )
        assert code == 2
        assert "no positive premium" in err

    def test_bad_share_exits_2(self, capsys):
        code, _, err = run_cli(
            capsys, "quote", "--q", "1.2", "--amount", "100", "--liquidity", "1000"
        )
        assert code == 2

    def test_empty_pool_exits_2(self, capsys):
        code, _, err = run_cli(
            capsys, "quote", "--q", "0.2", "--amount", "100", "--liquidity", "0"
        )
        assert code == 2


class TestSimulate:
    def test_preset_run_writes_bundle(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "simulate", "--scenario", "5.1", "--sims", "3", "--seed", "42",
            "--withdraw-period", "30", "--out", str(tmp_path), "--jobs", "1",
        )
        assert code == 0
        cell = tmp_path / "5.1_p30"
        for name in (
            "metrics.json", "metrics.csv", "config.json",
            "timeseries_no_withdrawal.csv", "timeseries_withdrawal.csv",
            "runs_no_withdrawal.csv", "runs_withdrawal.csv",
        ):
            assert (cell / name).exists()
        assert "pct_accepted" in out
        record = json.loads((cell / "metrics.json").read_text())
        assert record["config"]["seed"] == 42
        assert record["config"]["n_simulations"] == 3

    def test_unknown_scenario_exits_2(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "simulate", "--scenario", "nope", "--out", str(tmp_path))
        assert code == 2
        assert "unknown scenario" in err

    def test_needs_exactly_one_source(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "simulate", "--out", str(tmp_path))
        assert code == 2
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"n_invoices": 5, "n_simulations": 2}))
        code, _, err = run_cli(
            capsys, "simulate", "--scenario", "5.3", "--config", str(config_path),
            "--out", str(tmp_path),
        )
        assert code == 2

    def test_config_file_with_override(self, capsys, tmp_path):
        config_path = tmp_path / "my.json"
        config_path.write_text(
            json.dumps({"scenario_id": "mine", "n_invoices": 10, "n_simulations": 2, "seed": 1})
        )
        code, _, _ = run_cli(
            capsys, "simulate", "--config", str(config_path), "--sims", "4",
            "--out", str(tmp_path), "--jobs", "1",
        )
        assert code == 0
        snapshot = json.loads((tmp_path / "mine_p30" / "config.json").read_text())
        assert snapshot["config"]["n_simulations"] == 4
        assert snapshot["config"]["n_invoices"] == 10

    def test_bad_config_file_exits_2(self, capsys, tmp_path):
        config_path = tmp_path / "bad.json"
        config_path.write_text(json.dumps({"n_invoices": 5, "bogus_field": 1}))
        code, _, err = run_cli(capsys, "simulate", "--config", str(config_path), "--out", str(tmp_path))
        assert code == 2
        assert "unknown config fields" in err

    def test_single_policy_run(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "simulate", "--scenario", "5.3", "--sims", "2", "--policy", "without",
            "--out", str(tmp_path), "--jobs", "1",
        )
        assert code == 0
        cell = tmp_path / "5.3_p30"
        assert (cell / "timeseries_no_withdrawal.csv").exists()
        assert not (cell / "timeseries_withdrawal.csv").exists()
        record = json.loads((cell / "metrics.json").read_text())
        assert record["policies"] == ["no_withdrawal"]

    def test_json_only_format(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "simulate", "--scenario", "5.3", "--sims", "2", "--format", "json",
            "--out", str(tmp_path), "--jobs", "1",
        )
        assert code == 0
        assert not (tmp_path / "5.3_p30" / "metrics.csv").exists()

    def test_unwritable_output_exits_3(self, capsys, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory")
        code, _, err = run_cli(
            capsys, "simulate", "--scenario", "5.3", "--sims", "1",
            "--out", str(blocker / "sub"), "--jobs", "1",
        )
        assert code == 3
        assert "I/O error" in err

    def test_bad_period_rejected_by_parser(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate", "--scenario", "5.3", "--withdraw-period", "7"])
        assert excinfo.value.code == 2


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    code = main(["sweep", "--sims", "2", "--out", str(out), "--jobs", "1", "--seed", "3"])
    assert code == 0
    return out


class TestSweep:
    def test_covers_grid(self, sweep_dir, capsys):
        cells = [p for p in sweep_dir.iterdir() if p.is_dir()]
        assert len(cells) == 75  # 25 scenarios x 3 periods
        for period in (1, 30, 90):
            assert (sweep_dir / f"2.3_p{period}" / "metrics.json").exists()

    def test_diff_report_written(self, sweep_dir, capsys):
        lines = (sweep_dir / "diff_report.csv").read_text().splitlines()
        assert lines[1].startswith("scenario_id,withdrawal_period_days")
        assert len(lines) == 2 + 75

    def test_rerun_skips_completed_cells(self, sweep_dir, capsys):
        code = main(["sweep", "--sims", "2", "--out", str(sweep_dir), "--jobs", "1", "--seed", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("skipping") == 75

    def test_resume_completes_missing_cells(self, sweep_dir, capsys, tmp_path):
        # wipe one cell and resume: only that cell is recomputed
        import shutil

        target = sweep_dir / "4.1_p90"
        shutil.rmtree(target)
        code = main(["sweep", "--sims", "2", "--out", str(sweep_dir), "--jobs", "1", "--seed", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("skipping") == 74
        assert (target / "metrics.json").exists()

    def test_period_is_not_a_sweep_flag(self, capsys, tmp_path):
        # the sweep iterates all withdrawal periods itself
        with pytest.raises(SystemExit) as excinfo:
            main(["sweep", "--withdraw-period", "30", "--out", str(tmp_path)])
        assert excinfo.value.code == 2
