"""Tests for metric/time-series exports and the policy-difference report."""

import json

import numpy as np
import pytest

from kellypool import (
    ReportBundle,
    ScenarioConfig,
    compare_withdrawal,
    export_bundle,
    format_summary,
    round_fraction,
    round_money,
    run_batch,
    scenario_preset,
    write_diff_report,
    write_metrics_csv,
    write_metrics_json,
    write_runs_csv,
    write_timeseries_csv,
)
from kellypool.engine import BatchResult, DailySeries, SimulationMetrics
from kellypool.reports import METRIC_FIELDS, MONEY_FIELDS, TIMESERIES_HEADER


@pytest.fixture(scope="module")
def paired_bundle():
    config = scenario_preset("5.3", n_simulations=4, seed=31, withdrawal_period_days=30)
    return ReportBundle.from_comparison(compare_withdrawal(config))


@pytest.fixture(scope="module")
def single_bundle():
    config = scenario_preset("5.3", n_simulations=3, seed=8)
    batch = run_batch(config.replace(withdrawal_enabled=False))
    return ReportBundle(scenario_id="5.3", config=batch.config, no_withdrawal=batch)


def read_metrics_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#")
    header = lines[1].split(",")
    rows = {}
    for line in lines[2:]:
        cells = line.split(",")
        rows[cells[0]] = {
            header[i]: (None if cells[i] == "" else float(cells[i]))
            for i in range(1, len(header))
        }
    return rows


class TestRounding:
    def test_half_up_at_cents(self):
        assert round_money(303.155) == 303.16
        assert round_money(2.675) == 2.68
        assert round_money(-1.005) == -1.01

    def test_fraction_at_four_decimals(self):
        assert round_fraction(0.44444444) == 0.4444
        assert round_fraction(0.37895) == 0.379


class TestMetricsExports:
    def test_json_structure_paired(self, paired_bundle, tmp_path):
        path = write_metrics_json(paired_bundle, tmp_path / "metrics.json")
        record = json.loads(path.read_text())
        assert record["scenario_id"] == "5.3"
        assert record["policies"] == ["no_withdrawal", "withdrawal"]
        assert set(record["metrics"]) == {"no_withdrawal", "withdrawal", "difference_pct"}
        for name in METRIC_FIELDS:
            assert name in record["metrics"]["no_withdrawal"]
        assert isinstance(record["loss"]["withdrawal"], bool)
        assert record["config"]["seed"] == 31

    def test_single_policy_omits_difference(self, single_bundle, tmp_path):
        record = json.loads(write_metrics_json(single_bundle, tmp_path / "m.json").read_text())
        assert record["policies"] == ["no_withdrawal"]
        assert "difference_pct" not in record["metrics"]
        assert "withdrawal" not in record["metrics"]

    def test_round_trip_at_reporting_precision(self, paired_bundle, tmp_path):
        record = json.loads(write_metrics_json(paired_bundle, tmp_path / "m.json").read_text())
        metrics = paired_bundle.withdrawal.metrics
        for name in METRIC_FIELDS:
            stored = record["metrics"]["withdrawal"][name]
            truth = getattr(metrics, name)
            tolerance = 0.005 if name in MONEY_FIELDS else 5e-5
            assert stored == pytest.approx(truth, abs=tolerance)

    def test_csv_matches_json(self, paired_bundle, tmp_path):
        json_record = json.loads(write_metrics_json(paired_bundle, tmp_path / "m.json").read_text())
        rows = read_metrics_csv(write_metrics_csv(paired_bundle, tmp_path / "m.csv"))
        for name in METRIC_FIELDS:
            for column in ("no_withdrawal", "withdrawal", "difference_pct"):
                assert rows[name][column] == pytest.approx(
                    json_record["metrics"][column][name] or 0.0
                ) or (rows[name][column] is None and json_record["metrics"][column][name] is None)

    def test_difference_recomputable_from_columns(self, paired_bundle, tmp_path):
        rows = read_metrics_csv(write_metrics_csv(paired_bundle, tmp_path / "m.csv"))
        for name, cells in rows.items():
            without, with_, stored = (
                cells["no_withdrawal"], cells["withdrawal"], cells["difference_pct"]
            )
            if stored is None or without == 0:
                continue
            assert 100.0 * (with_ - without) / abs(without) == pytest.approx(stored, abs=0.01)


class TestTimeseriesExport:
    def test_header_and_shape(self, paired_bundle, tmp_path):
        path = write_timeseries_csv(paired_bundle.withdrawal, tmp_path / "ts.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == TIMESERIES_HEADER == "day,liquidity,premium,volume,withdrawn"
        assert len(lines) == 1 + 650
        assert path.read_text().endswith("\n")

    def test_day_zero_row_is_initial_state(self, paired_bundle, tmp_path):
        path = write_timeseries_csv(paired_bundle.no_withdrawal, tmp_path / "ts.csv")
        day0 = path.read_text().splitlines()[1].split(",")
        assert day0 == ["0", "10000.0", "0.0", "10000.0", "0.0"]

    def test_withdrawn_column_non_decreasing(self, paired_bundle, tmp_path):
        path = write_timeseries_csv(paired_bundle.withdrawal, tmp_path / "ts.csv")
        withdrawn = [float(line.split(",")[4]) for line in path.read_text().splitlines()[1:]]
        assert all(b >= a for a, b in zip(withdrawn, withdrawn[1:]))
        assert withdrawn[-1] > 0.0

    def test_volume_is_liquidity_plus_premium(self, paired_bundle, tmp_path):
        path = write_timeseries_csv(paired_bundle.withdrawal, tmp_path / "ts.csv")
        for line in path.read_text().splitlines()[1:]:
            _, liq, prem, vol, _ = (float(x) for x in line.split(","))
            assert vol == pytest.approx(liq + prem, abs=0.02)

    def test_cumulative_premium_source(self, paired_bundle, tmp_path):
        reserve = write_timeseries_csv(
            paired_bundle.withdrawal, tmp_path / "r.csv", premium_source="reserve"
        )
        cumulative = write_timeseries_csv(
            paired_bundle.withdrawal, tmp_path / "c.csv", premium_source="cumulative"
        )
        last_reserve = float(reserve.read_text().splitlines()[-1].split(",")[2])
        last_cumulative = float(cumulative.read_text().splitlines()[-1].split(",")[2])
        assert last_cumulative >= last_reserve
        with pytest.raises(ValueError):
            write_timeseries_csv(paired_bundle.withdrawal, tmp_path / "x.csv", premium_source="other")


class TestRunsExport:
    def test_one_row_per_simulation(self, paired_bundle, tmp_path):
        path = write_runs_csv(paired_bundle.withdrawal, tmp_path / "runs.csv")
        lines = path.read_text().splitlines()
        assert lines[0].split(",")[:2] == ["sim_index", "n_simulations"]
        assert len(lines) == 1 + 4


class TestExportBundle:
    def test_writes_full_file_set(self, paired_bundle, tmp_path):
        written = export_bundle(paired_bundle, tmp_path / "cell")
        names = sorted(p.name for p in written)
        assert names == [
            "config.json",
            "metrics.csv",
            "metrics.json",
            "runs_no_withdrawal.csv",
            "runs_withdrawal.csv",
            "timeseries_no_withdrawal.csv",
            "timeseries_withdrawal.csv",
        ]
        assert all(p.exists() for p in written)
        leftovers = [p for p in (tmp_path / "cell").iterdir() if p.name.startswith("tmp")]
        assert leftovers == []

    def test_config_snapshot_reproduces_batch(self, paired_bundle, tmp_path):
        export_bundle(paired_bundle, tmp_path / "cell")
        snapshot = json.loads((tmp_path / "cell" / "config.json").read_text())
        config = ScenarioConfig.from_dict(snapshot["config"])
        rerun = run_batch(config.replace(withdrawal_enabled=False))
        assert rerun.metrics == paired_bundle.no_withdrawal.metrics

    def test_json_only_format(self, single_bundle, tmp_path):
        written = export_bundle(single_bundle, tmp_path / "cell", formats=("json",))
        names = {p.name for p in written}
        assert "metrics.csv" not in names and "metrics.json" in names


def _stub_batch(profit, scenario_id="stub", period=30):
    config = ScenarioConfig(
        scenario_id=scenario_id, n_simulations=1, withdrawal_period_days=period
    )
    zeros = np.zeros(3)
    metrics = SimulationMetrics(
        n_simulations=1, horizon_days=3, total_invoices=0,
        avg_accepted=0.0, pct_accepted=0.0, avg_paid=0.0, pct_paid_of_accepted=0.0,
        avg_unpaid=0.0, pct_unpaid_of_accepted=0.0, avg_loss=0.0,
        total_collateral_covered=0.0, collateral_covered_x_ic=0.0,
        total_premium_withdrawn=0.0, premium_withdrawn_x_ic=0.0,
        remaining_premium=0.0, remaining_premium_x_ic=0.0,
        final_volume=profit + 10_000.0, amm_profit=profit, amm_profit_pct=profit / 100.0,
    )
    series = DailySeries(zeros, zeros, zeros, zeros, zeros)
    return BatchResult(config=config, metrics=metrics, mean_series=series, per_run=(metrics,))


class TestDiffReport:
    def test_identical_bundles_give_zero_difference(self, tmp_path):
        bundle = ReportBundle(
            scenario_id="stub",
            config=_stub_batch(100.0).config,
            no_withdrawal=_stub_batch(100.0),
            withdrawal=_stub_batch(100.0),
        )
        path = write_diff_report([bundle], tmp_path / "diff.csv")
        lines = path.read_text().splitlines()
        assert lines[1].split(",")[0] == "scenario_id"
        row = dict(zip(lines[1].split(","), lines[2].split(",")))
        assert float(row["difference_pct"]) == 0.0
        assert row["sign_change"] == "False"

    def test_sign_flip_flagged(self, tmp_path):
        bundle = ReportBundle(
            scenario_id="flip",
            config=_stub_batch(-500.0).config,
            no_withdrawal=_stub_batch(-500.0),
            withdrawal=_stub_batch(2_000.0),
        )
        path = write_diff_report([bundle], tmp_path / "diff.csv")
        row_cells = path.read_text().splitlines()[2].split(",")
        header = path.read_text().splitlines()[1].split(",")
        row = dict(zip(header, row_cells))
        assert row["sign_change"] == "True"
        assert row["loss_no_withdrawal"] == "True"
        assert row["loss_withdrawal"] == "False"
        assert float(row["difference_pct"]) == pytest.approx(500.0)

    def test_single_policy_bundles_skipped(self, single_bundle, tmp_path):
        with pytest.raises(ValueError):
            write_diff_report([single_bundle], tmp_path / "diff.csv")


class TestFormatSummary:
    def test_contains_columns_and_fields(self, paired_bundle):
        text = format_summary(paired_bundle)
        assert "no_withdrawal" in text and "withdrawal" in text
        for name in ("pct_accepted", "amm_profit_pct", "final_volume"):
            assert name in text

    def test_bundle_requires_a_policy(self):
        with pytest.raises(ValueError):
            ReportBundle(scenario_id="x", config=ScenarioConfig())
