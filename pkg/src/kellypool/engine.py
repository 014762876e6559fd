"""Daily event loop, batch runner, and withdrawal-policy comparison.

One simulation walks the pool through ``horizon_days`` days.  Within a
day the order of events is fixed: collateral repayments due today land
first, then any liquidity-provider deposit, then the day's invoice
arrives and is either collateralized or discarded for good, and finally
the periodic premium withdrawal (on every day that is a whole multiple
of the withdrawal period, day 0 excluded) takes its share of the
premium reserve.  Quotes therefore see the volume enlarged by the same
day's repayments but not yet reduced by the same day's withdrawal.

A batch runs ``n_simulations`` independent simulations whose random
streams derive from ``(seed, simulation_index)`` and averages every
metric and every day of the time series arithmetically.  Simulations
are independent and can run across processes; results are always
reduced in simulation-index order so batch output is reproducible
regardless of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .pool import (
    Invoice,
    LedgerError,
    PoolState,
    PremiumQuote,
    Rejection,
    accept_invoice,
    conservation_residual,
    finalize_losses,
    lp_deposit,
    repay_invoice,
    withdraw_premium,
)
from .scenarios import ScenarioConfig, generate_stream, lp_contribution_schedule, simulation_rng

# Internal ledger guard; the reporting-grade tolerance is asserted in tests.
_CONSERVATION_GUARD = 1e-6


@dataclass(frozen=True)
class TimeSeriesPoint:
    """Pool state snapshot at the start of one day."""

    day: int
    liquidity: float
    premium_reserve: float
    volume: float
    cumulative_withdrawn: float


@dataclass(frozen=True)
class DailySeries:
    """Per-day pool trajectories over one run (or averaged over a batch).

    Each array has one entry per day, recorded at the start of the day,
    so index 0 is the untouched initial state.
    """

    liquidity: np.ndarray
    premium_reserve: np.ndarray
    volume: np.ndarray
    cumulative_withdrawn: np.ndarray
    cumulative_premium_collected: np.ndarray

    def __len__(self) -> int:
        return len(self.liquidity)

    def point(self, day: int) -> TimeSeriesPoint:
        return TimeSeriesPoint(
            day=day,
            liquidity=float(self.liquidity[day]),
            premium_reserve=float(self.premium_reserve[day]),
            volume=float(self.volume[day]),
            cumulative_withdrawn=float(self.cumulative_withdrawn[day]),
        )

    def points(self) -> list[TimeSeriesPoint]:
        return [self.point(day) for day in range(len(self))]

    @staticmethod
    def mean(series: Sequence["DailySeries"]) -> "DailySeries":
        """Day-wise arithmetic mean across runs, reduced in given order."""
        return DailySeries(
            **{
                f.name: np.stack([getattr(s, f.name) for s in series]).mean(axis=0)
                for f in fields(DailySeries)
            }
        )


@dataclass(frozen=True)
class SimulationMetrics:
    """End-of-run summary; for a batch, the arithmetic mean over runs.

    ``x_ic`` fields express the amount as a multiple of the initial
    collateral.  Profit counts everything the pool ends with or paid
    out to liquidity providers beyond the initial collateral:
    ``amm_profit = final_volume + total_premium_withdrawn - initial``.
    """

    n_simulations: int
    horizon_days: int
    total_invoices: int
    avg_accepted: float
    pct_accepted: float
    avg_paid: float
    pct_paid_of_accepted: float
    avg_unpaid: float
    pct_unpaid_of_accepted: float
    avg_loss: float
    total_collateral_covered: float
    collateral_covered_x_ic: float
    total_premium_withdrawn: float
    premium_withdrawn_x_ic: float
    remaining_premium: float
    remaining_premium_x_ic: float
    final_volume: float
    amm_profit: float
    amm_profit_pct: float


@dataclass(frozen=True)
class SimulationResult:
    metrics: SimulationMetrics
    series: DailySeries
    invoices: list[Invoice]


@dataclass(frozen=True)
class BatchResult:
    config: ScenarioConfig
    metrics: SimulationMetrics
    mean_series: DailySeries
    per_run: tuple[SimulationMetrics, ...]


def run_day(
    pool: PoolState,
    day: int,
    due_repayments: Sequence[Invoice],
    today_invoice: Invoice | None,
    config: ScenarioConfig,
    lp_amount: float = 0.0,
) -> PremiumQuote | Rejection | None:
    """Apply one day's events in fixed order and advance the day counter.

    Returns the arrival outcome: the quote on acceptance, the rejection
    otherwise, or None when no invoice arrived today.
    """
    if pool.day != day:
        raise LedgerError(f"pool is at day {pool.day}, asked to run day {day}")
    for invoice in due_repayments:
        repay_invoice(pool, invoice)
    if lp_amount > 0.0:
        lp_deposit(pool, lp_amount)
    outcome = None
    if today_invoice is not None:
        outcome = accept_invoice(pool, today_invoice)
    if (
        config.withdrawal_enabled
        and day > 0
        and day % config.withdrawal_period_days == 0
    ):
        withdraw_premium(pool, config.withdrawal_fraction)
    pool.day += 1
    return outcome


def run_simulation(config: ScenarioConfig, sim_index: int = 0) -> SimulationResult:
    """Run one full simulation; everything derives from (seed, sim_index)."""
    rng = simulation_rng(config.seed, sim_index)
    invoices = generate_stream(config, rng)
    horizon = config.horizon_days
    deposits = lp_contribution_schedule(config, horizon, rng)

    pool = PoolState(
        liquidity=config.initial_collateral, premium_reserve=config.initial_premium
    )
    due: dict[int, list[Invoice]] = {}
    series = {f.name: np.empty(horizon) for f in fields(DailySeries)}

    for day in range(horizon):
        series["liquidity"][day] = pool.liquidity
        series["premium_reserve"][day] = pool.premium_reserve
        series["volume"][day] = pool.volume
        series["cumulative_withdrawn"][day] = pool.cumulative_withdrawn
        series["cumulative_premium_collected"][day] = pool.cumulative_premium_collected

        arriving = None
        if day < config.max_entry_days and day < len(invoices):
            arriving = invoices[day]
        run_day(pool, day, due.pop(day, ()), arriving, config, float(deposits[day]))
        if arriving is not None and arriving.accepted and arriving.due_day < horizon:
            due.setdefault(arriving.due_day, []).append(arriving)

        residual = conservation_residual(
            pool, config.initial_collateral, config.initial_premium
        )
        if abs(residual) > _CONSERVATION_GUARD:
            raise LedgerError(f"conservation violated on day {day}: residual {residual}")

    finalize_losses(pool, invoices)
    metrics = _run_metrics(pool, invoices, config)
    return SimulationResult(metrics=metrics, series=DailySeries(**series), invoices=invoices)


def _run_metrics(
    pool: PoolState, invoices: Sequence[Invoice], config: ScenarioConfig
) -> SimulationMetrics:
    initial = config.initial_collateral
    n_accepted = sum(1 for inv in invoices if inv.accepted)
    n_paid = sum(1 for inv in invoices if inv.repaid)
    n_unpaid = n_accepted - n_paid
    covered = sum(inv.demanded_collateral for inv in invoices if inv.accepted)
    total = len(invoices)
    profit = pool.volume + pool.cumulative_withdrawn - initial
    return SimulationMetrics(
        n_simulations=1,
        horizon_days=config.horizon_days,
        total_invoices=total,
        avg_accepted=float(n_accepted),
        pct_accepted=100.0 * n_accepted / total if total else 0.0,
        avg_paid=float(n_paid),
        pct_paid_of_accepted=100.0 * n_paid / n_accepted if n_accepted else 0.0,
        avg_unpaid=float(n_unpaid),
        pct_unpaid_of_accepted=100.0 * n_unpaid / n_accepted if n_accepted else 0.0,
        avg_loss=pool.loss_total,
        total_collateral_covered=covered,
        collateral_covered_x_ic=covered / initial,
        total_premium_withdrawn=pool.cumulative_withdrawn,
        premium_withdrawn_x_ic=pool.cumulative_withdrawn / initial,
        remaining_premium=pool.premium_reserve,
        remaining_premium_x_ic=pool.premium_reserve / initial,
        final_volume=pool.volume,
        amm_profit=profit,
        amm_profit_pct=100.0 * profit / initial,
    )


# constant across the runs of one batch, not averaged
_BATCH_CONSTANT_FIELDS = ("horizon_days", "total_invoices")


def _mean_metrics(per_run: Sequence[SimulationMetrics]) -> SimulationMetrics:
    """Field-wise arithmetic mean; exact summation keeps it order-free."""
    values = {}
    for f in fields(SimulationMetrics):
        column = [getattr(m, f.name) for m in per_run]
        if f.name == "n_simulations":
            values[f.name] = len(per_run)
        elif f.name in _BATCH_CONSTANT_FIELDS:
            values[f.name] = column[0]
        else:
            values[f.name] = math.fsum(column) / len(column)
    return SimulationMetrics(**values)


def _simulate_worker(args: tuple[ScenarioConfig, int]) -> tuple[SimulationMetrics, DailySeries]:
    config, sim_index = args
    result = run_simulation(config, sim_index)
    return result.metrics, result.series


def run_batch(
    config: ScenarioConfig, jobs: int = 1, executor: Executor | None = None
) -> BatchResult:
    """Run the configured number of simulations and average them.

    ``jobs`` bounds process-level parallelism (pass a long-lived
    ``executor`` instead when running many batches); results are reduced
    in simulation-index order either way, so the output is identical for
    any job count.
    """
    tasks = [(config, k) for k in range(config.n_simulations)]
    if executor is not None:
        outcomes = list(executor.map(_simulate_worker, tasks, chunksize=8))
    elif jobs > 1 and config.n_simulations > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool_exec:
            outcomes = list(pool_exec.map(_simulate_worker, tasks, chunksize=8))
    else:
        outcomes = [_simulate_worker(task) for task in tasks]
    per_run = tuple(metrics for metrics, _ in outcomes)
    mean_series = DailySeries.mean([series for _, series in outcomes])
    return BatchResult(
        config=config,
        metrics=_mean_metrics(per_run),
        mean_series=mean_series,
        per_run=per_run,
    )


@dataclass(frozen=True)
class WithdrawalComparison:
    """Paired batches sharing one seed: withdrawal off versus on."""

    no_withdrawal: BatchResult
    withdrawal: BatchResult

    @property
    def scenario_id(self) -> str:
        return self.withdrawal.config.scenario_id

    @property
    def withdrawal_period_days(self) -> int:
        return self.withdrawal.config.withdrawal_period_days

    @property
    def profit_difference_pct(self) -> float | None:
        """100 * (with - without) / |without|; None when without is zero."""
        return profit_difference_pct(
            self.no_withdrawal.metrics.amm_profit, self.withdrawal.metrics.amm_profit
        )


def profit_difference_pct(without: float, with_: float) -> float | None:
    if without == 0.0:
        return None
    return 100.0 * (with_ - without) / abs(without)


def compare_withdrawal(
    config: ScenarioConfig, jobs: int = 1, executor: Executor | None = None
) -> WithdrawalComparison:
    """Run the batch twice with identical seeds, withdrawal off then on."""
    return WithdrawalComparison(
        no_withdrawal=run_batch(
            config.replace(withdrawal_enabled=False), jobs=jobs, executor=executor
        ),
        withdrawal=run_batch(
            config.replace(withdrawal_enabled=True), jobs=jobs, executor=executor
        ),
    )
