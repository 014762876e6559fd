"""Kelly-priced liquidity pool for invoice collateralization.

A pool lends the missing collateral of partly collateralized invoices
against a premium priced by solving the Kelly bet-sizing identity for
the odds term.  The package provides the exact pool ledger, the premium
quoting math, seedable scenario generation, a daily-resolution batch
simulator, withdrawal-policy comparisons, and CSV/JSON reporting.
"""

from .engine import (
    BatchResult,
    DailySeries,
    SimulationMetrics,
    SimulationResult,
    TimeSeriesPoint,
    WithdrawalComparison,
    compare_withdrawal,
    profit_difference_pct,
    run_batch,
    run_day,
    run_simulation,
)
from .pool import (
    NEVER_PAID_DELAY,
    Invoice,
    LedgerError,
    NonPositiveDenominatorError,
    PoolState,
    PremiumQuote,
    QuoteError,
    Rejection,
    RejectionReason,
    ZeroVolumeError,
    accept_invoice,
    compute_b,
    compute_f,
    conservation_residual,
    finalize_losses,
    lp_deposit,
    pool_volume,
    quote_premium,
    repay_invoice,
    withdraw_premium,
)
from .reports import (
    ReportBundle,
    export_bundle,
    format_summary,
    metrics_record,
    round_fraction,
    round_money,
    write_diff_report,
    write_metrics_csv,
    write_metrics_json,
    write_runs_csv,
    write_timeseries_csv,
)
from .scenarios import (
    PRESET_IDS,
    SWEEP_IDS,
    WITHDRAWAL_PERIODS,
    ConfigError,
    ScenarioConfig,
    generate_invoice,
    generate_stream,
    lp_contribution_schedule,
    scenario_preset,
    simulation_rng,
)

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "ConfigError",
    "DailySeries",
    "Invoice",
    "LedgerError",
    "NEVER_PAID_DELAY",
    "NonPositiveDenominatorError",
    "PRESET_IDS",
    "PoolState",
    "PremiumQuote",
    "QuoteError",
    "Rejection",
    "RejectionReason",
    "ReportBundle",
    "SWEEP_IDS",
    "ScenarioConfig",
    "SimulationMetrics",
    "SimulationResult",
    "TimeSeriesPoint",
    "WITHDRAWAL_PERIODS",
    "WithdrawalComparison",
    "ZeroVolumeError",
    "accept_invoice",
    "compare_withdrawal",
    "compute_b",
    "compute_f",
    "conservation_residual",
    "export_bundle",
    "finalize_losses",
    "format_summary",
    "generate_invoice",
    "generate_stream",
    "lp_contribution_schedule",
    "lp_deposit",
    "metrics_record",
    "pool_volume",
    "profit_difference_pct",
    "quote_premium",
    "repay_invoice",
    "round_fraction",
    "round_money",
    "run_batch",
    "run_day",
    "run_simulation",
    "scenario_preset",
    "simulation_rng",
    "withdraw_premium",
    "write_diff_report",
    "write_metrics_csv",
    "write_metrics_json",
    "write_runs_csv",
    "write_timeseries_csv",
]
