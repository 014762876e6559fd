"""Scenario configuration, preset catalog, and stochastic invoice generation.

A scenario is fully described by a ``ScenarioConfig``.  The catalog in
``scenario_preset`` starts from the default parameter set (10,000 euros
of initial collateral, 500 invoices of 100-2,000 euros with a
non-collateralized share of 5-49% and payment delays of 30-120 days)
and applies one family of deltas per scenario group:

  1.x  liquidity providers deposit on half of all days, capped at
       1/5/10/25% of the initial collateral per contribution
  2.x  2/5/20% of invoices never repay
  3.x  payment delays shortened or stretched to 30-60/60-90/90-120 days
  4.x  every invoice demands a fixed 1/10/25% of the initial collateral
  5.x  the non-collateralized share is fixed at 45/25/10%
  hack-q{49,30,10}-h{10,50,100}  bogus never-repaying invoices with a
       fixed non-collateralized share are injected at 10/50/100%

Generation is driven by an explicit numpy ``Generator``; batches derive
one independent stream per simulation index (see ``engine``), so every
run is reproducible from ``(seed, simulation_index)`` alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pool import NEVER_PAID_DELAY, Invoice


class ConfigError(ValueError):
    """A scenario configuration is inconsistent or unknown."""


WITHDRAWAL_PERIODS = (1, 30, 90)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete parameter set for one scenario batch.

    Exactly one of ``amount_range`` and ``amount_fraction_of_initial``
    must be set; the latter makes every invoice demand that fixed share
    of the initial collateral.  ``max_entry_days`` defaults to the
    number of invoices (one arrival per day) and ``horizon_days`` is
    derived as ``max_entry_days + max delay + additional_days`` so that
    every genuine invoice can repay before the run ends.
    """

    scenario_id: str = "custom"
    n_simulations: int = 100
    initial_collateral: float = 10_000.0
    initial_premium: float = 0.0
    n_invoices: int = 500
    q_range: tuple[float, float] = (0.05, 0.49)
    amount_range: tuple[float, float] | None = (100.0, 2_000.0)
    amount_fraction_of_initial: float | None = None
    delay_range_days: tuple[int, int] = (30, 120)
    lp_contribution_probability: float = 0.0
    lp_cap_fraction: float = 0.0        # per-contribution cap, share of initial collateral
    lp_contribution_mode: str = "uniform"  # "uniform" in [0, cap] or "fixed" at cap
    nonpayment_probability: float = 0.0
    hack_probability: float = 0.0
    hack_q: float | None = None
    max_entry_days: int | None = None
    additional_days: int = 30
    horizon_days: int | None = None
    withdrawal_enabled: bool = False
    withdrawal_period_days: int = 30
    withdrawal_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_simulations < 1:
            raise ConfigError("n_simulations must be at least 1")
        if self.initial_collateral < 0 or self.initial_premium < 0:
            raise ConfigError("initial reserves must be non-negative")
        if self.n_invoices < 0:
            raise ConfigError("n_invoices must be non-negative")
        lo, hi = self.q_range
        if not (0.0 < lo <= hi < 1.0):
            raise ConfigError(f"q_range must lie inside (0, 1) and be ordered, got {self.q_range}")
        if (self.amount_range is None) == (self.amount_fraction_of_initial is None):
            raise ConfigError("set exactly one of amount_range and amount_fraction_of_initial")
        if self.amount_range is not None:
            a_lo, a_hi = self.amount_range
            if not (0.0 < a_lo <= a_hi):
                raise ConfigError(f"amount_range must be positive and ordered, got {self.amount_range}")
        elif self.amount_fraction_of_initial <= 0.0:
            raise ConfigError("amount_fraction_of_initial must be positive")
        d_lo, d_hi = self.delay_range_days
        if not (0 < d_lo <= d_hi):
            raise ConfigError(f"delay_range_days must be positive and ordered, got {self.delay_range_days}")
        for name in ("lp_contribution_probability", "nonpayment_probability",
                     "hack_probability", "withdrawal_fraction", "lp_cap_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.lp_contribution_mode not in ("uniform", "fixed"):
            raise ConfigError(f"lp_contribution_mode must be 'uniform' or 'fixed', got {self.lp_contribution_mode!r}")
        if self.hack_q is not None and not (0.0 < self.hack_q < 1.0):
            raise ConfigError(f"hack_q must lie inside (0, 1), got {self.hack_q}")
        if self.withdrawal_period_days not in WITHDRAWAL_PERIODS:
            raise ConfigError(
                f"withdrawal_period_days must be one of {WITHDRAWAL_PERIODS}, got {self.withdrawal_period_days}"
            )
        if self.max_entry_days is None:
            object.__setattr__(self, "max_entry_days", self.n_invoices)
        elif self.max_entry_days < 0:
            raise ConfigError("max_entry_days must be non-negative")
        if self.additional_days < 0:
            raise ConfigError("additional_days must be non-negative")
        derived = self.max_entry_days + self.delay_range_days[1] + self.additional_days
        if self.horizon_days is None:
            object.__setattr__(self, "horizon_days", derived)
        elif self.horizon_days != derived:
            raise ConfigError(
                f"horizon_days must equal max_entry_days + max delay + additional_days "
                f"= {derived}, got {self.horizon_days}"
            )

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with fields changed; derived fields are recomputed."""
        for derived in ("max_entry_days", "horizon_days"):
            changes.setdefault(derived, None)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("q_range", "amount_range", "delay_range_days"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("q_range", "amount_range", "delay_range_days"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config file must hold a JSON object")
        return cls.from_dict(data)


# --- Preset catalog ---------------------------------------------------------

_PRESET_DELTAS: dict[str, dict] = {
    "baseline": {},
    # growing LP contributions, half of all days
    "1.1": {"lp_contribution_probability": 0.5, "lp_cap_fraction": 0.01},
    "1.2": {"lp_contribution_probability": 0.5, "lp_cap_fraction": 0.05},
    "1.3": {"lp_contribution_probability": 0.5, "lp_cap_fraction": 0.10},
    "1.4": {"lp_contribution_probability": 0.5, "lp_cap_fraction": 0.25},
    # rising non-payment rates
    "2.1": {"nonpayment_probability": 0.02},
    "2.2": {"nonpayment_probability": 0.05},
    "2.3": {"nonpayment_probability": 0.20},
    # shorter or longer payment delays
    "3.1": {"delay_range_days": (30, 60)},
    "3.2": {"delay_range_days": (60, 90)},
    "3.3": {"delay_range_days": (90, 120)},
    # fixed demanded collateral as a share of the initial collateral
    "4.1": {"amount_range": None, "amount_fraction_of_initial": 0.01},
    "4.2": {"amount_range": None, "amount_fraction_of_initial": 0.10},
    "4.3": {"amount_range": None, "amount_fraction_of_initial": 0.25},
    # fixed non-collateralized share
    "5.1": {"q_range": (0.45, 0.45)},
    "5.2": {"q_range": (0.25, 0.25)},
    "5.3": {"q_range": (0.10, 0.10)},
}
for _hack_q in (0.49, 0.30, 0.10):
    for _hack_p in (0.10, 0.50, 1.00):
        _PRESET_DELTAS[f"hack-q{round(_hack_q * 100)}-h{round(_hack_p * 100)}"] = {
            "hack_q": _hack_q,
            "hack_probability": _hack_p,
        }

PRESET_IDS: tuple[str, ...] = tuple(_PRESET_DELTAS)

# The result-table grid: every preset except the plain baseline.
SWEEP_IDS: tuple[str, ...] = tuple(sid for sid in PRESET_IDS if sid != "baseline")


def scenario_preset(scenario_id: str, **overrides) -> ScenarioConfig:
    """Build the named preset, optionally overriding individual fields."""
    try:
        deltas = _PRESET_DELTAS[scenario_id]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {scenario_id!r}; known presets: {', '.join(PRESET_IDS)}"
        ) from None
    return ScenarioConfig(scenario_id=scenario_id, **deltas).replace(**overrides)


# --- Invoice generation -----------------------------------------------------

def generate_invoice(day: int, config: ScenarioConfig, rng: np.random.Generator) -> Invoice:
    """Draw one invoice arriving on ``day``.

    Draw order per invoice is fixed: non-collateralized share, demanded
    amount, bogus flag, non-payment flag, payment delay.  The two flag
    uniforms are always consumed so the stream layout does not depend on
    the configured probabilities.  Bogus and flagged-unpaid invoices get
    the never-paid sentinel delay instead of a drawn one.
    """
    if day < 0:
        raise ValueError("day must be non-negative")
    if config.hack_q is not None:
        q = config.hack_q
    else:
        q = float(rng.uniform(*config.q_range))
    if config.amount_fraction_of_initial is not None:
        amount = config.amount_fraction_of_initial * config.initial_collateral
    else:
        amount = float(rng.uniform(*config.amount_range))
    bogus = bool(rng.random() < config.hack_probability)
    unpaid = (not bogus) and bool(rng.random() < config.nonpayment_probability)
    d_lo, d_hi = config.delay_range_days
    delay = int(rng.integers(d_lo, d_hi, endpoint=True))
    if bogus or unpaid:
        delay = NEVER_PAID_DELAY
    return Invoice(
        id=day,
        q=q,
        demanded_collateral=amount,
        arrival_day=day,
        payment_delay_days=delay,
        bogus=bogus,
    )


def generate_stream(config: ScenarioConfig, rng: np.random.Generator) -> list[Invoice]:
    """Generate the full invoice stream, one arrival per day from day 0."""
    return [generate_invoice(day, config, rng) for day in range(config.n_invoices)]


def lp_contribution_schedule(
    config: ScenarioConfig, horizon_days: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-day liquidity-provider deposits over the whole horizon.

    Each day contributes with the configured probability; the amount is
    uniform in [0, cap] or exactly the cap in fixed mode.  Returns zeros
    without consuming randomness when contributions are disabled.
    """
    cap = config.lp_cap_fraction * config.initial_collateral
    if config.lp_contribution_probability <= 0.0 or cap <= 0.0:
        return np.zeros(horizon_days)
    occurs = rng.random(horizon_days) < config.lp_contribution_probability
    if config.lp_contribution_mode == "fixed":
        amounts = np.full(horizon_days, cap)
    else:
        amounts = rng.uniform(0.0, cap, horizon_days)
    return np.where(occurs, amounts, 0.0)


def simulation_rng(seed: int, sim_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one simulation of a batch."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(sim_index,)))
