"""Replication versus delta hedging in a complete Poisson jump market."""

__version__ = "0.1.0"

from .market import ModelParams, JumpPath, derive_params, sample_path, stock_at, stock_before
from .payoffs import (
    CallPayoff,
    CustomPayoff,
    DeltaUnavailable,
    Envelope,
    LogPayoff,
    PowerPayoff,
    UnsupportedPayoff,
    constant_payoff,
)
from .valuation import SeriesResult, TruncationFailure, closed_form_value, value, value_delta
from .strategies import (
    Combined,
    DeltaHedge,
    Hedger,
    Replicating,
    Suicide,
    WealthSeries,
    replication_error,
    wealth_process,
)
from .montecarlo import ErrorStats, martingale_diagnostic, minimal_capital_demo, simulate_errors
