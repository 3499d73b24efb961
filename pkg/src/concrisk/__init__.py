"""Concentration risk indicator and companion fund metrics."""

from .cri import (
    AssetRiskInput,
    Chain,
    ChainAllocation,
    ChainMode,
    FundSpec,
    MarketContext,
    MarketMode,
    ParitySpec,
    cri_multichain,
    cri_portfolio,
    market_factor,
    multichain_benefit,
    multichain_factor_equal,
    multichain_factor_mcap,
    parity_cri,
    parity_return,
    parity_vol,
    parity_vol_matrix,
)
from .ledger import LedgerState, PnlSnapshot, Trade, apply_trade, batch_wavg, pnl_returns, unrealized_pnl
from .riskguard import GuardConfig, GuardReport, HoldingSnapshot, run_guard
from .timeseries import PriceSeries, ReturnSeries, VolEstimate, horizon_return, log_return, rolling_vol, scale_vol

__version__ = "0.1.0"
