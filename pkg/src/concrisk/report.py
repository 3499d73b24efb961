"""Metric tables for assets, sub-funds and the Parity composite.

Each row carries a horizon return, horizon volatility and CRI. By default
the horizon return is the trailing-window mean daily log return times the
horizon; ``horizon_return=True`` switches to ln(P_t / P_{t-h}). Volatility
is the trailing-window sample volatility scaled by sqrt(horizon).

Fund daily returns are the weight-averaged constituent log returns on the
days all constituents trade. Parity correlations are sample correlations
of the three fund return series over their common trailing window.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import timedelta
from typing import Optional

import numpy as np

from .cri import (
    AssetRiskInput,
    FundSpec,
    MarketContext,
    MarketMode,
    PARITY_FUNDS,
    ParitySpec,
    cri_portfolio,
    parity_cri,
    parity_return,
    parity_vol,
    parity_vol_matrix,
)
from .errors import ConfigurationError, InsufficientHistoryError, ValidationError
from .ingest import FundsConfig
from .ledger import LedgerState, apply_trade, pnl_returns, snapshot
from .riskguard import GuardConfig, HoldingSnapshot
from .timeseries import (
    DEFAULT_ANNUALIZATION_DAYS,
    DEFAULT_WINDOW,
    ReturnSeries,
    aligned_returns,
    horizon_return,
    log_returns,
    rolling_vol,
    scale_vol,
)

DEFAULT_HORIZON = 30
DEFAULT_REFERENCE_DAYS = 30


@dataclass(frozen=True)
class MetricsRow:
    name: str
    kind: str
    period_return: float
    period_vol: float
    cri: float
    risk_adjusted_return: Optional[float] = None


def default_total_market_cap(series: dict) -> float:
    """Sum of each asset's latest market cap; stands in for the whole market."""
    return math.fsum(float(s.market_caps[-1]) for s in series.values() if len(s))


def _risk_adjusted(mean_daily, daily_vol, rf, annualize_days):
    ann_vol = daily_vol * math.sqrt(annualize_days)
    if ann_vol == 0:
        return math.nan
    return (mean_daily * annualize_days - rf) / ann_vol


def _fund_returns(series, weights: dict) -> ReturnSeries:
    assets = sorted(weights)
    dates, matrix = aligned_returns([series[a] for a in assets])
    w = np.array([weights[a] for a in assets])
    values = matrix @ w if len(dates) else np.empty(0)
    return ReturnSeries("fund", dates, values)


def _common_window(fund_series, window):
    common = set(fund_series[0].dates)
    for fs in fund_series[1:]:
        common &= set(fs.dates)
    days = sorted(common)[-window:]
    cols = []
    for fs in fund_series:
        lookup = dict(zip(fs.dates, fs.values))
        cols.append([lookup[d] for d in days])
    return np.array(cols)


def _correlation(x, y) -> float:
    if len(x) < 2:
        raise InsufficientHistoryError("need at least 2 common fund returns for a correlation")
    x = x - x.mean()
    y = y - y.mean()
    denom = math.sqrt(float(x @ x) * float(y @ y))
    if denom == 0:
        # a constant series has no correlation; its covariance terms are zero anyway
        return 0.0
    return min(1.0, max(-1.0, float(x @ y) / denom))


def _parity_correlations(fund_series, window) -> tuple:
    """(alpha-beta, alpha-gamma, gamma-beta) over the common trailing window."""
    a, b, g = _common_window(fund_series, window)
    return (_correlation(a, b), _correlation(a, g), _correlation(g, b))


def compute_metrics_table(
    series: dict,
    funds: FundsConfig,
    ctx: MarketContext,
    window: int = DEFAULT_WINDOW,
    horizon: int = DEFAULT_HORIZON,
    risk_free_rate: Optional[float] = None,
    annualize_days: int = DEFAULT_ANNUALIZATION_DAYS,
    horizon_return_mode: bool = False,
) -> list:
    """One row per fund, the Parity composite (when configured) and per asset.

    ``risk_free_rate`` is an annual decimal rate (0.08 for 8%).
    """
    if window < 2:
        raise ConfigurationError(f"window must be at least 2, got {window}")
    if horizon < 1:
        raise ConfigurationError(f"horizon must be at least 1 day, got {horizon}")
    if annualize_days < 1:
        raise ConfigurationError(f"annualization factor must be positive, got {annualize_days}")
    for name, weights in funds.funds.items():
        unknown = sorted(set(weights) - set(series))
        if unknown:
            raise ConfigurationError(f"fund {name} references asset(s) without prices: {', '.join(unknown)}")

    asset_stats = {}
    for asset_id in sorted(series):
        s = series[asset_id]
        est = rolling_vol(log_returns(s), None, window)
        if horizon_return_mode:
            ret = horizon_return(s, s.last_date, horizon)
        else:
            ret = est.mean_return * horizon
        asset_stats[asset_id] = (est, ret, scale_vol(est.daily_vol, horizon), float(s.market_caps[-1]))

    def risk_input(asset_id, weight):
        _, _, vol, mcap = asset_stats[asset_id]
        return AssetRiskInput(asset_id, vol, mcap, weight, horizon)

    rows = []
    fund_specs = {}
    fund_stats = {}
    for name in funds.fund_names():
        weights = funds.funds[name]
        spec = FundSpec(name, tuple(risk_input(a, weights[a]) for a in sorted(weights)))
        fund_specs[name] = spec
        fr = _fund_returns(series, weights)
        est = rolling_vol(fr, None, window)
        if horizon_return_mode:
            ret = sum(w * asset_stats[a][1] for a, w in sorted(weights.items()))
        else:
            ret = est.mean_return * horizon
        vol = scale_vol(est.daily_vol, horizon)
        fund_stats[name] = (fr, est, ret, vol)
        rar = None
        if risk_free_rate is not None:
            rar = _risk_adjusted(est.mean_return, est.daily_vol, risk_free_rate, annualize_days)
        rows.append(MetricsRow(name, "fund", ret, vol, cri_portfolio(spec, ctx), rar))

    if funds.parity_mix is not None:
        corr = _parity_correlations([fund_stats[f][0] for f in PARITY_FUNDS], window)
        spec = ParitySpec(
            funds.parity_mix,
            tuple(fund_stats[f][2] for f in PARITY_FUNDS),
            tuple(fund_stats[f][3] for f in PARITY_FUNDS),
            corr,
        )
        rar = None
        if risk_free_rate is not None:
            daily = ParitySpec(
                funds.parity_mix,
                tuple(fund_stats[f][1].mean_return for f in PARITY_FUNDS),
                tuple(fund_stats[f][1].daily_vol for f in PARITY_FUNDS),
                corr,
            )
            rar = _risk_adjusted(parity_return(daily), parity_vol(daily), risk_free_rate, annualize_days)
        p_cri = parity_cri([fund_specs[f] for f in PARITY_FUNDS], funds.parity_mix, ctx)
        rows.append(MetricsRow("parity", "parity", parity_return(spec), parity_vol(spec), p_cri, rar))

    for asset_id in sorted(series):
        est, ret, vol, mcap = asset_stats[asset_id]
        spec = FundSpec(asset_id, (risk_input(asset_id, 1.0),))
        rar = None
        if risk_free_rate is not None:
            rar = _risk_adjusted(est.mean_return, est.daily_vol, risk_free_rate, annualize_days)
        rows.append(MetricsRow(asset_id, "asset", ret, vol, cri_portfolio(spec, ctx), rar))
    return rows


def parity_details(series: dict, funds: FundsConfig, ctx: MarketContext, window=DEFAULT_WINDOW, horizon=DEFAULT_HORIZON) -> dict:
    """Parity inputs and outputs, including the correlations used."""
    if funds.parity_mix is None:
        raise ConfigurationError("fund file has no [parity] section")
    rows = {r.name: r for r in compute_metrics_table(series, funds, ctx, window, horizon)}
    corr = _parity_correlations([_fund_returns(series, funds.funds[f]) for f in PARITY_FUNDS], window)
    spec = ParitySpec(
        funds.parity_mix,
        tuple(rows[f].period_return for f in PARITY_FUNDS),
        tuple(rows[f].period_vol for f in PARITY_FUNDS),
        corr,
    )
    return {
        "mix": spec.mix,
        "fund_returns": spec.fund_returns,
        "fund_vols": spec.fund_vols,
        "correlations": corr,
        "parity_return": rows["parity"].period_return,
        "parity_vol": rows["parity"].period_vol,
        "parity_vol_matrix": parity_vol_matrix(spec),
        "parity_cri": rows["parity"].cri,
    }


METRIC_COLUMNS = ("name", "kind", "period_return", "period_vol", "cri")


def _metric_header(rows):
    cols = list(METRIC_COLUMNS)
    if any(r.risk_adjusted_return is not None for r in rows):
        cols.append("risk_adjusted_return")
    return cols


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_csv(header, records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow([_cell(v) for v in rec])
    return buf.getvalue()


def format_table(header, records) -> str:
    cells = [list(header)]
    for rec in records:
        cells.append([f"{v:.6g}" if isinstance(v, float) else str(v) for v in rec])
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for n, row in enumerate(cells):
        parts = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def metrics_records(rows):
    header = _metric_header(rows)
    records = []
    for r in rows:
        rec = [r.name, r.kind, r.period_return, r.period_vol, r.cri]
        if len(header) > len(METRIC_COLUMNS):
            rec.append(r.risk_adjusted_return)
        records.append(rec)
    return header, records


def render_metrics(rows, fmt="table") -> str:
    header, records = metrics_records(rows)
    return (format_csv if fmt == "csv" else format_table)(header, records)


PNL_COLUMNS = (
    "asset_id",
    "seq",
    "position",
    "wavg_price",
    "mark_price",
    "realized_pnl",
    "unrealized_pnl",
    "realized_return",
    "unrealized_return",
)


def pnl_statement(trades: dict, marks: dict) -> list:
    """End-of-ledger P&L snapshot per asset, marked at ``marks[asset]``."""
    out = []
    for asset_id in sorted(trades):
        state = LedgerState(asset_id)
        for t in trades[asset_id]:
            state = apply_trade(state, t)
        if asset_id not in marks:
            raise ValidationError(f"no mark price for {asset_id}")
        out.append(snapshot(state, marks[asset_id]))
    return out


def pnl_history(trades: dict) -> list:
    """Per-trade snapshots, each marked at its own trade price."""
    out = []
    for asset_id in sorted(trades):
        state = LedgerState(asset_id)
        for t in trades[asset_id]:
            after = apply_trade(state, t)
            out.append(pnl_returns(state, after, t, t.price))
            state = after
    return out


def pnl_records(snaps):
    records = [
        [s.asset_id, s.as_of_seq, s.position, s.wavg_price, s.mark_price, s.realized_pnl,
         s.unrealized_pnl, s.realized_return, s.unrealized_return]
        for s in snaps
    ]
    return list(PNL_COLUMNS), records


def marks_from_series(series: dict) -> dict:
    return {a: float(s.prices[-1]) for a, s in series.items() if len(s)}


def holdings_from_ledger(
    trades: dict,
    series: dict,
    cfg: GuardConfig,
    stablecoins=(),
    lost_confidence=(),
    planned_volumes: Optional[dict] = None,
    reference_days: int = DEFAULT_REFERENCE_DAYS,
) -> list:
    """Build guard snapshots from ledger positions and the latest market data.

    Weights are position values over total portfolio value. The drop
    reference is the peak price over the trailing ``reference_days``
    calendar days, or the configured peg for stablecoins. Market volume in
    units is the mean of volume/price over the last ``volume_avg_days``
    observations.
    """
    planned_volumes = planned_volumes or {}
    stablecoins, lost_confidence = set(stablecoins), set(lost_confidence)
    positions = {}
    for asset_id, ts in trades.items():
        state = LedgerState(asset_id)
        for t in ts:
            state = apply_trade(state, t)
        if asset_id not in series or not len(series[asset_id]):
            raise ValidationError(f"no price series for traded asset {asset_id}")
        positions[asset_id] = state.position
    values = {a: pos * float(series[a].prices[-1]) for a, pos in positions.items()}
    total = math.fsum(values.values())
    out = []
    for asset_id in sorted(positions):
        s = series[asset_id]
        last = s.last_date
        cutoff = last - timedelta(days=reference_days)
        recent = [p for d, p in zip(s.dates, s.prices) if d > cutoff]
        n = cfg.volume_avg_days
        unit_volume = float(np.mean(s.volumes[-n:] / s.prices[-n:]))
        out.append(
            HoldingSnapshot(
                asset_id=asset_id,
                weight_pct=100.0 * values[asset_id] / total if total > 0 else 0.0,
                position_units=positions[asset_id],
                token_market_cap=float(s.market_caps[-1]),
                reference_price=cfg.stablecoin_peg if asset_id in stablecoins else float(max(recent)),
                current_price=float(s.prices[-1]),
                is_stablecoin=asset_id in stablecoins,
                confidence_lost=asset_id in lost_confidence,
                planned_day_volume_units=float(planned_volumes.get(asset_id, 0.0)),
                market_day_volume_units=unit_volume,
            )
        )
    return out


GUARD_COLUMNS = ("rule_id", "asset_id", "measured_value", "threshold", "severity")


def guard_records(report):
    return list(GUARD_COLUMNS), [
        [v.rule_id, v.asset_id, v.measured_value, v.threshold, v.severity.value] for v in report.violations
    ]


def parse_mode(text: str) -> MarketMode:
    return MarketMode.INSURANCE_INVERSE if text == "insurance" else MarketMode(text)
