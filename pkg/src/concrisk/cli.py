"""Command line entry point: ``concrisk {metrics,cri,parity,pnl,guard}``.

Exit status is 0 on success, 2 on invalid input or usage, 1 on anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .cri import ChainMode, MarketContext, cri_multichain
from .errors import ConfigurationError, ValidationError
from .ingest import FundsConfig, load_funds, load_holdings, load_series, load_trades
from .report import (
    DEFAULT_HORIZON,
    compute_metrics_table,
    default_total_market_cap,
    format_csv,
    format_table,
    guard_records,
    holdings_from_ledger,
    marks_from_series,
    metrics_records,
    parity_details,
    parse_mode,
    pnl_history,
    pnl_records,
    pnl_statement,
)
from .riskguard import GuardConfig, load_guard_config, run_guard
from .timeseries import DEFAULT_ANNUALIZATION_DAYS, DEFAULT_WINDOW

log = logging.getLogger("concrisk")


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--series", help="price/market-cap/volume CSV")
    common.add_argument("--trades", help="trade ledger CSV")
    common.add_argument("--funds", help="fund composition TOML")
    common.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="volatility window in returns (default 90)")
    common.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help="reporting horizon in days (default 30)")
    common.add_argument("--risk-free", type=float, help="annual risk-free rate in percent, e.g. 8")
    common.add_argument(
        "--annualize-days", type=int, default=DEFAULT_ANNUALIZATION_DAYS, help="days per year (default 365)"
    )
    common.add_argument("--mode", choices=("standard", "insurance"), default="standard", help="market factor mode")
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--total-market-cap", type=float, help="override the total market capitalization")
    common.add_argument(
        "--horizon-return", action="store_true", help="use ln(P_t/P_{t-h}) instead of mean daily return x horizon"
    )
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="concrisk", description="Concentration risk and fund metrics")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("metrics", parents=[common], help="return, volatility and CRI table")

    p = sub.add_parser("cri", parents=[common], help="CRI per fund, Parity and asset")
    p.add_argument("--chain-mode", choices=("equal", "mcap"), default="equal")
    p.add_argument("--chain-benefit", action="store_true", help="divide the chain factor by the chain count")

    sub.add_parser("parity", parents=[common], help="Parity return, volatility and CRI")

    p = sub.add_parser("pnl", parents=[common], help="weighted-average-cost P&L statement")
    p.add_argument("--history", action="store_true", help="one row per trade, marked at the trade price")

    p = sub.add_parser("guard", parents=[common], help="five-pillar risk limit checks")
    p.add_argument("--holdings", help="holdings snapshot CSV")
    p.add_argument("--guard-config", help="key = value threshold file (percent units)")
    p.add_argument("--stablecoins", type=_csv_list, default=[], help="comma-separated stablecoin ids")
    p.add_argument("--lost-confidence", type=_csv_list, default=[], help="comma-separated ids to unwind")
    return parser


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ConfigurationError(f"{args.command} requires {flags}")


def _context(args, series, funds) -> MarketContext:
    if args.total_market_cap is not None:
        tmc = args.total_market_cap
    elif funds.total_market_cap is not None:
        tmc = funds.total_market_cap
    else:
        tmc = default_total_market_cap(series)
    return MarketContext(tmc, parse_mode(args.mode))


def _render(args, header, records) -> str:
    return (format_csv if args.format == "csv" else format_table)(header, records)


def _metrics_rows(args):
    _require(args, "series")
    series = load_series(args.series)
    funds = load_funds(args.funds) if args.funds else FundsConfig()
    ctx = _context(args, series, funds)
    rf = None if args.risk_free is None else args.risk_free / 100.0
    rows = compute_metrics_table(
        series, funds, ctx, args.window, args.horizon, rf, args.annualize_days, args.horizon_return
    )
    return rows, funds


def cmd_metrics(args, out):
    rows, _ = _metrics_rows(args)
    header, records = metrics_records(rows)
    out.write(_render(args, header, records))


def cmd_cri(args, out):
    rows, funds = _metrics_rows(args)
    header = ["name", "kind", "cri"]
    records = [[r.name, r.kind, r.cri] for r in rows]
    if funds.chains is not None:
        mode = ChainMode.EQUAL_SPLIT if args.chain_mode == "equal" else ChainMode.MCAP_PROPORTIONAL
        header.append("cri_multichain")
        for rec in records:
            rec.append(cri_multichain(rec[2], funds.chains, mode, args.chain_benefit))
    out.write(_render(args, header, records))


def cmd_parity(args, out):
    _require(args, "series", "funds")
    series = load_series(args.series)
    funds = load_funds(args.funds)
    d = parity_details(series, funds, _context(args, series, funds), args.window, args.horizon)
    labels = ("alpha", "beta", "gamma")
    records = [[f"mix_{f}", w] for f, w in zip(labels, d["mix"])]
    records += [[f"return_{f}", v] for f, v in zip(labels, d["fund_returns"])]
    records += [[f"vol_{f}", v] for f, v in zip(labels, d["fund_vols"])]
    records += [[f"corr_{p}", v] for p, v in zip(("alpha_beta", "alpha_gamma", "gamma_beta"), d["correlations"])]
    for key in ("parity_return", "parity_vol", "parity_vol_matrix", "parity_cri"):
        records.append([key, d[key]])
    out.write(_render(args, ["quantity", "value"], records))


def cmd_pnl(args, out):
    _require(args, "trades")
    trades = load_trades(args.trades)
    if args.history:
        snaps = pnl_history(trades)
    else:
        if args.series:
            marks = marks_from_series(load_series(args.series))
        else:
            marks = {a: ts[-1].price for a, ts in trades.items()}
        snaps = pnl_statement(trades, marks)
    header, records = pnl_records(snaps)
    if not args.history and snaps:
        records.append(
            ["TOTAL", "", "", "", "", sum(s.realized_pnl for s in snaps), sum(s.unrealized_pnl for s in snaps), "", ""]
        )
    out.write(_render(args, header, records))


def cmd_guard(args, out):
    cfg = load_guard_config(args.guard_config) if args.guard_config else GuardConfig()
    if args.holdings:
        holdings = load_holdings(args.holdings)
    else:
        if args.trades is None or args.series is None:
            raise ConfigurationError("guard requires --holdings, or both --trades and --series")
        holdings = holdings_from_ledger(
            load_trades(args.trades), load_series(args.series), cfg, args.stablecoins, args.lost_confidence
        )
    report = run_guard(holdings, cfg)
    if not report:
        out.write("no violations\n")
        return
    header, records = guard_records(report)
    out.write(_render(args, header, records))


COMMANDS = {
    "metrics": cmd_metrics,
    "cri": cmd_cri,
    "parity": cmd_parity,
    "pnl": cmd_pnl,
    "guard": cmd_guard,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args, out)
    except (ValidationError, OSError) as exc:
        print(f"concrisk: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        log.exception("internal error")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
