"""Flat-file loaders for price series, trades, fund compositions and holdings.

Series files are comma-delimited with a header naming the columns
``date,asset_id,price,market_cap,volume``; trade files use
``seq,date,asset_id,amount,price``. Dates are ISO-8601 calendar days.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Optional, Protocol

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cri import Chain, ChainAllocation, PARITY_FUNDS, WEIGHT_TOL
from .errors import ConfigurationError, NoCostBasisError, ParseError, ValidationError
from .ledger import Trade
from .riskguard import HoldingSnapshot
from .timeseries import PriceSeries

SERIES_COLUMNS = ("date", "asset_id", "price", "market_cap", "volume")
TRADE_COLUMNS = ("seq", "date", "asset_id", "amount", "price")
HOLDING_COLUMNS = (
    "asset_id",
    "weight_pct",
    "position_units",
    "token_market_cap",
    "reference_price",
    "current_price",
    "is_stablecoin",
    "confidence_lost",
    "planned_day_volume_units",
    "market_day_volume_units",
)

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


def _rows(path, required):
    """Yield (line_number, row dict) after checking the header."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(path, 1, "missing header row")
        header = [c.strip() for c in reader.fieldnames]
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(path, 1, f"header lacks column(s) {', '.join(missing)}")
        reader.fieldnames = header
        for row in reader:
            if all(not (v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            if None in row or any(row[c] is None for c in required):
                raise ParseError(path, reader.line_num, "wrong number of fields")
            yield reader.line_num, {k: v.strip() for k, v in row.items()}


def _float(path, line, row, col):
    try:
        value = float(row[col])
    except ValueError:
        raise ParseError(path, line, f"{col}: not a number: {row[col]!r}") from None
    if not math.isfinite(value):
        raise ParseError(path, line, f"{col}: not finite: {row[col]!r}")
    return value


def _date(path, line, text):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ParseError(path, line, f"date: not an ISO calendar day: {text!r}") from None


def _bool(path, line, row, col):
    text = row.get(col, "").lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ParseError(path, line, f"{col}: not a boolean: {row[col]!r}")


def load_series(path) -> dict:
    """Map asset_id to a validated :class:`PriceSeries` sorted by date."""
    by_asset = defaultdict(dict)
    for line, row in _rows(path, SERIES_COLUMNS):
        asset = row["asset_id"]
        if not asset:
            raise ParseError(path, line, "empty asset_id")
        day = _date(path, line, row["date"])
        if day in by_asset[asset]:
            raise ParseError(path, line, f"duplicate row for ({asset}, {day})")
        price = _float(path, line, row, "price")
        mcap = _float(path, line, row, "market_cap")
        vol = _float(path, line, row, "volume")
        if price <= 0:
            raise ParseError(path, line, f"non-positive price for ({asset}, {day})")
        if mcap < 0 or vol < 0:
            raise ParseError(path, line, f"negative market_cap or volume for ({asset}, {day})")
        by_asset[asset][day] = (price, mcap, vol)
    out = {}
    for asset in sorted(by_asset):
        days = sorted(by_asset[asset])
        obs = [by_asset[asset][d] for d in days]
        out[asset] = PriceSeries(
            asset,
            tuple(days),
            [o[0] for o in obs],
            [o[1] for o in obs],
            [o[2] for o in obs],
        )
    return out


def load_trades(path) -> dict:
    """Map asset_id to its trades in file order.

    Sequence numbers must increase strictly within each asset and the first
    trade of every asset must be a buy.
    """
    out = defaultdict(list)
    for line, row in _rows(path, TRADE_COLUMNS):
        asset = row["asset_id"]
        if not asset:
            raise ParseError(path, line, "empty asset_id")
        try:
            seq = int(row["seq"])
        except ValueError:
            raise ParseError(path, line, f"seq: not an integer: {row['seq']!r}") from None
        amount = _float(path, line, row, "amount")
        price = _float(path, line, row, "price")
        day = _date(path, line, row["date"]) if row["date"] else None
        prior = out[asset]
        if prior and seq <= prior[-1].seq:
            raise ParseError(path, line, f"{asset}: seq {seq} does not increase (previous {prior[-1].seq})")
        if not prior and amount < 0:
            raise NoCostBasisError(f"{path}:{line}: first trade for {asset} is a sell")
        try:
            prior.append(Trade(seq, day, asset, amount, price))
        except ValidationError as exc:
            raise ParseError(path, line, str(exc)) from None
    return dict(out)


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_series(series: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_COLUMNS)
    for asset in sorted(series):
        s = series[asset]
        for d, p, mc, v in zip(s.dates, s.prices, s.market_caps, s.volumes):
            w.writerow([d.isoformat(), asset, _fmt(p), _fmt(mc), _fmt(v)])
    return buf.getvalue()


def dump_trades(trades: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRADE_COLUMNS)
    rows = [t for asset in sorted(trades) for t in trades[asset]]
    for t in rows:
        w.writerow([t.seq, t.timestamp.isoformat() if t.timestamp else "", t.asset_id, _fmt(t.amount), _fmt(t.price)])
    return buf.getvalue()


def load_holdings(path) -> list:
    out = []
    seen = set()
    for line, row in _rows(path, ("asset_id",)):
        asset = row["asset_id"]
        if asset in seen:
            raise ParseError(path, line, f"duplicate holding for {asset}")
        seen.add(asset)
        kwargs = {"asset_id": asset}
        for col in HOLDING_COLUMNS[1:]:
            if col not in row:
                continue
            if col in ("is_stablecoin", "confidence_lost"):
                kwargs[col] = _bool(path, line, row, col)
            elif row[col] != "":
                kwargs[col] = _float(path, line, row, col)
        try:
            out.append(HoldingSnapshot(**kwargs))
        except ValidationError as exc:
            raise ParseError(path, line, str(exc)) from None
    return out


@dataclass
class FundsConfig:
    """Fund compositions as ``{fund: {asset: weight}}`` plus optional extras."""

    funds: dict = field(default_factory=dict)
    parity_mix: Optional[tuple] = None
    total_market_cap: Optional[float] = None
    chains: Optional[ChainAllocation] = None

    def fund_names(self) -> list:
        """alpha, beta, gamma first, then any other funds alphabetically."""
        known = [f for f in PARITY_FUNDS if f in self.funds]
        return known + sorted(f for f in self.funds if f not in PARITY_FUNDS)


def parse_funds(data: dict, source="<funds>") -> FundsConfig:
    cfg = FundsConfig()
    for name, weights in (data.get("funds") or {}).items():
        if not isinstance(weights, dict) or not weights:
            raise ConfigurationError(f"{source}: fund {name!r} needs asset = weight entries")
        try:
            parsed = {str(a): float(w) for a, w in weights.items()}
        except (TypeError, ValueError):
            raise ConfigurationError(f"{source}: fund {name!r} has a non-numeric weight") from None
        total = math.fsum(parsed.values())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ConfigurationError(f"{source}: weights of fund {name!r} sum to {total!r}, expected 1")
        cfg.funds[str(name)] = parsed
    parity = data.get("parity")
    if parity is not None:
        try:
            cfg.parity_mix = tuple(float(parity[f]) for f in PARITY_FUNDS)
        except KeyError as exc:
            raise ConfigurationError(f"{source}: parity mix lacks {exc.args[0]!r}") from None
        missing = [f for f in PARITY_FUNDS if f not in cfg.funds]
        if missing:
            raise ConfigurationError(f"{source}: parity needs fund(s) {', '.join(missing)}")
    market = data.get("market") or {}
    if "total_market_cap" in market:
        cfg.total_market_cap = float(market["total_market_cap"])
    chains = data.get("chains")
    if chains:
        items = []
        for chain_id, spec in chains.items():
            if isinstance(spec, dict):
                items.append(Chain(str(chain_id), float(spec["weight"]), spec.get("market_cap")))
            else:
                items.append(Chain(str(chain_id), float(spec)))
        cfg.chains = ChainAllocation(tuple(items))
    unknown = set(data) - {"funds", "parity", "market", "chains"}
    if unknown:
        raise ConfigurationError(f"{source}: unknown section(s) {', '.join(sorted(unknown))}")
    return cfg


def load_funds(path) -> FundsConfig:
    """Read a TOML fund file::

        [funds.alpha]
        BTC = 0.6
        ETH = 0.4

        [parity]
        alpha = 0.5
        beta = 0.3
        gamma = 0.2
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return parse_funds(data, source=str(path))


class PriceFeed(Protocol):
    """Source of price series; only the file-backed feed ships."""

    def fetch_series(self) -> dict: ...


class FileFeed:
    def __init__(self, path):
        self.path = Path(path)

    def fetch_series(self) -> dict:
        return load_series(self.path)
