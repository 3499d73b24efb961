"""Weighted-average-cost position accounting (long only).

Buys move the average price; sells leave it untouched and realize
``|amount| * (price - average price)``. Short positions are rejected.

The realized return divides cumulative realized P&L by the cost basis of
the whole position held before the sell (average price times pre-sale
position), not by the basis of the quantity sold, so realized returns are
not additive across partial sells.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Iterable, Optional

from .errors import DomainError, NoCostBasisError, OversellError, ValidationError


@dataclass(frozen=True)
class Trade:
    seq: int
    timestamp: Optional[date]
    asset_id: str
    amount: float
    price: float

    def __post_init__(self):
        if self.seq < 1:
            raise ValidationError(f"trade seq must be positive, got {self.seq}")
        if self.amount == 0:
            raise ValidationError(f"trade {self.seq} on {self.asset_id} has zero amount")
        if not self.price > 0:
            raise DomainError(f"trade {self.seq} on {self.asset_id} has non-positive price {self.price!r}")

    @property
    def is_buy(self) -> bool:
        return self.amount > 0


@dataclass(frozen=True)
class LedgerState:
    asset_id: str
    position: float = 0.0
    wavg_price: float = 0.0
    realized_pnl: float = 0.0
    realized_return: float = 0.0
    last_seq: int = 0

    @property
    def has_basis(self) -> bool:
        return self.wavg_price > 0


@dataclass(frozen=True)
class PnlSnapshot:
    asset_id: str
    as_of_seq: int
    mark_price: float
    position: float
    wavg_price: float
    unrealized_pnl: float
    realized_pnl: float
    unrealized_return: float
    realized_return: float


def apply_trade(state: LedgerState, trade: Trade) -> LedgerState:
    """Return the state after ``trade``; ``state`` is not modified."""
    if trade.asset_id != state.asset_id:
        raise ValidationError(f"trade for {trade.asset_id} applied to ledger of {state.asset_id}")
    if trade.seq <= state.last_seq:
        raise ValidationError(
            f"{state.asset_id}: trade seq {trade.seq} does not follow {state.last_seq}"
        )
    a, p = trade.amount, trade.price
    if a > 0:
        pos = state.position + a
        wavg = (state.wavg_price * state.position + a * p) / pos
        return LedgerState(state.asset_id, pos, wavg, state.realized_pnl, state.realized_return, trade.seq)

    if not state.has_basis:
        raise NoCostBasisError(f"{state.asset_id}: sell at seq {trade.seq} before any buy")
    qty = -a
    if qty > state.position:
        raise OversellError(state.asset_id, qty, state.position)
    realized = state.realized_pnl + qty * (p - state.wavg_price)
    # denominator is the full pre-sale cost basis
    realized_return = realized / (state.wavg_price * state.position)
    return LedgerState(state.asset_id, state.position - qty, state.wavg_price, realized, realized_return, trade.seq)


def batch_wavg(trades: Iterable[Trade]) -> float:
    """Buy-only weighted mean price over the whole trade list."""
    num = den = 0.0
    for t in trades:
        if t.amount > 0:
            num += t.amount * t.price
            den += t.amount
    if den == 0:
        raise NoCostBasisError("no buy trades: weighted average price undefined")
    return num / den


def unrealized_pnl(state: LedgerState, mark_price: float) -> float:
    if state.position == 0:
        return 0.0
    return state.position * (mark_price - state.wavg_price)


def unrealized_return(state: LedgerState, mark_price: float) -> float:
    if state.position == 0:
        return 0.0
    return unrealized_pnl(state, mark_price) / (state.wavg_price * state.position)


def pnl_returns(state_before: LedgerState, state_after: LedgerState, trade: Trade, mark: float) -> PnlSnapshot:
    """P&L and returns at ``trade``, marking the open position at ``mark``.

    Realized return is zero at the first trade, recomputed on sells against
    the previous period's cost basis and carried forward on buys.
    """
    if not mark > 0:
        raise DomainError(f"mark price must be positive, got {mark!r}")
    if state_before.last_seq == 0:
        realized_ret = 0.0
    elif trade.amount < 0:
        realized_ret = state_after.realized_pnl / (state_before.wavg_price * state_before.position)
    else:
        realized_ret = state_before.realized_return
    return PnlSnapshot(
        asset_id=state_after.asset_id,
        as_of_seq=state_after.last_seq,
        mark_price=mark,
        position=state_after.position,
        wavg_price=state_after.wavg_price,
        unrealized_pnl=unrealized_pnl(state_after, mark),
        realized_pnl=state_after.realized_pnl,
        unrealized_return=unrealized_return(state_after, mark),
        realized_return=realized_ret,
    )


def replay(trades: Iterable[Trade], asset_id: Optional[str] = None) -> list:
    """Fold trades into the list of successive states (initial empty state excluded)."""
    trades = list(trades)
    if not trades:
        return []
    state = LedgerState(asset_id or trades[0].asset_id)
    states = []
    for t in trades:
        state = apply_trade(state, t)
        states.append(state)
    return states


def snapshot(state: LedgerState, mark_price: float) -> PnlSnapshot:
    """Mark an existing state without a trade."""
    if not mark_price > 0:
        raise DomainError(f"mark price must be positive, got {mark_price!r}")
    return PnlSnapshot(
        asset_id=state.asset_id,
        as_of_seq=state.last_seq,
        mark_price=mark_price,
        position=state.position,
        wavg_price=state.wavg_price,
        unrealized_pnl=unrealized_pnl(state, mark_price),
        realized_pnl=state.realized_pnl,
        unrealized_return=unrealized_return(state, mark_price),
        realized_return=state.realized_return,
    )


class PortfolioLedger:
    """Independent per-asset ledgers; portfolio P&L is the sum."""

    def __init__(self):
        self.states: dict = {}

    def apply(self, trade: Trade) -> LedgerState:
        state = self.states.get(trade.asset_id) or LedgerState(trade.asset_id)
        new = apply_trade(state, trade)
        self.states[trade.asset_id] = new
        return new

    def apply_all(self, trades: Iterable[Trade]) -> None:
        for t in trades:
            self.apply(t)

    def snapshots(self, marks: dict) -> list:
        out = []
        for asset_id in sorted(self.states):
            out.append(snapshot(self.states[asset_id], marks[asset_id]))
        return out
