"""Continuously compounded returns and rolling volatility on daily price series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientHistoryError, ValidationError

DEFAULT_WINDOW = 90
DEFAULT_ANNUALIZATION_DAYS = 365


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Daily observations for one asset.

    ``prices``, ``market_caps`` and ``volumes`` are aligned with ``dates``.
    Volumes are in quote currency per day.
    """

    asset_id: str
    dates: tuple
    prices: np.ndarray
    market_caps: np.ndarray
    volumes: np.ndarray

    def __post_init__(self):
        n = len(self.dates)
        object.__setattr__(self, "dates", tuple(self.dates))
        for name in ("prices", "market_caps", "volumes"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValidationError(f"{self.asset_id}: {name} has {arr.size} values for {n} dates")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValidationError(
                    f"{self.asset_id}: dates must be strictly increasing ({prev} then {cur})"
                )
        for d, p, mc, v in zip(self.dates, self.prices, self.market_caps, self.volumes):
            if not p > 0:
                raise DomainError(f"{self.asset_id}: non-positive price {p!r} on {d}")
            if mc < 0 or v < 0:
                raise DomainError(f"{self.asset_id}: negative market cap or volume on {d}")

    def __len__(self):
        return len(self.dates)

    @property
    def gaps(self) -> list:
        """(previous, next) date pairs more than one calendar day apart."""
        return [(a, b) for a, b in zip(self.dates, self.dates[1:]) if (b - a).days > 1]

    def index_of(self, day: date) -> Optional[int]:
        try:
            return self.dates.index(day)
        except ValueError:
            return None

    def price_on(self, day: date) -> float:
        i = self.index_of(day)
        if i is None:
            raise InsufficientHistoryError(f"{self.asset_id}: no price observation on {day}")
        return float(self.prices[i])

    @property
    def last_date(self) -> date:
        if not self.dates:
            raise InsufficientHistoryError(f"{self.asset_id}: empty series")
        return self.dates[-1]


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Log returns between consecutive observations; ``dates[i]`` is the later day."""

    asset_id: str
    dates: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.dates),):
            raise ValidationError(f"{self.asset_id}: {values.size} returns for {len(self.dates)} dates")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class VolEstimate:
    as_of: date
    window_days: int
    daily_vol: float
    mean_return: float
    n_obs: int
    partial_window: bool = False
    gaps: tuple = field(default=(), compare=False)


def log_return(p_now: float, p_prev: float, timestamp=None) -> float:
    """ln(p_now / p_prev)."""
    if not (p_now > 0 and p_prev > 0):
        where = f" at {timestamp}" if timestamp is not None else ""
        raise DomainError(f"log return needs positive prices{where}: got {p_now!r}, {p_prev!r}")
    return math.log(p_now / p_prev)


def log_returns(series: PriceSeries) -> ReturnSeries:
    """Consecutive-observation log returns. Calendar gaps are not interpolated."""
    prices = series.prices
    values = np.log(prices[1:] / prices[:-1]) if len(prices) > 1 else np.empty(0)
    return ReturnSeries(series.asset_id, series.dates[1:], values)


def horizon_return(series: PriceSeries, t: date, h_days: int) -> float:
    """ln(P_t / P_{t-h}) with both endpoints looked up by calendar day."""
    if h_days < 1:
        raise ValidationError(f"horizon must be a positive number of days, got {h_days}")
    start = t - timedelta(days=h_days)
    i_now, i_prev = series.index_of(t), series.index_of(start)
    if i_now is None or i_prev is None:
        missing = t if i_now is None else start
        raise InsufficientHistoryError(
            f"{series.asset_id}: {h_days}-day return at {t} needs a price on {missing}"
        )
    return log_return(float(series.prices[i_now]), float(series.prices[i_prev]), t)


def _window(returns: ReturnSeries, t: Optional[date], window: int):
    if window < 2:
        raise ValidationError(f"window must be at least 2 days, got {window}")
    if t is None:
        end = len(returns)
    else:
        idx = returns.dates.index(t) if t in returns.dates else None
        if idx is None:
            raise InsufficientHistoryError(f"{returns.asset_id}: no return observation on {t}")
        end = idx + 1
    start = max(0, end - window)
    return start, end


def rolling_vol(returns: ReturnSeries, t: Optional[date] = None, window: int = DEFAULT_WINDOW) -> VolEstimate:
    """Sample volatility of the trailing ``window`` returns ending at ``t`` (inclusive).

    With fewer than ``window`` returns available the estimate uses what
    exists and is flagged ``partial_window``. Fewer than two returns raise.
    ``t`` defaults to the last return date.
    """
    start, end = _window(returns, t, window)
    x = returns.values[start:end]
    n = x.size
    if n < 2:
        raise InsufficientHistoryError(
            f"{returns.asset_id}: need at least 2 returns for a volatility estimate, have {n}"
        )
    mean = float(x.sum() / n)
    dev = x - mean
    var = float((dev * dev).sum() / (n - 1))
    dates = returns.dates[start:end]
    gaps = tuple((a, b) for a, b in zip(dates, dates[1:]) if (b - a).days > 1)
    return VolEstimate(
        as_of=returns.dates[end - 1],
        window_days=window,
        daily_vol=math.sqrt(var),
        mean_return=mean,
        n_obs=n,
        partial_window=n < window,
        gaps=gaps,
    )


def rolling_vol_series(returns: ReturnSeries, window: int = DEFAULT_WINDOW):
    """Volatility and mean for every full trailing window.

    Returns ``(dates, vols, means)``; the first entry corresponds to the
    ``window``-th return.
    """
    if window < 2:
        raise ValidationError(f"window must be at least 2 days, got {window}")
    if len(returns) < window:
        return (), np.empty(0), np.empty(0)
    windows = np.lib.stride_tricks.sliding_window_view(returns.values, window)
    means = windows.mean(axis=1)
    vols = windows.std(axis=1, ddof=1)
    return returns.dates[window - 1:], vols, means


def scale_vol(daily_vol: float, h_days: int) -> float:
    """Square-root-of-time scaling from a daily to an ``h_days`` volatility."""
    if daily_vol < 0:
        raise DomainError(f"volatility must be non-negative, got {daily_vol!r}")
    return daily_vol * math.sqrt(h_days)


def scale_return(mean_daily: float, h_days: int) -> float:
    return mean_daily * h_days


def aligned_returns(series: Sequence[PriceSeries]):
    """Log returns on the days where every series has an observation.

    Returns ``(dates, matrix)`` with one column per series; each return is
    taken between consecutive common days.
    """
    if not series:
        return (), np.empty((0, 0))
    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    days = sorted(common)
    if len(days) < 2:
        return (), np.empty((0, len(series)))
    cols = []
    for s in series:
        lookup = dict(zip(s.dates, s.prices))
        p = np.array([lookup[d] for d in days])
        cols.append(np.log(p[1:] / p[:-1]))
    return tuple(days[1:]), np.column_stack(cols)
