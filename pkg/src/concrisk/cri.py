"""Concentration Risk Indicator.

A Herfindahl-Hirschman style score where each squared weight is scaled by
the asset's volatility over its share of total market capitalization::

    CRI = (1/k) * sum_i (vol_i / m_i) * w_i**2,    m_i = MC_i / TMC

Lower is less concentrated. Also provides the three-fund Parity
aggregation (return, volatility, CRI) and multi-chain allocation factors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    EmptyPortfolioError,
    InvalidCorrelationError,
    ValidationError,
)

WEIGHT_TOL = 1e-9
PARITY_FUNDS = ("alpha", "beta", "gamma")


class MarketMode(str, enum.Enum):
    STANDARD = "standard"
    # share ratio inverted: a larger share of market-wide liabilities is worse
    INSURANCE_INVERSE = "insurance_inverse"


@dataclass(frozen=True)
class AssetRiskInput:
    asset_id: str
    vol: float
    market_cap: float
    weight: float
    horizon_days: Optional[int] = None

    def __post_init__(self):
        if not self.vol >= 0:
            raise DomainError(f"{self.asset_id}: volatility must be non-negative, got {self.vol!r}")
        if not self.market_cap > 0:
            raise DomainError(f"{self.asset_id}: market cap must be positive, got {self.market_cap!r}")
        if not 0 <= self.weight <= 1:
            raise DomainError(f"{self.asset_id}: weight {self.weight!r} outside [0, 1]")


@dataclass(frozen=True)
class MarketContext:
    total_market_cap: float
    mode: MarketMode = MarketMode.STANDARD

    def __post_init__(self):
        if not self.total_market_cap > 0:
            raise DomainError(f"total market cap must be positive, got {self.total_market_cap!r}")
        object.__setattr__(self, "mode", MarketMode(self.mode))


@dataclass(frozen=True)
class FundSpec:
    fund_id: str
    assets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        if self.assets:
            total = math.fsum(a.weight for a in self.assets)
            if abs(total - 1.0) > WEIGHT_TOL:
                raise ValidationError(f"fund {self.fund_id}: weights sum to {total!r}, expected 1")

    def check_horizons(self) -> Optional[int]:
        """The common volatility horizon of the assets, if any was recorded."""
        horizons = {a.horizon_days for a in self.assets if a.horizon_days is not None}
        if len(horizons) > 1:
            raise ConfigurationError(
                f"fund {self.fund_id} mixes volatility horizons {sorted(horizons)}"
            )
        return horizons.pop() if horizons else None


def _check_mix(mix: Sequence[float]) -> tuple:
    mix = tuple(float(w) for w in mix)
    if len(mix) != 3:
        raise ValidationError(f"parity mix needs exactly three weights, got {len(mix)}")
    if any(not 0 <= w <= 1 for w in mix):
        raise ValidationError(f"parity mix weights must lie in [0, 1]: {mix}")
    if abs(math.fsum(mix) - 1.0) > WEIGHT_TOL:
        raise ValidationError(f"parity mix sums to {math.fsum(mix)!r}, expected 1")
    return mix


@dataclass(frozen=True)
class ParitySpec:
    """Inputs for the three-fund Parity composite.

    Correlations are ordered (alpha-beta, alpha-gamma, gamma-beta).
    """

    mix: tuple
    fund_returns: tuple = (0.0, 0.0, 0.0)
    fund_vols: tuple = (0.0, 0.0, 0.0)
    correlations: tuple = (0.0, 0.0, 0.0)
    funds: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "mix", _check_mix(self.mix))
        for name in ("fund_returns", "fund_vols", "correlations"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 3:
                raise ValidationError(f"parity {name} needs three values, got {len(vals)}")
            object.__setattr__(self, name, vals)
        if any(not s >= 0 for s in self.fund_vols):
            raise DomainError(f"fund volatilities must be non-negative: {self.fund_vols}")
        if any(not -1 <= r <= 1 for r in self.correlations):
            raise InvalidCorrelationError(f"correlations must lie in [-1, 1]: {self.correlations}")
        if self.funds is not None:
            object.__setattr__(self, "funds", tuple(self.funds))
            if len(self.funds) != 3:
                raise ValidationError("parity needs exactly three sub-funds")

    def correlation_matrix(self) -> np.ndarray:
        ab, ag, gb = self.correlations
        return np.array([[1.0, ab, ag], [ab, 1.0, gb], [ag, gb, 1.0]])

    def covariance_matrix(self) -> np.ndarray:
        s = np.asarray(self.fund_vols)
        return self.correlation_matrix() * np.outer(s, s)


def market_factor(asset: AssetRiskInput, ctx: MarketContext) -> float:
    """MC/TMC in standard mode, TMC/MC in insurance mode."""
    if not ctx.total_market_cap > 0:
        raise DomainError("total market cap must be positive")
    if not asset.market_cap > 0:
        raise DomainError(f"{asset.asset_id}: market cap must be positive")
    if ctx.mode is MarketMode.INSURANCE_INVERSE:
        return ctx.total_market_cap / asset.market_cap
    return asset.market_cap / ctx.total_market_cap


def _cri_terms(assets: Sequence[AssetRiskInput], weights: Sequence[float], ctx: MarketContext) -> float:
    biggest = max(a.market_cap for a in assets)
    if biggest > ctx.total_market_cap:
        raise DomainError(
            f"asset market cap {biggest!r} exceeds total market cap {ctx.total_market_cap!r}"
        )
    total = 0.0
    for a, w in zip(assets, weights):
        total += a.vol / market_factor(a, ctx) * w * w
    return total / len(assets)


def cri_portfolio(fund: FundSpec, ctx: MarketContext) -> float:
    """CRI of a fund. A one-asset fund reduces to vol / m."""
    if not fund.assets:
        raise EmptyPortfolioError(f"fund {fund.fund_id} has no assets")
    fund.check_horizons()
    return _cri_terms(fund.assets, [a.weight for a in fund.assets], ctx)


def cri_single(asset_id: str, vol: float, market_cap: float, ctx: MarketContext, horizon_days=None) -> float:
    return cri_portfolio(FundSpec(asset_id, (AssetRiskInput(asset_id, vol, market_cap, 1.0, horizon_days),)), ctx)


def parity_return(spec: ParitySpec) -> float:
    return sum(r * w for r, w in zip(spec.fund_returns, spec.mix))


def _parity_variance_expanded(spec: ParitySpec) -> float:
    wa, wb, wg = spec.mix
    sa, sb, sg = spec.fund_vols
    r_ab, r_ag, r_gb = spec.correlations
    return (
        sa**2 * wa**2
        + sb**2 * wb**2
        + sg**2 * wg**2
        + 2 * wa * wb * sa * sb * r_ab
        + 2 * wa * wg * sa * sg * r_ag
        + 2 * wg * wb * sg * sb * r_gb
    )


def _checked_sqrt(var: float, spec: ParitySpec) -> float:
    # rounding can leave a perfectly hedged variance a hair below zero
    scale = sum(w * s for w, s in zip(spec.mix, spec.fund_vols)) ** 2
    if var < -1e-12 * max(scale, 1e-300):
        raise InvalidCorrelationError(
            f"parity variance is negative ({var!r}); correlations {spec.correlations} are inconsistent"
        )
    return math.sqrt(max(var, 0.0))


def _check_psd(spec: ParitySpec) -> None:
    eig = np.linalg.eigvalsh(spec.correlation_matrix())
    if eig[0] < -1e-12:
        raise InvalidCorrelationError(
            f"correlations {spec.correlations} do not form a positive semidefinite matrix "
            f"(smallest eigenvalue {eig[0]:.3g})"
        )


def parity_vol(spec: ParitySpec) -> float:
    """Parity volatility from the three-fund expanded formula."""
    _check_psd(spec)
    return _checked_sqrt(_parity_variance_expanded(spec), spec)


def parity_vol_matrix(spec: ParitySpec) -> float:
    """Same quantity as :func:`parity_vol`, computed as sqrt(w' X w)."""
    _check_psd(spec)
    w = np.asarray(spec.mix)
    return _checked_sqrt(float(w @ spec.covariance_matrix() @ w), spec)


def flatten_parity(funds: Sequence[FundSpec], mix: Sequence[float]) -> list:
    """(asset, modified weight) for every asset slot across the sub-funds.

    The same asset held by two funds appears twice; nothing is netted.
    """
    mix = _check_mix(mix)
    if len(funds) != 3:
        raise ValidationError("parity needs exactly three sub-funds")
    return [(a, a.weight * w_fund) for fund, w_fund in zip(funds, mix) for a in fund.assets]


def parity_cri(funds: Sequence[FundSpec], mix: Sequence[float], ctx: MarketContext) -> float:
    """CRI over all sub-fund assets with weights scaled by each fund's mix weight."""
    slots = flatten_parity(funds, mix)
    if not slots:
        raise EmptyPortfolioError("parity sub-funds hold no assets")
    horizons = {f.check_horizons() for f in funds if f.assets} - {None}
    if len(horizons) > 1:
        raise ConfigurationError(f"parity sub-funds mix volatility horizons {sorted(horizons)}")
    assets = [a for a, _ in slots]
    return _cri_terms(assets, [w for _, w in slots], ctx)


@dataclass(frozen=True)
class Chain:
    chain_id: str
    weight: float
    market_cap: Optional[float] = None


@dataclass(frozen=True)
class ChainAllocation:
    chains: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(self.chains))
        if not self.chains:
            raise DomainError("chain allocation needs at least one chain")
        for c in self.chains:
            if not c.weight > 0:
                raise DomainError(f"chain {c.chain_id}: allocation weight must be positive, got {c.weight!r}")
        total = math.fsum(c.weight for c in self.chains)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"chain allocation weights sum to {total!r}, expected 1")

    @property
    def n_chains(self) -> int:
        return len(self.chains)


class ChainMode(str, enum.Enum):
    EQUAL_SPLIT = "equal_split"
    MCAP_PROPORTIONAL = "mcap_proportional"


def multichain_factor_equal(alloc: ChainAllocation) -> float:
    """(1/N^2) * sum(1/CW_i); one at the uniform split, larger otherwise."""
    n = alloc.n_chains
    return sum(1.0 / c.weight for c in alloc.chains) / (n * n)


def multichain_factor_mcap(alloc: ChainAllocation) -> float:
    """(1/N) * (1/sum MC) * sum(MC_i / CW_i); one when CW is proportional to MC."""
    caps = [c.market_cap for c in alloc.chains]
    if any(mc is None or not mc > 0 for mc in caps):
        raise DomainError("market-cap chain factor needs a positive market cap for every chain")
    total = math.fsum(caps)
    return sum(mc / c.weight for mc, c in zip(caps, alloc.chains)) / (alloc.n_chains * total)


def multichain_benefit(mcf: float, n_chains: int) -> float:
    if n_chains < 1:
        raise DomainError(f"number of chains must be positive, got {n_chains}")
    if mcf < 0:
        raise DomainError(f"chain factor must be non-negative, got {mcf!r}")
    return mcf / n_chains


def cri_multichain(fund_cri: float, alloc: ChainAllocation, mode=ChainMode.EQUAL_SPLIT, apply_benefit: bool = False) -> float:
    if fund_cri < 0:
        raise DomainError(f"CRI must be non-negative, got {fund_cri!r}")
    mode = ChainMode(mode)
    if mode is ChainMode.EQUAL_SPLIT:
        mcf = multichain_factor_equal(alloc)
    else:
        mcf = multichain_factor_mcap(alloc)
    if apply_benefit:
        mcf = multichain_benefit(mcf, alloc.n_chains)
    return fund_cri * mcf
