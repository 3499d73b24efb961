"""Five-pillar risk limit checks on a holdings snapshot.

All thresholds are in percent and every rule fires only when the measured
value is strictly greater than its threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional

from .errors import ConfigurationError, DomainError, ValidationError

PORTFOLIO = "*"


class Severity(str, enum.Enum):
    ADVISORY = "advisory"
    BREACH = "breach"


RULE_IDS = (
    "P1_WEIGHT_SOFT",
    "P1_WEIGHT_HARD",
    "P1_BAND_COUNT",
    "P2_UNWIND",
    "P3_DROP_HOLD",
    "P3_STABLE_DEPEG",
    "P4_MCAP_SHARE",
    "P5_VOLUME_SHARE",
)


@dataclass(frozen=True)
class GuardConfig:
    x_pct: float = 10.0
    y_pct: float = 15.0
    n_max: int = 3
    # when set, N is resolved as this percentile of the portfolio size
    n_percentile: Optional[float] = None
    z_pct: float = 25.0
    s_pct: float = 10.0
    m_pct: float = 5.0
    v_pct: float = 10.0
    volume_avg_days: int = 30
    stablecoin_peg: float = 1.0
    mcap_exceptions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "mcap_exceptions", frozenset(self.mcap_exceptions))
        for name in ("x_pct", "y_pct", "z_pct", "s_pct", "m_pct", "v_pct"):
            v = getattr(self, name)
            if not 0 < v <= 100:
                raise ConfigurationError(f"{name} must be in (0, 100], got {v!r}")
        if self.x_pct > self.y_pct:
            raise ConfigurationError(f"x_pct ({self.x_pct}) must not exceed y_pct ({self.y_pct})")
        if self.n_max < 0:
            raise ConfigurationError(f"n_max must be non-negative, got {self.n_max}")
        if self.n_percentile is not None and not 0 < self.n_percentile <= 100:
            raise ConfigurationError(f"n_percentile must be in (0, 100], got {self.n_percentile!r}")
        if self.volume_avg_days < 1:
            raise ConfigurationError("volume_avg_days must be positive")
        if not self.stablecoin_peg > 0:
            raise ConfigurationError("stablecoin_peg must be positive")

    def resolved_n(self, portfolio_size: int) -> int:
        """Band-count limit; nearest-rank percentile of the asset count when configured."""
        if self.n_percentile is None:
            return self.n_max
        if portfolio_size == 0:
            return 0
        return math.ceil(self.n_percentile / 100 * portfolio_size)

    @classmethod
    def from_mapping(cls, data: dict) -> "GuardConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigurationError(f"unknown guard config key {key!r}")
            if key == "mcap_exceptions":
                if isinstance(value, str):
                    value = [v.strip() for v in value.split(",") if v.strip()]
                kwargs[key] = frozenset(value)
            elif key in ("n_max", "volume_avg_days"):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        out = asdict(self)
        out["mcap_exceptions"] = ",".join(sorted(self.mcap_exceptions))
        if out["n_percentile"] is None:
            del out["n_percentile"]
        return out


def load_guard_config(path) -> GuardConfig:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    data = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            data[key] = value.strip("\"'")
    try:
        return GuardConfig.from_mapping(data)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ConfigurationError(f"{path}: {exc}") from None


def dump_guard_config(cfg: GuardConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_mapping().items())


@dataclass(frozen=True)
class HoldingSnapshot:
    asset_id: str
    weight_pct: float = 0.0
    position_units: float = 0.0
    token_market_cap: float = 0.0
    reference_price: float = 0.0
    current_price: float = 0.0
    is_stablecoin: bool = False
    confidence_lost: bool = False
    planned_day_volume_units: float = 0.0
    market_day_volume_units: float = 0.0

    def __post_init__(self):
        if self.weight_pct < 0:
            raise ValidationError(f"{self.asset_id}: negative weight")
        if self.planned_day_volume_units < 0 or self.market_day_volume_units < 0:
            raise ValidationError(f"{self.asset_id}: negative volume")


@dataclass(frozen=True, order=True)
class Violation:
    rule_id: str
    asset_id: str
    measured_value: float
    threshold: float
    severity: Severity

    def as_record(self) -> str:
        return (
            f"{self.rule_id} {self.asset_id} measured={self.measured_value!r} "
            f"threshold={self.threshold!r} severity={self.severity.value}"
        )


@dataclass(frozen=True)
class GuardReport:
    violations: tuple = ()

    def __bool__(self):
        return bool(self.violations)

    def rule_ids(self) -> list:
        return [v.rule_id for v in self.violations]


def _sorted(violations: Iterable[Violation]) -> list:
    return sorted(violations, key=lambda v: (v.rule_id, v.asset_id))


def check_weights(holdings, cfg: GuardConfig) -> list:
    holdings = list(holdings)
    out = []
    in_band = 0
    for h in holdings:
        if h.weight_pct > cfg.y_pct:
            out.append(Violation("P1_WEIGHT_HARD", h.asset_id, h.weight_pct, cfg.y_pct, Severity.BREACH))
        elif h.weight_pct > cfg.x_pct:
            in_band += 1
            out.append(Violation("P1_WEIGHT_SOFT", h.asset_id, h.weight_pct, cfg.x_pct, Severity.ADVISORY))
    n = cfg.resolved_n(len(holdings))
    if in_band > n:
        out.append(Violation("P1_BAND_COUNT", PORTFOLIO, float(in_band), float(n), Severity.BREACH))
    return _sorted(out)


def check_unwind(holdings) -> list:
    return _sorted(
        Violation("P2_UNWIND", h.asset_id, h.position_units, 0.0, Severity.BREACH)
        for h in holdings
        if h.confidence_lost and h.position_units > 0
    )


def drop_pct(reference: float, current: float) -> float:
    return 100.0 * (1.0 - current / reference)


def check_drawdown(holdings, cfg: GuardConfig) -> list:
    out = []
    for h in holdings:
        if not h.reference_price > 0:
            raise DomainError(f"{h.asset_id}: reference price must be positive, got {h.reference_price!r}")
        drop = drop_pct(h.reference_price, h.current_price)
        if h.is_stablecoin:
            if drop > cfg.s_pct:
                out.append(Violation("P3_STABLE_DEPEG", h.asset_id, drop, cfg.s_pct, Severity.BREACH))
        elif drop > cfg.z_pct:
            out.append(Violation("P3_DROP_HOLD", h.asset_id, drop, cfg.z_pct, Severity.ADVISORY))
    return _sorted(out)


def check_mcap_share(holdings, cfg: GuardConfig) -> list:
    out = []
    for h in holdings:
        if not h.token_market_cap > 0:
            raise DomainError(f"{h.asset_id}: token market cap must be positive")
        if h.asset_id in cfg.mcap_exceptions:
            continue
        value = h.position_units * h.current_price
        if value * 100 > cfg.m_pct * h.token_market_cap:
            share = 100.0 * value / h.token_market_cap
            out.append(Violation("P4_MCAP_SHARE", h.asset_id, share, cfg.m_pct, Severity.BREACH))
    return _sorted(out)


def check_volume_share(holdings, cfg: GuardConfig) -> list:
    out = []
    for h in holdings:
        if h.planned_day_volume_units == 0:
            continue
        if not h.market_day_volume_units > 0:
            raise DomainError(f"{h.asset_id}: zero market volume, token is untradeable")
        if h.planned_day_volume_units * 100 > cfg.v_pct * h.market_day_volume_units:
            share = 100.0 * h.planned_day_volume_units / h.market_day_volume_units
            out.append(Violation("P5_VOLUME_SHARE", h.asset_id, share, cfg.v_pct, Severity.BREACH))
    return _sorted(out)


def run_guard(holdings, cfg: Optional[GuardConfig] = None) -> GuardReport:
    cfg = cfg or GuardConfig()
    holdings = list(holdings)
    violations = []
    for check in (
        lambda: check_weights(holdings, cfg),
        lambda: check_unwind(holdings),
        lambda: check_drawdown(holdings, cfg),
        lambda: check_mcap_share(holdings, cfg),
        lambda: check_volume_share(holdings, cfg),
    ):
        violations.extend(check())
    return GuardReport(tuple(_sorted(violations)))
