"""Regenerate the synthetic fixtures in this directory (seeded, deterministic)."""

from datetime import date, timedelta
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
DAYS = 120
START = date(2022, 1, 1)
# asset: (start price, daily drift, daily vol, circulating supply, daily volume in units)
ASSETS = {
    "BTC": (40000.0, 0.0004, 0.035, 19_000_000, 600_000),
    "ETH": (3000.0, 0.0006, 0.045, 120_000_000, 9_000_000),
    "USDC": (1.0, 0.0, 0.0008, 45_000_000_000, 4_000_000_000),
}


def main():
    rng = np.random.default_rng(20220810)
    lines = ["date,asset_id,price,market_cap,volume"]
    for asset, (p0, mu, sigma, supply, units) in ASSETS.items():
        shocks = rng.normal(mu, sigma, DAYS - 1)
        prices = p0 * np.exp(np.concatenate([[0.0], np.cumsum(shocks)]))
        for i, p in enumerate(prices):
            p = round(float(p), 6)
            mcap = round(p * supply, 2)
            vol = round(p * units * float(rng.uniform(0.7, 1.3)), 2)
            lines.append(f"{(START + timedelta(days=i)).isoformat()},{asset},{p!r},{mcap!r},{vol!r}")
    (HERE / "series_3x120.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
