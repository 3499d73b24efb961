from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from concrisk.timeseries import PriceSeries

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def make_series(prices, asset_id="X", start=date(2022, 1, 1), mcap=1e9, volume=1e6):
    prices = np.asarray(prices, dtype=float)
    dates = [start + timedelta(days=i) for i in range(len(prices))]
    return PriceSeries(asset_id, dates, prices, np.full(len(prices), mcap), np.full(len(prices), volume))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
