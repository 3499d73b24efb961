from datetime import date

import numpy as np
import pytest

from concrisk.errors import ConfigurationError, NoCostBasisError, ParseError, ValidationError
from concrisk.ingest import (
    FileFeed,
    dump_series,
    dump_trades,
    load_funds,
    load_holdings,
    load_series,
    load_trades,
)

HEADER = "date,asset_id,price,market_cap,volume\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_series_file(tmp_path):
    assert load_series(write(tmp_path, "s.csv", HEADER)) == {}


def test_fixture_counts(fixtures_dir):
    series = load_series(fixtures_dir / "series_3x120.csv")
    assert sorted(series) == ["BTC", "ETH", "USDC"]
    assert all(len(s) == 120 for s in series.values())


def test_three_by_ninety(tmp_path):
    rows = [f"2022-{1 + d // 28:02d}-{1 + d % 28:02d},{a},{1 + d},{10 + d},{5}" for a in "ABC" for d in range(90)]
    series = load_series(write(tmp_path, "s.csv", HEADER + "\n".join(rows) + "\n"))
    assert {a: len(s) for a, s in series.items()} == {"A": 90, "B": 90, "C": 90}


def test_unsorted_rows_are_sorted(tmp_path):
    text = HEADER + "2022-01-03,A,3,1,1\n2022-01-01,A,1,1,1\n2022-01-02,A,2,1,1\n"
    s = load_series(write(tmp_path, "s.csv", text))["A"]
    assert list(s.prices) == [1, 2, 3]


def test_gaps_recorded(tmp_path):
    text = HEADER + "2022-01-01,A,1,1,1\n2022-01-04,A,2,1,1\n"
    assert load_series(write(tmp_path, "s.csv", text))["A"].gaps == [(date(2022, 1, 1), date(2022, 1, 4))]


def test_duplicate_row_names_line(tmp_path):
    text = HEADER + "2022-01-01,A,1,1,1\n2022-01-02,A,2,1,1\n2022-01-01,A,3,1,1\n"
    with pytest.raises(ParseError) as info:
        load_series(write(tmp_path, "s.csv", text))
    assert info.value.line == 4 and "A" in str(info.value)


@pytest.mark.parametrize(
    "row,needle",
    [
        ("2022-13-01,A,1,1,1", "date"),
        ("2022-01-01,A,abc,1,1", "price"),
        ("2022-01-01,A,0,1,1", "non-positive"),
        ("2022-01-01,A,1,-1,1", "negative"),
        ("2022-01-01,A,1,1", "fields"),
    ],
)
def test_bad_rows(tmp_path, row, needle):
    with pytest.raises(ParseError, match=needle):
        load_series(write(tmp_path, "s.csv", HEADER + row + "\n"))


def test_missing_header_column(tmp_path):
    with pytest.raises(ParseError, match="volume"):
        load_series(write(tmp_path, "s.csv", "date,asset_id,price,market_cap\n"))


def test_series_round_trip(fixtures_dir, tmp_path):
    original = load_series(fixtures_dir / "series_3x120.csv")
    again = load_series(write(tmp_path, "s.csv", dump_series(original)))
    assert sorted(again) == sorted(original)
    for a in original:
        assert again[a].dates == original[a].dates
        for col in ("prices", "market_caps", "volumes"):
            np.testing.assert_array_equal(getattr(again[a], col), getattr(original[a], col))
    assert dump_series(again) == dump_series(original)


TRADE_HEADER = "seq,date,asset_id,amount,price\n"


def test_single_buy(tmp_path):
    trades = load_trades(write(tmp_path, "t.csv", TRADE_HEADER + "1,2022-01-01,A,10,100\n"))
    assert len(trades["A"]) == 1 and trades["A"][0].amount == 10


def test_sell_first_rejected(tmp_path):
    with pytest.raises(NoCostBasisError):
        load_trades(write(tmp_path, "t.csv", TRADE_HEADER + "1,2022-01-01,A,-1,100\n"))


def test_interleaved_partition(tmp_path):
    rows = [(1, "A", 1), (2, "B", 2), (3, "A", -0.5), (4, "C", 1), (5, "B", 1), (6, "A", 2)]
    text = TRADE_HEADER + "".join(f"{s},2022-01-0{s},{a},{amt},10\n" for s, a, amt in rows)
    trades = load_trades(write(tmp_path, "t.csv", text))
    for asset in "ABC":
        expected = [s for s, a, _ in rows if a == asset]
        assert [t.seq for t in trades[asset]] == expected


def test_seq_must_increase_per_asset(tmp_path):
    text = TRADE_HEADER + "2,2022-01-01,A,1,10\n1,2022-01-02,A,1,10\n"
    with pytest.raises(ParseError, match="seq"):
        load_trades(write(tmp_path, "t.csv", text))


def test_zero_amount_row(tmp_path):
    with pytest.raises(ParseError, match="zero"):
        load_trades(write(tmp_path, "t.csv", TRADE_HEADER + "1,2022-01-01,A,0,10\n"))


def test_trades_round_trip(fixtures_dir, tmp_path):
    original = load_trades(fixtures_dir / "trades.csv")
    again = load_trades(write(tmp_path, "t.csv", dump_trades(original)))
    assert again == original


def test_funds_fixture(fixtures_dir):
    cfg = load_funds(fixtures_dir / "funds.toml")
    assert cfg.fund_names() == ["alpha", "beta", "gamma"]
    assert cfg.parity_mix == (0.5, 0.3, 0.2)
    assert cfg.total_market_cap == 2.0e12
    assert cfg.chains.n_chains == 3


@pytest.mark.parametrize(
    "text",
    [
        "[funds.alpha]\nA = 0.5\n",
        "[funds.alpha]\nA = 1.0\n[parity]\nalpha = 1.0\nbeta = 0\ngamma = 0\n",
        "[funds.alpha]\nA = 1.0\n[parity]\nalpha = 1.0\n",
        "[oops]\nx = 1\n",
        "not toml [",
    ],
)
def test_bad_funds(tmp_path, text):
    with pytest.raises(ConfigurationError):
        load_funds(write(tmp_path, "f.toml", text))


def test_holdings(fixtures_dir):
    holdings = load_holdings(fixtures_dir / "holdings_clean.csv")
    assert [x.asset_id for x in holdings] == ["BTC", "ETH", "USDC"]
    assert holdings[2].is_stablecoin and not holdings[0].is_stablecoin


def test_holdings_bad_bool(tmp_path):
    with pytest.raises(ParseError):
        load_holdings(write(tmp_path, "h.csv", "asset_id,is_stablecoin\nA,maybe\n"))


def test_file_feed(fixtures_dir):
    assert sorted(FileFeed(fixtures_dir / "series_3x120.csv").fetch_series()) == ["BTC", "ETH", "USDC"]
