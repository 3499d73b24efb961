import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concrisk.errors import DomainError, InsufficientHistoryError, ValidationError
from concrisk.timeseries import (
    PriceSeries,
    ReturnSeries,
    aligned_returns,
    horizon_return,
    log_return,
    log_returns,
    rolling_vol,
    rolling_vol_series,
    scale_vol,
)
from conftest import make_series
from oracles import two_pass_std

prices = st.floats(min_value=1e-6, max_value=1e9, allow_nan=False, allow_infinity=False)


def returns_of(values, start=date(2022, 1, 2)):
    return ReturnSeries("X", [start + timedelta(days=i) for i in range(len(values))], values)


class TestLogReturn:
    def test_identity(self):
        assert log_return(100, 100) == 0.0

    def test_e(self):
        assert log_return(100 * math.e, 100) == pytest.approx(1.0, rel=1e-15)

    def test_ten_percent(self):
        assert log_return(110, 100) == pytest.approx(0.09531017980432493, rel=1e-14)

    @pytest.mark.parametrize("now,prev", [(0, 100), (100, 0), (-1, 5)])
    def test_non_positive(self, now, prev):
        with pytest.raises(DomainError, match="2022-03-04"):
            log_return(now, prev, timestamp=date(2022, 3, 4))

    @given(prices, prices)
    def test_antisymmetric(self, a, b):
        assert log_return(a, b) == pytest.approx(-log_return(b, a), abs=1e-12)


class TestHorizonReturn:
    def test_constant(self):
        s = make_series([5.0] * 40)
        assert horizon_return(s, s.last_date, 30) == 0.0

    def test_doubling(self):
        p = [1.0] * 31
        p[-1] = 2.0
        s = make_series(p)
        assert horizon_return(s, s.last_date, 30) == pytest.approx(math.log(2), rel=1e-15)

    def test_one_percent_a_day(self):
        s = make_series([100 * 1.01**i for i in range(31)])
        assert horizon_return(s, s.last_date, 30) == pytest.approx(0.29850992559504275, rel=1e-12)

    def test_missing_endpoint(self):
        s = make_series([1.0] * 10)
        with pytest.raises(InsufficientHistoryError):
            horizon_return(s, s.last_date, 30)

    def test_gap_at_start_day(self):
        s = make_series([1.0, 2.0, 3.0])
        gappy = PriceSeries("G", [s.dates[0], s.dates[2]], [1.0, 3.0], [1, 1], [1, 1])
        with pytest.raises(InsufficientHistoryError, match="G"):
            horizon_return(gappy, gappy.last_date, 1)

    @settings(max_examples=50)
    @given(st.lists(st.floats(-0.2, 0.2), min_size=1, max_size=60))
    def test_telescoping(self, rets):
        p = 50 * np.exp(np.concatenate([[0.0], np.cumsum(rets)]))
        s = make_series(p)
        daily = log_returns(s).values
        h = len(rets)
        assert horizon_return(s, s.last_date, h) == pytest.approx(float(sum(daily)), abs=1e-12)


class TestRollingVol:
    def test_constant_returns(self):
        est = rolling_vol(returns_of([0.01] * 10), window=5)
        assert est.daily_vol == pytest.approx(0.0, abs=1e-18)
        assert est.mean_return == pytest.approx(0.01, rel=1e-15)

    def test_alternating(self):
        est = rolling_vol(returns_of([0.01, -0.01, 0.01, -0.01]), window=4)
        assert est.mean_return == 0.0
        assert est.daily_vol == pytest.approx(0.011547005383792516, rel=1e-14)

    def test_window_90_iid(self):
        rng = np.random.default_rng(7)
        x = rng.normal(0.001, 0.03, 200)
        est = rolling_vol(returns_of(x), window=90)
        mean, sd = two_pass_std(list(x[-90:]))
        assert est.daily_vol == pytest.approx(sd, rel=1e-12)
        assert est.mean_return == pytest.approx(mean, rel=1e-12)
        assert not est.partial_window and est.n_obs == 90

    def test_as_of_date_is_inclusive(self):
        x = list(range(10))
        r = returns_of([float(v) for v in x])
        est = rolling_vol(r, r.dates[4], window=3)
        mean, sd = two_pass_std([2.0, 3.0, 4.0])
        assert est.as_of == r.dates[4]
        assert (est.mean_return, est.daily_vol) == pytest.approx((mean, sd))

    def test_partial_window(self):
        est = rolling_vol(returns_of([0.01, 0.02, 0.04]), window=90)
        assert est.partial_window and est.n_obs == 3 and est.window_days == 90

    def test_too_short(self):
        with pytest.raises(InsufficientHistoryError):
            rolling_vol(returns_of([0.01]), window=90)

    def test_window_below_two(self):
        with pytest.raises(ValidationError):
            rolling_vol(returns_of([0.01, 0.02]), window=1)

    def test_gaps_are_reported(self):
        d = date(2022, 1, 1)
        r = ReturnSeries("X", [d, d + timedelta(days=1), d + timedelta(days=5)], [0.1, 0.2, 0.3])
        assert rolling_vol(r, window=3).gaps == ((d + timedelta(days=1), d + timedelta(days=5)),)

    @settings(max_examples=50)
    @given(
        st.lists(st.floats(-0.5, 0.5), min_size=2, max_size=120),
        st.floats(-0.1, 0.1),
    )
    def test_shift_invariance(self, xs, c):
        a = rolling_vol(returns_of(xs), window=90)
        b = rolling_vol(returns_of([x + c for x in xs]), window=90)
        assert b.daily_vol == pytest.approx(a.daily_vol, rel=1e-9, abs=1e-12)
        assert b.mean_return == pytest.approx(a.mean_return + c, abs=1e-12)

    def test_series_matches_point_estimates(self):
        rng = np.random.default_rng(3)
        r = returns_of(rng.normal(0, 0.02, 120))
        dates, vols, means = rolling_vol_series(r, 30)
        assert len(dates) == 91
        for i in (0, 45, 90):
            est = rolling_vol(r, dates[i], 30)
            assert vols[i] == pytest.approx(est.daily_vol, rel=1e-12)
            assert means[i] == pytest.approx(est.mean_return, rel=1e-12, abs=1e-15)


class TestScaleVol:
    def test_zero(self):
        assert scale_vol(0.0, 30) == 0.0

    def test_identity_horizon(self):
        assert scale_vol(0.37, 1) == 0.37

    def test_thirty_days(self):
        assert scale_vol(0.02, 30) == pytest.approx(0.10954451150103323, rel=1e-15)

    @given(st.floats(0, 10))
    def test_four_is_double(self, s):
        assert scale_vol(s, 4) == pytest.approx(2 * scale_vol(s, 1), rel=1e-15)

    def test_negative(self):
        with pytest.raises(DomainError):
            scale_vol(-0.1, 30)


class TestPriceSeries:
    def test_rejects_non_positive_price_naming_day(self):
        with pytest.raises(DomainError, match="2022-01-02"):
            make_series([1.0, 0.0])

    def test_rejects_unsorted_dates(self):
        d = date(2022, 1, 1)
        with pytest.raises(ValidationError):
            PriceSeries("X", [d, d], [1, 2], [1, 1], [1, 1])

    def test_return_length(self):
        s = make_series(np.linspace(1, 2, 25))
        assert len(log_returns(s)) == len(s) - 1

    def test_aligned_returns_uses_common_days(self):
        a = make_series([1.0, 2.0, 4.0, 8.0], "A")
        b = PriceSeries("B", [a.dates[0], a.dates[2], a.dates[3]], [1.0, 3.0, 9.0], [1] * 3, [1] * 3)
        dates, m = aligned_returns([a, b])
        assert dates == (a.dates[2], a.dates[3])
        np.testing.assert_allclose(m[:, 0], [math.log(4), math.log(2)])
        np.testing.assert_allclose(m[:, 1], [math.log(3), math.log(3)])
