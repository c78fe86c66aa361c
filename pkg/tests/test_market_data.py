import datetime as dt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marketlabel.errors import EmptyDistribution, InsufficientHistory, NoAnchor, NoNextDay, ValidationError
from marketlabel.market_data import (
    PriceSeries,
    anchor_date,
    next_day_return,
    quantile,
    thresholds,
    trailing_returns,
)

from conftest import make_series, random_walk

MON, TUE, WED = dt.date(2024, 1, 8), dt.date(2024, 1, 9), dt.date(2024, 1, 10)


def test_price_series_invariants():
    with pytest.raises(ValidationError):
        PriceSeries("A", [TUE, MON], [1.0, 2.0])
    with pytest.raises(ValidationError):
        PriceSeries("A", [MON, TUE], [1.0, 0.0])
    with pytest.raises(ValidationError):
        PriceSeries("A", [MON], [1.0, 2.0])
    s = PriceSeries("A", [MON], [1.0])
    with pytest.raises(ValueError):
        s.closes[0] = 5.0


def test_anchor_exact_match():
    s = PriceSeries("A", [MON, TUE, WED], [1, 2, 3])
    assert anchor_date(s, TUE) == TUE


def test_anchor_weekend_rolls_back():
    fri = dt.date(2024, 1, 12)
    s = PriceSeries("A", [WED, dt.date(2024, 1, 11), fri, dt.date(2024, 1, 15)], [1, 2, 3, 4])
    assert anchor_date(s, dt.date(2024, 1, 14)) == fri


def test_anchor_before_start():
    s = PriceSeries("A", [MON, TUE], [1, 2])
    with pytest.raises(NoAnchor):
        anchor_date(s, dt.date(2024, 1, 1))


def test_next_day_return():
    s = PriceSeries("A", [MON, TUE, WED], [100, 102, 102])
    assert next_day_return(s, MON) == pytest.approx(0.02)
    assert next_day_return(s, TUE) == 0.0
    with pytest.raises(NoNextDay):
        next_day_return(s, WED)


def test_trailing_window_caps_at_1250():
    s = random_walk(1500)
    dist = trailing_returns(s, s.dates[1400])
    assert len(dist) == 1250
    # most recent last, and the last one is the return realized on t itself
    assert dist.end_dates[-1] == s.dates[1400]
    assert dist.returns[-1] == pytest.approx(s.closes[1400] / s.closes[1399] - 1)


def test_trailing_short_series():
    s = random_walk(300)
    assert len(trailing_returns(s, s.dates[-1])) == 299


def test_trailing_insufficient():
    s = random_walk(100)
    with pytest.raises(InsufficientHistory):
        trailing_returns(s, s.dates[-1])
    assert len(trailing_returns(s, s.dates[-1], min_history=50)) == 99


@given(st.integers(0, 399), st.integers(1, 500))
def test_window_excludes_future(i, window):
    s = random_walk(400, seed=3)
    dist = trailing_returns(s, s.dates[i], window_len=window, min_history=0)
    assert len(dist) <= window
    assert len(dist) == min(i, window)
    if len(dist):
        assert dist.end_dates.max() <= s.dates[i]


# -------------------------------------------------------------------- quantile

def test_quantile_hand_computed():
    # p = 9 * 0.3 = 2.7 -> 3 + 0.7 * (4 - 3)
    assert quantile(range(1, 11), 0.3) == pytest.approx(3.7, abs=1e-12)
    # p = 9 * 0.6 = 5.4 -> 6 + 0.4 * (7 - 6)
    assert quantile(list(range(10, 0, -1)), 0.6) == pytest.approx(6.4, abs=1e-12)


def test_quantile_boundaries():
    v = [3.0, -1.0, 7.5, 2.0]
    assert quantile(v, 0) == -1.0
    assert quantile(v, 1) == 7.5
    assert quantile([4.2], 0.37) == 4.2
    with pytest.raises(EmptyDistribution):
        quantile([], 0.5)
    with pytest.raises(ValidationError):
        quantile(v, 1.5)


_samples = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=60)
_q = st.floats(0, 1)


@given(_samples, _q)
def test_quantile_matches_numpy_linear(values, q):
    assert quantile(values, q) == pytest.approx(float(np.quantile(values, q)), rel=1e-12, abs=1e-9)


@given(_samples, _q, _q)
def test_quantile_monotone(values, q1, q2):
    q1, q2 = sorted((q1, q2))
    assert quantile(values, q1) <= quantile(values, q2) + 1e-9


@given(_samples, _q, st.floats(-100, 100))
def test_quantile_translation(values, q, c):
    shifted = [v + c for v in values]
    assert quantile(shifted, q) == pytest.approx(quantile(values, q) + c, abs=1e-8)


def test_thresholds_constant():
    th = thresholds(np.full(300, 0.0025))
    assert th.lower == th.upper == 0.0025


def test_thresholds_scaled_ranks():
    scale = 0.001
    th = thresholds(np.arange(1, 11) * scale)
    assert th.lower == pytest.approx(3.7 * scale)
    assert th.upper == pytest.approx(6.4 * scale)


def _type7_by_enumeration(sorted_values, q):
    from fractions import Fraction

    pos = (len(sorted_values) - 1) * Fraction(q).limit_denominator(1000)
    lo = int(pos)
    frac = pos - lo
    hi = min(lo + 1, len(sorted_values) - 1)
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo])


def test_thresholds_symmetric_single_block():
    a = 0.01
    th = thresholds([a, -a, 0.0])
    # sorted (-a, 0, a): p30 = 0.6 -> -0.4a, p60 = 1.2 -> 0.2a
    assert th.lower == pytest.approx(-0.4 * a) and th.upper == pytest.approx(0.2 * a)
    assert th.lower < 0 < th.upper


@pytest.mark.parametrize("k", [1, 2, 3, 10, 100])
def test_thresholds_symmetric_repeated(k):
    a = 0.01
    values = np.tile([-a, 0.0, a], k)
    th = thresholds(values)
    ordered = sorted(values.tolist())
    assert th.lower == pytest.approx(float(_type7_by_enumeration(ordered, 0.3)), abs=1e-15)
    assert th.upper == pytest.approx(float(_type7_by_enumeration(ordered, 0.6)), abs=1e-15)
    assert th.lower < 0
    # the 60% position reaches the +a block only for a single repetition
    assert (th.upper > 0) == (k == 1)


def test_thresholds_from_distribution():
    s = random_walk(600, seed=9)
    dist = trailing_returns(s, s.dates[-1])
    th = thresholds(dist)
    assert th.lower == pytest.approx(np.quantile(dist.returns, 0.3))
    assert th.upper == pytest.approx(np.quantile(dist.returns, 0.6))
    with pytest.raises(ValidationError):
        thresholds(dist, 0.7, 0.2)


def test_make_series_helper_is_weekday_calendar():
    s = make_series([1, 2, 3, 4, 5, 6])
    assert all(np.is_busday(s.dates))
