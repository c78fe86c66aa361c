"""Price series, next-day returns and trailing quantile thresholds.

Everything is defined on the trading-date axis of a single ticker: a headline
published on date ``t`` is compared against the simple returns of the bars
ending at or before ``t`` and its own reaction is the close-to-close return
from ``t`` to the next bar.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDistribution,
    InsufficientHistory,
    NoAnchor,
    NoNextDay,
    ValidationError,
)

DEFAULT_WINDOW = 1250
DEFAULT_MIN_HISTORY = 250


def to_day(value) -> np.datetime64:
    """Coerce a date, ISO string or datetime64 to ``datetime64[D]``."""
    if isinstance(value, dt.datetime):
        value = value.date()
    return np.datetime64(value, "D")


def to_date(value: np.datetime64) -> dt.date:
    return value.astype("datetime64[D]").item()


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Date-ordered closing prices of one ticker.

    ``dates`` are coerced to ``datetime64[D]`` and ``closes`` to float64; both
    arrays are made read-only.
    """

    ticker: str
    dates: np.ndarray
    closes: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]").copy()
        closes = np.asarray(self.closes, dtype=np.float64).copy()
        if dates.ndim != 1 or closes.ndim != 1 or len(dates) != len(closes):
            raise ValidationError(f"{self.ticker}: dates and closes must be 1-d and equally long")
        if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
            raise ValidationError(f"{self.ticker}: dates must be strictly increasing")
        if not np.all(np.isfinite(closes)) or np.any(closes <= 0):
            raise ValidationError(f"{self.ticker}: non-positive price")
        dates.setflags(write=False)
        closes.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "closes", closes)

    def __len__(self):
        return len(self.dates)

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.ticker == other.ticker
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.closes, other.closes)
        )

    __hash__ = None

    def index_of(self, date) -> int:
        """Position of an exact trading date; ``KeyError`` if absent."""
        d = to_day(date)
        i = int(np.searchsorted(self.dates, d))
        if i >= len(self.dates) or self.dates[i] != d:
            raise KeyError(f"{self.ticker}: {to_date(d)} is not a trading date")
        return i

    def returns(self) -> np.ndarray:
        """Simple returns of consecutive bars; element ``i`` ends at bar ``i + 1``."""
        return self.closes[1:] / self.closes[:-1] - 1.0

    def scaled(self, factor: float) -> PriceSeries:
        return PriceSeries(self.ticker, self.dates, self.closes * factor)


@dataclass(frozen=True, eq=False)
class ReturnDistribution:
    """Trailing daily returns observed up to an anchor date.

    ``end_dates[i]`` is the date on which ``returns[i]`` was realized, so the
    window is leakage-free iff ``end_dates.max() <= as_of``.
    """

    as_of: dt.date
    returns: np.ndarray
    end_dates: np.ndarray
    window_len: int = DEFAULT_WINDOW

    def __len__(self):
        return len(self.returns)

    @property
    def first_date(self) -> dt.date | None:
        return to_date(self.end_dates[0]) if len(self.end_dates) else None

    @property
    def last_date(self) -> dt.date | None:
        return to_date(self.end_dates[-1]) if len(self.end_dates) else None


@dataclass(frozen=True)
class QuantileThresholds:
    """Lower and upper return thresholds (30% and 60% quantiles by default)."""

    lower: float
    upper: float
    q_low: float = field(default=0.3, compare=False)
    q_high: float = field(default=0.6, compare=False)

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValidationError(f"lower threshold {self.lower} exceeds upper {self.upper}")


def anchor_index(series: PriceSeries, publication_date) -> int:
    if len(series) == 0:
        raise NoAnchor(f"{series.ticker}: empty price series")
    d = to_day(publication_date)
    i = int(np.searchsorted(series.dates, d, side="right")) - 1
    if i < 0:
        raise NoAnchor(
            f"{series.ticker}: {to_date(d)} precedes first trading date {to_date(series.dates[0])}"
        )
    return i


def anchor_date(series: PriceSeries, publication_date) -> dt.date:
    """Latest trading date on or before ``publication_date``.

    Weekend and holiday publications therefore anchor to the previous session.
    """
    return to_date(series.dates[anchor_index(series, publication_date)])


def next_day_return(series: PriceSeries, t) -> float:
    """Close-to-close simple return from trading date ``t`` to the next bar."""
    i = series.index_of(t)
    if i + 1 >= len(series):
        raise NoNextDay(f"{series.ticker}: {to_date(series.dates[i])} is the last bar")
    return float(series.closes[i + 1] / series.closes[i] - 1.0)


def trailing_returns(
    series: PriceSeries,
    t,
    window_len: int = DEFAULT_WINDOW,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> ReturnDistribution:
    """Up to ``window_len`` most recent returns realized on or before ``t``.

    The return from ``t`` to ``t + 1`` is never included.
    """
    if window_len < 1:
        raise ValidationError("window_len must be positive")
    i = series.index_of(t)
    start = max(0, i - window_len)
    closes = series.closes[start : i + 1]
    rets = closes[1:] / closes[:-1] - 1.0
    if len(rets) < min_history:
        raise InsufficientHistory(
            f"{series.ticker}: {len(rets)} returns before {to_date(series.dates[i])}, need {min_history}"
        )
    return ReturnDistribution(
        as_of=to_date(series.dates[i]),
        returns=rets,
        end_dates=series.dates[start + 1 : i + 1],
        window_len=window_len,
    )


def quantile(values, q: float) -> float:
    """Linear-interpolation quantile of the sorted values (Hyndman-Fan type 7)."""
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"quantile level {q} outside [0, 1]")
    v = np.sort(np.asarray(values, dtype=np.float64), axis=None)
    n = len(v)
    if n == 0:
        raise EmptyDistribution("cannot take a quantile of an empty sample")
    pos = (n - 1) * q
    lo = int(np.floor(pos))
    frac = pos - lo
    if lo + 1 >= n or frac == 0.0:
        return float(v[lo])
    return float(v[lo] + frac * (v[lo + 1] - v[lo]))


def thresholds(dist, q_low: float = 0.3, q_high: float = 0.6) -> QuantileThresholds:
    """Quantile thresholds of a :class:`ReturnDistribution` or raw return array."""
    if q_low > q_high:
        raise ValidationError(f"q_low={q_low} exceeds q_high={q_high}")
    rets = dist.returns if isinstance(dist, ReturnDistribution) else dist
    lower = quantile(rets, q_low)
    upper = quantile(rets, q_high)
    # rounding in the interpolation must not invert the pair
    upper = max(upper, lower)
    return QuantileThresholds(lower, upper, q_low, q_high)
