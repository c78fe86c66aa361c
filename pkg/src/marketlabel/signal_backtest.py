"""Daily sentiment score and the label-validity backtest.

The backtest applies the score computed from day ``t`` headlines to the
basket return from ``t`` to ``t + 1``. Because the labels themselves are
measured on that same move this is a look-ahead construction on purpose: a
valid labeling must beat the benchmark, a random one must not. It is a check
on the labels, not a tradable strategy.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyBacktest, EmptyBasket, IngestError, ValidationError
from .market_data import PriceSeries, to_date, to_day

TRADING_DAYS = 252
MODES = ("proportional", "sign")

NOTICE = (
    "NOTE: the validity backtest uses each day's labels on the following day's move "
    "(deliberate look-ahead). It tests label validity and is not an investable strategy."
)


def daily_signal(labels) -> float:
    """(positives - negatives) / (positives + negatives); 0 when there are neither."""
    pos = neg = 0
    for v in labels:
        if v > 0:
            pos += 1
        elif v < 0:
            neg += 1
    if pos + neg == 0:
        return 0.0
    return (pos - neg) / (pos + neg)


@dataclass(frozen=True, eq=False)
class SentimentSignalSeries:
    """Date-ordered daily scores with the headline count behind each."""

    dates: np.ndarray
    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dates, dtype="datetime64[D]")
        v = np.asarray(self.values, dtype=np.float64)
        c = np.asarray(self.counts, dtype=np.int64)
        if not len(d) == len(v) == len(c):
            raise ValidationError("dates, values and counts must be equally long")
        if len(d) > 1 and not np.all(d[1:] > d[:-1]):
            raise ValidationError("signal dates must be strictly increasing")
        if np.any(np.abs(v) > 1.0):
            raise ValidationError("signal values must lie in [-1, 1]")
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "counts", c)

    def __len__(self):
        return len(self.dates)


def build_signal(labeled, calendar=None) -> SentimentSignalSeries:
    """Group global labels by day and score each day.

    With a ``calendar`` (sorted trading dates) each headline is assigned to the
    latest trading date on or before its publication date; headlines before
    the calendar start are dropped.
    """
    by_day: dict[np.datetime64, list[int]] = {}
    cal = None if calendar is None else np.asarray(calendar, dtype="datetime64[D]")
    for lh in labeled:
        d = to_day(lh.headline.date)
        if cal is not None:
            i = int(np.searchsorted(cal, d, side="right")) - 1
            if i < 0:
                continue
            d = cal[i]
        by_day.setdefault(d, []).append(lh.global_label)
    days = sorted(by_day)
    return SentimentSignalSeries(
        np.array(days, dtype="datetime64[D]"),
        np.array([daily_signal(by_day[d]) for d in days], dtype=np.float64),
        np.array([len(by_day[d]) for d in days], dtype=np.int64),
    )


@dataclass(frozen=True, eq=False)
class BasketReturns:
    """Equal-weight basket on its common calendar.

    ``returns[i]`` is the period return from ``dates[i]`` to ``dates[i + 1]``.
    """

    members: tuple[str, ...]
    dates: np.ndarray
    returns: np.ndarray


def basket_returns(prices: dict[str, PriceSeries], members) -> BasketReturns:
    members = tuple(members)
    if not members:
        raise ValidationError("basket needs at least one member")
    missing = [m for m in members if m not in prices]
    if missing:
        raise EmptyBasket(f"no prices for basket member(s) {', '.join(missing)}")
    common = prices[members[0]].dates
    for m in members[1:]:
        common = np.intersect1d(common, prices[m].dates, assume_unique=True)
    if len(common) < 2:
        raise EmptyBasket(f"basket members share {len(common)} trading date(s)")
    rets = []
    for m in members:
        s = prices[m]
        closes = s.closes[np.searchsorted(s.dates, common)]
        rets.append(closes[1:] / closes[:-1] - 1.0)
    return BasketReturns(members, common, np.mean(rets, axis=0))


@dataclass(frozen=True)
class PathSummary:
    total_return: float
    annualized_return: float
    annualized_volatility: float
    max_drawdown: float


def summarize(path: np.ndarray, periods_per_year: int = TRADING_DAYS) -> PathSummary:
    path = np.asarray(path, dtype=np.float64)
    n = len(path) - 1
    daily = path[1:] / path[:-1] - 1.0
    total = float(path[-1] / path[0] - 1.0)
    ann_ret = float((path[-1] / path[0]) ** (periods_per_year / n) - 1.0) if n else 0.0
    ann_vol = float(np.std(daily, ddof=1) * np.sqrt(periods_per_year)) if n > 1 else 0.0
    peak = np.maximum.accumulate(path)
    mdd = float(np.max(1.0 - path / peak))
    return PathSummary(total, ann_ret, ann_vol, mdd)


@dataclass(frozen=True, eq=False)
class BacktestResult:
    dates: np.ndarray
    strategy_cum: np.ndarray
    benchmark_cum: np.ndarray
    random_cum: np.ndarray
    mode: str = "proportional"
    summary: dict[str, PathSummary] = field(default_factory=dict)

    def __len__(self):
        return len(self.dates)


def _exposure(values: np.ndarray, mode: str) -> np.ndarray:
    if mode == "proportional":
        return values
    if mode == "sign":
        return np.sign(values)
    raise ValidationError(f"unknown exposure mode {mode!r}; expected one of {MODES}")


def random_signal(signal: SentimentSignalSeries, rng: np.random.Generator) -> np.ndarray:
    """Scores of the same days with every label drawn uniformly from {-1, 0, +1}."""
    out = np.zeros(len(signal))
    for j, n in enumerate(signal.counts):
        out[j] = daily_signal(rng.integers(-1, 2, size=int(n)))
    return out


def run_backtest(
    signal: SentimentSignalSeries,
    basket: BasketReturns,
    mode: str = "proportional",
    seed: int | np.random.SeedSequence = 0,
) -> BacktestResult:
    """Compound the signal-weighted basket against always-long and random-label paths.

    The evaluated periods run from the first to the last signal date that is
    a basket date with a following bar. Days inside that span without headlines
    carry zero exposure.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown exposure mode {mode!r}; expected one of {MODES}")
    starts = basket.dates[:-1]
    pos = np.searchsorted(starts, signal.dates)
    hit = (pos < len(starts)) & (starts[np.minimum(pos, len(starts) - 1)] == signal.dates)
    if not np.any(hit):
        raise EmptyBacktest("no signal date falls on a basket trading day with a following bar")
    idx = pos[hit]
    lo, hi = int(idx.min()), int(idx.max())
    r = basket.returns[lo : hi + 1]

    rng = np.random.default_rng(seed)
    rand_values = random_signal(signal, rng)
    w = np.zeros(len(r))
    w_rand = np.zeros(len(r))
    w[idx - lo] = _exposure(signal.values[hit], mode)
    w_rand[idx - lo] = _exposure(rand_values[hit], mode)

    def compound(weights):
        return np.concatenate([[1.0], np.cumprod(1.0 + weights * r)])

    strat, bench, rand = compound(w), compound(np.ones(len(r))), compound(w_rand)
    return BacktestResult(
        dates=basket.dates[lo : hi + 2],
        strategy_cum=strat,
        benchmark_cum=bench,
        random_cum=rand,
        mode=mode,
        summary={"strategy": summarize(strat), "benchmark": summarize(bench), "random": summarize(rand)},
    )


# --------------------------------------------------------------------- file I/O

def write_signal(signal: SentimentSignalSeries, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "signal", "n_headlines"])
        for d, v, c in zip(signal.dates, signal.values, signal.counts):
            w.writerow([to_date(d).isoformat(), repr(float(v)), int(c)])


def read_signal(path) -> SentimentSignalSeries:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    dates, values, counts = [], [], []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                dates.append(dt.date.fromisoformat(row["date"]))
                values.append(float(row["signal"]))
                counts.append(int(row.get("n_headlines") or 0))
            except (KeyError, TypeError, ValueError) as exc:
                raise IngestError(f"bad signal row ({exc})", path, lineno) from None
    return SentimentSignalSeries(dates, values, counts)


def write_trackrecord(result: BacktestResult, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "strategy_cum", "benchmark_cum", "random_cum"])
        for row in zip(result.dates, result.strategy_cum, result.benchmark_cum, result.random_cum):
            w.writerow([to_date(row[0]).isoformat()] + [repr(float(x)) for x in row[1:]])


def format_summary(result: BacktestResult) -> str:
    lines = [f"{'path':<10} {'total':>9} {'ann.ret':>9} {'ann.vol':>9} {'max.dd':>9}"]
    for name, s in result.summary.items():
        lines.append(
            f"{name:<10} {s.total_return:>9.4f} {s.annualized_return:>9.4f} "
            f"{s.annualized_volatility:>9.4f} {s.max_drawdown:>9.4f}"
        )
    return "\n".join(lines)
