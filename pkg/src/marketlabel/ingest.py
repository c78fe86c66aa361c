"""Readers, writers and a synthetic generator for the three input file kinds.

* headlines: JSON lines with ``date``, ``headline``, ``tickers`` and an
  optional ``id``
* prices: delimited text with a ``ticker,date,close`` header
* predictions: delimited text with a ``headline_id,label`` header
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestError, ValidationError
from .market_data import PriceSeries, to_date

LABELS = (-1, 0, 1)
LABEL_NAMES = {-1: "negative", 0: "neutral", 1: "positive"}
_LABEL_TOKENS = {
    "-1": -1, "0": 0, "1": 1, "+1": 1,
    "negative": -1, "neutral": 0, "positive": 1,
}
_TICKER_RE = re.compile(r"^[A-Z0-9.\-=^]+$")


@dataclass(frozen=True)
class Headline:
    id: str
    date: dt.date
    text: str
    tickers: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tickers", normalize_tickers(self.tickers))

    def with_tickers(self, tickers) -> Headline:
        return Headline(self.id, self.date, self.text, tuple(tickers))


@dataclass(frozen=True)
class PriceBar:
    ticker: str
    date: dt.date
    close: float


@dataclass
class PredictionSet:
    """One model's labels keyed by headline id."""

    model: str
    labels: dict[str, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.labels)

    def ids(self) -> list[str]:
        return list(self.labels)


def normalize_ticker(symbol: str) -> str:
    t = str(symbol).strip().upper()
    if not t or not _TICKER_RE.match(t):
        raise ValidationError(f"invalid ticker symbol {symbol!r}")
    return t


def normalize_tickers(symbols) -> tuple[str, ...]:
    """Uppercase, validate and de-duplicate, keeping first-seen order."""
    if isinstance(symbols, str):
        symbols = _split_ticker_string(symbols)
    out = []
    for s in symbols:
        t = normalize_ticker(s)
        if t not in out:
            out.append(t)
    return tuple(out)


def _split_ticker_string(raw: str) -> list[str]:
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        raw = raw[1:-1]
    return [p.strip().strip("'\"") for p in re.split(r"[,;\s]+", raw) if p.strip().strip("'\"")]


def parse_label(token) -> int:
    key = str(token).strip().lower()
    if key not in _LABEL_TOKENS:
        raise ValidationError(f"unknown label {token!r}")
    return _LABEL_TOKENS[key]


def _parse_iso_date(value) -> dt.date:
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value).strip())


def _open_text(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return path.open("r", encoding="utf-8", newline="")


# --------------------------------------------------------------------- headlines

def parse_headlines(path) -> list[Headline]:
    """Read a JSON-lines headline file.

    Records without an ``id`` get ``<file stem>-<zero padded row index>``.
    Blank lines are skipped but still counted for line numbers.
    """
    path = Path(path)
    out: list[Headline] = []
    seen: set[str] = set()
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON ({exc.msg})", path, lineno) from None
            if not isinstance(rec, dict):
                raise IngestError("record is not an object", path, lineno)
            for key in ("date", "headline"):
                if key not in rec:
                    raise IngestError("missing", path, lineno, key)
            try:
                date = _parse_iso_date(rec["date"])
            except (TypeError, ValueError):
                raise IngestError(f"not an ISO date: {rec['date']!r}", path, lineno, "date") from None
            if not isinstance(rec["headline"], str):
                raise IngestError("must be a string", path, lineno, "headline")
            tickers = rec.get("tickers", [])
            if tickers is None:
                tickers = []
            if not isinstance(tickers, (list, str)):
                raise IngestError("must be an array", path, lineno, "tickers")
            try:
                tickers = normalize_tickers(tickers)
            except ValidationError as exc:
                raise IngestError(str(exc), path, lineno, "tickers") from None
            hid = rec.get("id")
            hid = f"{path.stem}-{len(out):06d}" if hid is None else str(hid)
            if hid in seen:
                raise IngestError(f"duplicate id {hid!r}", path, lineno, "id")
            seen.add(hid)
            out.append(Headline(hid, date, rec["headline"], tickers))
    return out


def write_headlines(headlines, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for h in headlines:
            rec = {"id": h.id, "date": h.date.isoformat(), "headline": h.text, "tickers": list(h.tickers)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


# ------------------------------------------------------------------------ prices

def _sniff_delimiter(header: str) -> str:
    for d in (",", "\t", ";", "|"):
        if d in header:
            return d
    return ","


def parse_prices(path) -> dict[str, PriceSeries]:
    """Read long-format ``ticker,date,close`` rows into per-ticker series."""
    path = Path(path)
    rows: dict[str, list[tuple[dt.date, float]]] = defaultdict(list)
    seen: set[tuple[str, dt.date]] = set()
    with _open_text(path) as fh:
        header = fh.readline()
        if not header.strip():
            return {}
        delim = _sniff_delimiter(header)
        cols = [c.strip().lower() for c in next(csv.reader([header], delimiter=delim))]
        missing = [c for c in ("ticker", "date", "close") if c not in cols]
        if missing:
            raise IngestError(f"header lacks column(s) {', '.join(missing)}", path, 1)
        it, id_, ic = cols.index("ticker"), cols.index("date"), cols.index("close")
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) < len(cols):
                raise IngestError(f"expected {len(cols)} columns, got {len(row)}", path, lineno)
            try:
                ticker = normalize_ticker(row[it])
            except ValidationError as exc:
                raise IngestError(str(exc), path, lineno, "ticker") from None
            try:
                date = _parse_iso_date(row[id_])
            except ValueError:
                raise IngestError(f"not an ISO date: {row[id_]!r}", path, lineno, "date") from None
            try:
                close = float(row[ic])
            except ValueError:
                raise IngestError(f"not a number: {row[ic]!r}", path, lineno, "close") from None
            if not np.isfinite(close) or close <= 0:
                raise IngestError(f"non-positive price {row[ic]!r}", path, lineno, "close")
            if (ticker, date) in seen:
                raise IngestError(f"duplicate bar for {ticker} on {date}", path, lineno)
            seen.add((ticker, date))
            rows[ticker].append((date, close))
    out = {}
    for ticker in sorted(rows):
        bars = sorted(rows[ticker])
        out[ticker] = PriceSeries(ticker, [b[0] for b in bars], [b[1] for b in bars])
    return out


def write_prices(prices, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "date", "close"])
        for ticker in sorted(prices):
            s = prices[ticker]
            for d, c in zip(s.dates, s.closes):
                w.writerow([ticker, to_date(d).isoformat(), repr(float(c))])


def price_bars(prices):
    """Flatten a ticker map into :class:`PriceBar` records."""
    for ticker in sorted(prices):
        s = prices[ticker]
        for d, c in zip(s.dates, s.closes):
            yield PriceBar(ticker, to_date(d), float(c))


# ------------------------------------------------------------------- predictions

def parse_predictions(path, model: str | None = None) -> PredictionSet:
    """Read ``headline_id,label`` rows.

    The model name is ``model`` if given, else a ``model`` column value if the
    file has one, else the file stem.
    """
    path = Path(path)
    labels: dict[str, int] = {}
    file_model = None
    with _open_text(path) as fh:
        header = fh.readline()
        if header.strip():
            delim = _sniff_delimiter(header)
            cols = [c.strip().lower() for c in next(csv.reader([header], delimiter=delim))]
            missing = [c for c in ("headline_id", "label") if c not in cols]
            if missing:
                raise IngestError(f"header lacks column(s) {', '.join(missing)}", path, 1)
            ih, il = cols.index("headline_id"), cols.index("label")
            im = cols.index("model") if "model" in cols else None
            for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
                if not row or not "".join(row).strip():
                    continue
                if len(row) < len(cols):
                    raise IngestError(f"expected {len(cols)} columns, got {len(row)}", path, lineno)
                hid = row[ih].strip()
                if not hid:
                    raise IngestError("empty", path, lineno, "headline_id")
                try:
                    label = parse_label(row[il])
                except ValidationError as exc:
                    raise IngestError(str(exc), path, lineno, "label") from None
                if hid in labels:
                    raise IngestError(f"duplicate headline_id {hid!r}", path, lineno, "headline_id")
                labels[hid] = label
                if im is not None and file_model is None and row[im].strip():
                    file_model = row[im].strip()
    return PredictionSet(model or file_model or path.stem, labels)


def write_predictions(pred: PredictionSet, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["headline_id", "label"])
        for hid, label in pred.labels.items():
            w.writerow([hid, int(label)])


# --------------------------------------------------------------------- synthetic

DRIFT_RANGE = (-0.0002, 0.0005)
VOL_RANGE = (0.008, 0.02)
START_DATE = dt.date(2010, 1, 4)


@dataclass
class SyntheticCorpus:
    """Output of :func:`generate_synthetic_corpus`.

    ``drifts`` and ``vols`` are the per-ticker daily log-return parameters and
    ``headline_bars`` the bar index each headline was dated on, so tests can
    recompute the realized reaction of any headline.
    """

    prices: dict[str, PriceSeries]
    headlines: list[Headline]
    drifts: dict[str, float]
    vols: dict[str, float]
    headline_bars: dict[str, int]
    seed: int


def trading_calendar(n_days: int, start: dt.date = START_DATE) -> np.ndarray:
    """``n_days`` consecutive weekdays starting at the first weekday on/after ``start``."""
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(n_days), roll="forward")


def generate_synthetic_corpus(
    n_tickers: int,
    n_days: int,
    n_headlines: int,
    seed: int,
    window_len: int = 1250,
) -> SyntheticCorpus:
    """Geometric random-walk prices plus randomly tagged headlines.

    Each ticker draws a drift from ``DRIFT_RANGE`` and a volatility from
    ``VOL_RANGE``; daily log returns are i.i.d. normal. Headlines are dated on
    bars that have at least ``window_len`` earlier bars and a following bar
    (falling back to any bar with a successor on short calendars) and carry
    1 to 5 distinct tickers.
    """
    for name, v in (("n_tickers", n_tickers), ("n_days", n_days), ("n_headlines", n_headlines)):
        if int(v) != v or v < 0:
            raise ValidationError(f"{name} must be a non-negative integer")
    if n_tickers < 1 or n_days < 2:
        raise ValidationError("need at least one ticker and two days")
    rng = np.random.default_rng(seed)
    dates = trading_calendar(n_days)
    tickers = [f"SYN{i:03d}" for i in range(n_tickers)]
    drifts, vols, prices = {}, {}, {}
    for t in tickers:
        mu = float(rng.uniform(*DRIFT_RANGE))
        sigma = float(rng.uniform(*VOL_RANGE))
        s0 = float(rng.uniform(20.0, 200.0))
        logret = rng.normal(mu - 0.5 * sigma**2, sigma, size=n_days - 1)
        closes = s0 * np.exp(np.concatenate([[0.0], np.cumsum(logret)]))
        drifts[t], vols[t] = mu, sigma
        prices[t] = PriceSeries(t, dates, closes)

    first_bar = window_len if n_days - 1 > window_len else min(1, n_days - 2)
    headlines, bars = [], {}
    if n_headlines:
        bar_idx = np.sort(rng.integers(first_bar, n_days - 1, size=n_headlines))
        for i, b in enumerate(bar_idx):
            k = int(rng.integers(1, min(5, n_tickers) + 1))
            chosen = [tickers[j] for j in sorted(rng.choice(n_tickers, size=k, replace=False))]
            hid = f"syn-{i:06d}"
            text = f"Synthetic market wrap {i}: " + ", ".join(chosen)
            headlines.append(Headline(hid, to_date(dates[b]), text, tuple(chosen)))
            bars[hid] = int(b)
    return SyntheticCorpus(prices, headlines, drifts, vols, bars, seed)
