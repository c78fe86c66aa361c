"""Per-ticker market-reaction labels and their median aggregation per headline."""

from __future__ import annotations

import datetime as dt
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import (
    DataError,
    IngestError,
    InsufficientHistory,
    NoAnchor,
    NoNextDay,
    NoVerdicts,
    UnlabelableHeadline,
    ValidationError,
)
from .ingest import LABEL_NAMES, LABELS, Headline, normalize_tickers
from .market_data import (
    DEFAULT_MIN_HISTORY,
    DEFAULT_WINDOW,
    PriceSeries,
    QuantileThresholds,
    anchor_index,
    next_day_return,
    thresholds,
    to_date,
    trailing_returns,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelConfig:
    window_len: int = DEFAULT_WINDOW
    q_low: float = 0.3
    q_high: float = 0.6
    min_history: int = DEFAULT_MIN_HISTORY

    def __post_init__(self):
        if not 0.0 <= self.q_low <= self.q_high <= 1.0:
            raise ValidationError(f"need 0 <= q_low <= q_high <= 1, got {self.q_low}, {self.q_high}")
        if not self.window_len >= self.min_history >= 2:
            raise ValidationError(
                f"need window_len >= min_history >= 2, got {self.window_len}, {self.min_history}"
            )


@dataclass(frozen=True)
class TickerVerdict:
    """Reaction of one ticker to one headline.

    ``anchor`` is the trading date t, ``next_date`` is t+1, and ``window_start``
    / ``window_end`` bound the realization dates of the returns that fed the
    thresholds.
    """

    ticker: str
    anchor: dt.date
    next_date: dt.date
    delta_p: float
    thresholds: QuantileThresholds
    label: int
    window_start: dt.date
    window_end: dt.date
    n_returns: int


@dataclass(frozen=True)
class LabeledHeadline:
    headline: Headline
    verdicts: tuple[TickerVerdict, ...]
    global_label: int
    skipped: tuple[tuple[str, str], ...] = ()

    @property
    def id(self):
        return self.headline.id


@dataclass
class DistributionReport:
    """Class counts of global and per-ticker labels plus skip bookkeeping."""

    n_headlines: int = 0
    n_labeled: int = 0
    n_unlabelable: int = 0
    global_counts: dict[int, int] = field(default_factory=lambda: {k: 0 for k in LABELS})
    ticker_counts: dict[int, int] = field(default_factory=lambda: {k: 0 for k in LABELS})
    skip_reasons: dict[str, int] = field(default_factory=dict)
    unlabelable_ids: list[str] = field(default_factory=list)

    @staticmethod
    def _shares(counts):
        total = sum(counts.values())
        return {k: (counts[k] / total if total else 0.0) for k in LABELS}

    @property
    def global_shares(self) -> dict[int, float]:
        return self._shares(self.global_counts)

    @property
    def ticker_shares(self) -> dict[int, float]:
        return self._shares(self.ticker_counts)

    def merge(self, other: DistributionReport) -> DistributionReport:
        reasons = Counter(self.skip_reasons)
        reasons.update(other.skip_reasons)
        return DistributionReport(
            self.n_headlines + other.n_headlines,
            self.n_labeled + other.n_labeled,
            self.n_unlabelable + other.n_unlabelable,
            {k: self.global_counts[k] + other.global_counts[k] for k in LABELS},
            {k: self.ticker_counts[k] + other.ticker_counts[k] for k in LABELS},
            dict(sorted(reasons.items())),
            self.unlabelable_ids + other.unlabelable_ids,
        )

    def to_dict(self) -> dict:
        named = lambda d: {LABEL_NAMES[k]: d[k] for k in LABELS}  # noqa: E731
        return {
            "n_headlines": self.n_headlines,
            "n_labeled": self.n_labeled,
            "n_unlabelable": self.n_unlabelable,
            "global_counts": named(self.global_counts),
            "global_shares": named(self.global_shares),
            "ticker_counts": named(self.ticker_counts),
            "ticker_shares": named(self.ticker_shares),
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
            "unlabelable_ids": list(self.unlabelable_ids),
        }


# ----------------------------------------------------------------------- tagging

class EntityTagger(Protocol):
    def tag(self, text: str) -> list[str]: ...


class LookupTagger:
    """Keyword table tagger.

    ``table`` maps a keyword or phrase to one or more tickers; a keyword
    matches case-insensitively on word boundaries.
    """

    def __init__(self, table: dict[str, list[str] | str]):
        self._rules = []
        for phrase, tickers in table.items():
            pattern = re.compile(r"(?<!\w)" + re.escape(phrase.strip()) + r"(?!\w)", re.IGNORECASE)
            self._rules.append((pattern, normalize_tickers([tickers] if isinstance(tickers, str) else tickers)))

    @classmethod
    def from_file(cls, path) -> LookupTagger:
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            try:
                table = json.load(fh)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON ({exc.msg})", path, exc.lineno) from None
        if not isinstance(table, dict):
            raise IngestError("tagger file must hold an object of keyword -> tickers", path)
        return cls(table)

    def tag(self, text: str) -> list[str]:
        found = []
        for pattern, tickers in self._rules:
            if pattern.search(text):
                found.extend(tickers)
        return list(normalize_tickers(found))


def apply_tagger(headlines, tagger: EntityTagger) -> list[Headline]:
    """Fill in tickers for headlines that have none; tagged headlines pass through."""
    return [h if h.tickers else h.with_tickers(tagger.tag(h.text)) for h in headlines]


# ---------------------------------------------------------------- classification

def classify(delta_p: float, th: QuantileThresholds) -> int:
    """+1 above the upper threshold, -1 below the lower one, 0 otherwise."""
    if delta_p > th.upper:
        return 1
    if delta_p < th.lower:
        return -1
    return 0


def median_aggregate(labels) -> int:
    """Median label; an even count averages the middle pair and truncates toward 0."""
    values = sorted(int(v) for v in labels)
    n = len(values)
    if n == 0:
        raise NoVerdicts("cannot aggregate an empty label list")
    if n % 2:
        return values[n // 2]
    return math.trunc((values[n // 2 - 1] + values[n // 2]) / 2)


def ticker_verdict(series: PriceSeries, publication_date, cfg: LabelConfig) -> TickerVerdict:
    i = anchor_index(series, publication_date)
    if i + 1 >= len(series):
        raise NoNextDay(f"{series.ticker}: no bar after {to_date(series.dates[i])}")
    t = series.dates[i]
    dist = trailing_returns(series, t, cfg.window_len, cfg.min_history)
    th = thresholds(dist, cfg.q_low, cfg.q_high)
    delta_p = next_day_return(series, t)
    return TickerVerdict(
        ticker=series.ticker,
        anchor=to_date(t),
        next_date=to_date(series.dates[i + 1]),
        delta_p=delta_p,
        thresholds=th,
        label=classify(delta_p, th),
        window_start=dist.first_date,
        window_end=dist.last_date,
        n_returns=len(dist),
    )


_SKIP_REASONS = (
    (NoAnchor, "no-anchor"),
    (NoNextDay, "no-next-day"),
    (InsufficientHistory, "insufficient-history"),
)


def label_headline(h: Headline, prices: dict[str, PriceSeries], cfg: LabelConfig | None = None) -> LabeledHeadline:
    """Label every ticker of ``h`` with enough data and take the median.

    Tickers without usable data land in ``skipped`` with a reason code; if all
    of them are skipped :class:`UnlabelableHeadline` is raised.
    """
    cfg = cfg or LabelConfig()
    verdicts, skipped = [], []
    for ticker in h.tickers:
        series = prices.get(ticker)
        if series is None:
            skipped.append((ticker, "no-price-data"))
            continue
        try:
            verdicts.append(ticker_verdict(series, h.date, cfg))
        except DataError as exc:
            reason = next((r for cls, r in _SKIP_REASONS if isinstance(exc, cls)), "data-error")
            log.debug("skip %s for %s: %s", ticker, h.id, exc)
            skipped.append((ticker, reason))
    if not verdicts:
        raise UnlabelableHeadline(h.id, skipped)
    return LabeledHeadline(h, tuple(verdicts), median_aggregate(v.label for v in verdicts), tuple(skipped))


def label_corpus(headlines, prices, cfg: LabelConfig | None = None):
    """Label a corpus; returns ``(labeled, report)``. Per-headline failures are only counted."""
    cfg = cfg or LabelConfig()
    labeled = []
    report = DistributionReport()
    reasons: Counter = Counter()
    for h in headlines:
        report.n_headlines += 1
        try:
            lh = label_headline(h, prices, cfg)
        except UnlabelableHeadline as exc:
            report.n_unlabelable += 1
            report.unlabelable_ids.append(h.id)
            reasons.update(r for _, r in exc.skipped)
            log.info("%s", exc)
            continue
        labeled.append(lh)
        report.n_labeled += 1
        report.global_counts[lh.global_label] += 1
        for v in lh.verdicts:
            report.ticker_counts[v.label] += 1
        reasons.update(r for _, r in lh.skipped)
    report.skip_reasons = dict(sorted(reasons.items()))
    return labeled, report


def gold_labels(labeled) -> dict[str, int]:
    return {lh.id: lh.global_label for lh in labeled}


# ---------------------------------------------------------------- leakage audit

def audit_leakage(labeled, prices, cfg: LabelConfig | None = None, atol: float = 1e-12) -> list[str]:
    """Independently re-derive every verdict's window and report violations.

    For each verdict the returns are rebuilt by date mask (every return whose
    realization date is on or before the anchor, most recent ``window_len``),
    the thresholds recomputed, and the recorded window bounds, reaction date
    and thresholds compared. An empty list means no leakage was found.
    """
    cfg = cfg or LabelConfig()
    problems = []
    for lh in labeled:
        for v in lh.verdicts:
            tag = f"{lh.id}/{v.ticker}"
            if not v.window_end <= v.anchor < v.next_date:
                problems.append(f"{tag}: window end {v.window_end}, anchor {v.anchor}, next {v.next_date}")
                continue
            if v.anchor > lh.headline.date:
                problems.append(f"{tag}: anchor {v.anchor} after publication {lh.headline.date}")
            s = prices[v.ticker]
            rets = s.closes[1:] / s.closes[:-1] - 1.0
            ends = s.dates[1:]
            mask = ends <= np.datetime64(v.anchor, "D")
            rets, ends = rets[mask][-cfg.window_len :], ends[mask][-cfg.window_len :]
            if len(rets) != v.n_returns or to_date(ends[-1]) != v.window_end or to_date(ends[0]) != v.window_start:
                problems.append(f"{tag}: window mismatch")
                continue
            later = s.dates[s.dates > np.datetime64(v.anchor, "D")]
            if to_date(later[0]) != v.next_date:
                problems.append(f"{tag}: reaction not measured on the next bar")
            lo, hi = (float(x) for x in np.quantile(rets, [cfg.q_low, cfg.q_high]))
            if abs(lo - v.thresholds.lower) > atol or abs(max(hi, lo) - v.thresholds.upper) > atol:
                problems.append(f"{tag}: thresholds differ from the pre-anchor window")
    return problems


# --------------------------------------------------------------------- file I/O

def _verdict_record(v: TickerVerdict) -> dict:
    return {
        "ticker": v.ticker,
        "delta_p": v.delta_p,
        "q30": v.thresholds.lower,
        "q60": v.thresholds.upper,
        "label": v.label,
        "anchor": v.anchor.isoformat(),
        "next_date": v.next_date.isoformat(),
        "window_start": v.window_start.isoformat(),
        "window_end": v.window_end.isoformat(),
        "n_returns": v.n_returns,
    }


def write_labeled_corpus(labeled, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for lh in labeled:
            h = lh.headline
            rec = {
                "id": h.id,
                "date": h.date.isoformat(),
                "headline": h.text,
                "tickers": list(h.tickers),
                "per_ticker": [_verdict_record(v) for v in lh.verdicts],
                "global_label": lh.global_label,
                "skipped": [list(s) for s in lh.skipped],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_labeled_corpus(path, q_low: float = 0.3, q_high: float = 0.6) -> list[LabeledHeadline]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                h = Headline(rec["id"], dt.date.fromisoformat(rec["date"]), rec["headline"], tuple(rec["tickers"]))
                verdicts = tuple(
                    TickerVerdict(
                        ticker=p["ticker"],
                        anchor=dt.date.fromisoformat(p["anchor"]),
                        next_date=dt.date.fromisoformat(p["next_date"]),
                        delta_p=float(p["delta_p"]),
                        thresholds=QuantileThresholds(float(p["q30"]), float(p["q60"]), q_low, q_high),
                        label=int(p["label"]),
                        window_start=dt.date.fromisoformat(p["window_start"]),
                        window_end=dt.date.fromisoformat(p["window_end"]),
                        n_returns=int(p["n_returns"]),
                    )
                    for p in rec["per_ticker"]
                )
                g = int(rec["global_label"])
                skipped = tuple(tuple(s) for s in rec.get("skipped", []))
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise IngestError(f"bad labeled record ({exc})", path, lineno) from None
            if g not in LABELS:
                raise IngestError(f"unknown label {g}", path, lineno, "global_label")
            out.append(LabeledHeadline(h, verdicts, g, skipped))
    return out


def write_report(report: DistributionReport, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
