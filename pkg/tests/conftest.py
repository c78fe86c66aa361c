import datetime as dt
import json

import numpy as np
import pytest

from marketlabel.ingest import generate_synthetic_corpus
from marketlabel.market_data import PriceSeries


def weekdays(n, start=dt.date(2015, 1, 5)):
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(n), roll="forward")


def make_series(closes, ticker="AAA", start=dt.date(2015, 1, 5)):
    return PriceSeries(ticker, weekdays(len(closes), start), closes)


def random_walk(n, seed=0, ticker="AAA", vol=0.01):
    rng = np.random.default_rng(seed)
    closes = 100 * np.exp(np.concatenate([[0.0], np.cumsum(rng.normal(0, vol, n - 1))]))
    return make_series(closes, ticker)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def desk_corpus():
    """5 tickers, 2000 days, 1000 headlines."""
    return generate_synthetic_corpus(5, 2000, 1000, seed=11)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
