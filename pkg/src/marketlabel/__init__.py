"""Market-reaction sentiment labels for financial headlines.

Submodules: :mod:`~marketlabel.ingest` (file formats, synthetic corpora),
:mod:`~marketlabel.market_data` (returns and quantile thresholds),
:mod:`~marketlabel.labeler`, :mod:`~marketlabel.signal_backtest`,
:mod:`~marketlabel.metrics`, :mod:`~marketlabel.ensemble` and
:mod:`~marketlabel.cli`.
"""

from .ensemble import (
    JuryModel,
    bag,
    independence_report,
    jury_accuracy_exact,
    majority_vote,
    simulate_jury,
)
from .ingest import (
    Headline,
    PredictionSet,
    generate_synthetic_corpus,
    parse_headlines,
    parse_predictions,
    parse_prices,
)
from .labeler import LabelConfig, classify, label_corpus, label_headline, median_aggregate
from .market_data import PriceSeries, QuantileThresholds, quantile, thresholds, trailing_returns
from .metrics import confusion, report
from .signal_backtest import basket_returns, build_signal, daily_signal, run_backtest

__version__ = "0.1.0"
