"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad arguments or
configuration (caught before any work starts) and :class:`DataError` for
problems found in the input data or while processing it.
"""


class MarketLabelError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MarketLabelError, ValueError):
    """Invalid parameters or configuration."""


class DataError(MarketLabelError, ValueError):
    """Input data that cannot be used as requested."""


class IngestError(DataError):
    """A malformed record in an input file."""

    def __init__(self, message, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NoAnchor(DataError):
    pass


class NoNextDay(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class EmptyDistribution(DataError):
    pass


class NoVerdicts(DataError):
    pass


class UnlabelableHeadline(DataError):
    """Every ticker of a headline was skipped."""

    def __init__(self, headline_id, skipped):
        self.headline_id = headline_id
        self.skipped = list(skipped)
        reasons = "; ".join(f"{t}: {r}" for t, r in self.skipped) or "no tickers"
        super().__init__(f"headline {headline_id!r} has no usable ticker ({reasons})")


class EmptyBasket(DataError):
    pass


class EmptyBacktest(DataError):
    pass


class EmptyEvaluation(DataError):
    pass


class CapExceeded(ValidationError):
    pass
