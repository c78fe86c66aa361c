"""Confusion matrices and support-weighted precision / recall / F-score."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DataError, EmptyEvaluation
from .ingest import LABEL_NAMES, LABELS, PredictionSet

_POS = {label: i for i, label in enumerate(LABELS)}


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts indexed ``[gold, predicted]`` in label order (-1, 0, +1)."""

    counts: np.ndarray
    n_missing: int = 0

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (3, 3) or np.any(c < 0):
            raise DataError("confusion counts must be a non-negative 3x3 matrix")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    __hash__ = None

    def to_dict(self):
        return {
            "labels": list(LABELS),
            "counts": self.counts.tolist(),
            "n_missing": self.n_missing,
        }


def confusion(gold: dict[str, int], pred: PredictionSet, allow_partial: bool = False) -> ConfusionMatrix:
    """Cross-tabulate gold against predicted labels.

    Predictions for ids not in ``gold`` are an error. Gold ids without a
    prediction are an error unless ``allow_partial``, in which case the
    intersection is scored and the shortfall kept in ``n_missing``.
    """
    labels = pred.labels if isinstance(pred, PredictionSet) else pred
    unknown = [i for i in labels if i not in gold]
    if unknown:
        raise DataError(f"{len(unknown)} prediction(s) for unknown headline ids, e.g. {unknown[0]!r}")
    missing = len(gold) - len(labels)
    if missing and not allow_partial:
        example = next(i for i in gold if i not in labels)
        raise DataError(f"{missing} gold headline(s) lack a prediction, e.g. {example!r}")
    counts = np.zeros((3, 3), dtype=np.int64)
    for hid, p in labels.items():
        counts[_POS[gold[hid]], _POS[p]] += 1
    return ConfusionMatrix(counts, missing)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    predicted: int


@dataclass(frozen=True)
class ClassificationReport:
    per_class: dict[int, ClassMetrics]
    precision: float
    recall: float
    f_score: float
    accuracy: float
    total: int
    zero_division: tuple[str, ...] = ()
    model: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "total": self.total,
            "accuracy": self.accuracy,
            "weighted": {"precision": self.precision, "recall": self.recall, "f_score": self.f_score},
            "per_class": {
                LABEL_NAMES[k]: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "predicted": m.predicted,
                }
                for k, m in self.per_class.items()
            },
            "zero_division": list(self.zero_division),
        }


def _ratio(num, den):
    return Fraction(num, 1) / den if den else Fraction(0)


def report(cm: ConfusionMatrix, model: str = "") -> ClassificationReport:
    """Per-class and support-weighted metrics.

    Computed in exact rationals and rounded once, so the weighted recall equals
    the accuracy bit for bit. A class that is never predicted has precision 0,
    one with no gold support has recall 0; both cases are listed in
    ``zero_division``.
    """
    c = cm.counts
    total = int(c.sum())
    if total == 0:
        raise EmptyEvaluation("nothing to score")
    support = [int(x) for x in c.sum(axis=1)]
    predicted = [int(x) for x in c.sum(axis=0)]
    exact, flags = {}, []
    for k, label in enumerate(LABELS):
        tp = int(c[k, k])
        if predicted[k] == 0:
            flags.append(f"precision:{LABEL_NAMES[label]}")
        if support[k] == 0:
            flags.append(f"recall:{LABEL_NAMES[label]}")
        p = _ratio(tp, predicted[k])
        r = _ratio(tp, support[k])
        exact[label] = (p, r, _ratio(2 * p * r, p + r))
    weights = [Fraction(s, total) for s in support]

    def wavg(j):
        return float(sum(w * exact[lab][j] for w, lab in zip(weights, LABELS)))

    per_class = {
        lab: ClassMetrics(float(p), float(r), float(f), support[k], predicted[k])
        for k, (lab, (p, r, f)) in enumerate(exact.items())
    }
    return ClassificationReport(
        per_class=per_class,
        precision=wavg(0),
        recall=wavg(1),
        f_score=wavg(2),
        accuracy=float(Fraction(int(np.trace(c)), total)),
        total=total,
        zero_division=tuple(flags),
        model=model,
    )


def evaluate(gold, pred: PredictionSet, allow_partial: bool = False):
    cm = confusion(gold, pred, allow_partial)
    return cm, report(cm, pred.model)


def format_table(reports, title: str = "Model") -> str:
    """Plain-text table with Precision / Recall / F-score columns."""
    reports = list(reports)
    width = max([len(title)] + [len(r.model) for r in reports])
    lines = [f"{title:<{width}}  {'Precision':>9}  {'Recall':>9}  {'F-score':>9}  {'Accuracy':>9}"]
    for r in reports:
        lines.append(
            f"{r.model:<{width}}  {r.precision:>9.2f}  {r.recall:>9.2f}  {r.f_score:>9.2f}  {r.accuracy:>9.2f}"
        )
    return "\n".join(lines)


@dataclass
class EvaluationRecord:
    report: ClassificationReport
    confusion: ConfusionMatrix
    extra: dict = field(default_factory=dict)


def write_reports(records, path) -> None:
    """One JSON line per model: metrics, confusion matrix and any extras."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            d = rec.report.to_dict()
            d["confusion"] = rec.confusion.to_dict()
            d.update(rec.extra)
            fh.write(json.dumps(d, sort_keys=True) + "\n")
