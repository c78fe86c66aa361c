"""Majority-vote bagging and Condorcet jury experiments.

Tie rule for a vote over {-1, 0, +1}: a unique plurality wins; otherwise, if
the mean of the tied-top labels is itself a label (e.g. -1 and +1 tie -> 0),
that label wins; otherwise one of the tied-top labels is drawn uniformly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import CapExceeded, DataError, ValidationError
from .ingest import LABELS, PredictionSet
from .metrics import ClassificationReport, evaluate

DEFAULT_CAP = 25

# wrong labels of each gold label, in ascending order
_WRONG = {-1: (0, 1), 0: (-1, 1), 1: (-1, 0)}


def majority_vote(votes, rng: np.random.Generator | None = None) -> int:
    """Combine one item's votes; ``rng`` is touched only for unresolved ties."""
    votes = [int(v) for v in votes]
    if not votes:
        raise ValidationError("majority_vote needs at least one vote")
    counts = {lab: 0 for lab in LABELS}
    for v in votes:
        if v not in counts:
            raise ValidationError(f"unknown label {v}")
        counts[v] += 1
    top = max(counts.values())
    tied = [lab for lab in LABELS if counts[lab] == top]
    if len(tied) == 1:
        return tied[0]
    total = sum(tied)
    if total % len(tied) == 0:
        return total // len(tied)
    if rng is None:
        raise ValidationError(f"tie between {tied} needs a random generator")
    return tied[int(rng.integers(len(tied)))]


def vote_winners(votes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row-wise :func:`majority_vote` for an ``(items, voters)`` label array."""
    votes = np.asarray(votes)
    labels = np.array(LABELS)
    counts = np.stack([(votes == lab).sum(axis=1) for lab in LABELS], axis=1)
    tied = counts == counts.max(axis=1, keepdims=True)
    n_tied = tied.sum(axis=1)
    tied_sum = (tied * labels).sum(axis=1)
    out = np.empty(len(votes), dtype=np.int64)
    single = n_tied == 1
    out[single] = labels[np.argmax(tied[single], axis=1)]
    mean_ok = ~single & (tied_sum % n_tied == 0)
    out[mean_ok] = tied_sum[mean_ok] // n_tied[mean_ok]
    rest = np.flatnonzero(~single & ~mean_ok)
    if len(rest):
        pick = rng.integers(0, n_tied[rest])
        # position of the pick-th tied label in each row
        order = np.cumsum(tied[rest], axis=1) - 1
        col = np.argmax((order == pick[:, None]) & tied[rest], axis=1)
        out[rest] = labels[col]
    return out


def _common_ids(predictions) -> list[str]:
    ids = predictions[0].ids()
    ref = set(ids)
    for p in predictions[1:]:
        if set(p.labels) != ref:
            extra = set(p.labels) ^ ref
            raise DataError(
                f"prediction sets {predictions[0].model!r} and {p.model!r} cover different ids "
                f"({len(extra)} differ, e.g. {sorted(extra)[0]!r})"
            )
    return ids


def bag(predictions, seed: int | np.random.SeedSequence = 0, rng: np.random.Generator | None = None) -> PredictionSet:
    """Majority-vote several prediction sets over an identical id set."""
    predictions = list(predictions)
    if len(predictions) < 2:
        raise ValidationError("bagging needs at least two prediction sets")
    ids = _common_ids(predictions)
    rng = rng if rng is not None else np.random.default_rng(seed)
    labels = {hid: majority_vote([p.labels[hid] for p in predictions], rng) for hid in ids}
    return PredictionSet("+".join(p.model for p in predictions), labels)


# ------------------------------------------------------------------------- juries

@dataclass(frozen=True)
class JuryModel:
    """``n`` exchangeable classifiers of equal accuracy.

    ``error_split`` gives the probabilities of the lower and higher wrong
    label given a mistake. ``rho`` is the chance that, for a given item, all
    classifiers copy one shared draw instead of voting independently.
    """

    n: int
    accuracy: float
    error_split: tuple[float, float] = (0.5, 0.5)
    rho: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValidationError("accuracy must lie in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValidationError("rho must lie in [0, 1]")
        lo, hi = self.error_split
        if lo < 0 or hi < 0 or not math.isclose(lo + hi, 1.0):
            raise ValidationError("error_split must be two non-negative probabilities summing to 1")

    @property
    def beats_random(self) -> bool:
        return self.accuracy > 1.0 / 3.0


def _gold_prior(gold_label):
    if gold_label is None:
        return {lab: 1.0 / 3.0 for lab in LABELS}
    if isinstance(gold_label, dict):
        total = sum(gold_label.values())
        return {lab: gold_label.get(lab, 0.0) / total for lab in LABELS}
    if gold_label not in LABELS:
        raise ValidationError(f"unknown label {gold_label}")
    return {gold_label: 1.0}


def _p_correct_given_counts(gold: int, counts: dict[int, int]) -> float:
    top = max(counts.values())
    tied = [lab for lab in LABELS if counts[lab] == top]
    if len(tied) == 1:
        return float(tied[0] == gold)
    total = sum(tied)
    if total % len(tied) == 0:
        return float(total // len(tied) == gold)
    return (gold in tied) / len(tied)


def jury_accuracy_exact(model: JuryModel, gold_label=None, cap: int = DEFAULT_CAP) -> float:
    """Majority-vote accuracy by enumerating every vote-count composition.

    ``gold_label`` fixes the true class, or is a ``{label: weight}`` prior;
    the default averages over a uniform prior because the mean-label tie rule
    treats the classes asymmetrically. With ``rho > 0`` the result is the
    exact mixture ``rho * accuracy + (1 - rho) * independent accuracy``.
    """
    if model.n > cap:
        raise CapExceeded(f"n={model.n} exceeds the enumeration cap of {cap}")
    n, p = model.n, model.accuracy
    e_lo, e_hi = ((1.0 - p) * s for s in model.error_split)
    acc = 0.0
    for gold, w in _gold_prior(gold_label).items():
        if w == 0:
            continue
        lo, hi = _WRONG[gold]
        part = 0.0
        for c in range(n + 1):
            for a in range(n - c + 1):
                b = n - c - a
                prob = math.comb(n, c) * math.comb(n - c, a) * p**c * e_lo**a * e_hi**b
                if prob:
                    part += prob * _p_correct_given_counts(gold, {gold: c, lo: a, hi: b})
        acc += w * part
    return model.rho * p + (1.0 - model.rho) * acc


def _draw_votes(gold: np.ndarray, model: JuryModel, size, rng: np.random.Generator) -> np.ndarray:
    """Labels drawn from the per-classifier law; ``size`` broadcasts against gold."""
    g = np.broadcast_to(gold.reshape(gold.shape + (1,) * (len(size) - 1)), size)
    u = rng.random(size)
    v = rng.random(size)
    wrong_lo = np.select([g == -1, g == 0], [0, -1], -1)
    wrong_hi = np.select([g == -1, g == 0], [1, 1], 0)
    wrong = np.where(v < model.error_split[0], wrong_lo, wrong_hi)
    return np.where(u < model.accuracy, g, wrong).astype(np.int64)


def _jury_votes(gold: np.ndarray, model: JuryModel, rng: np.random.Generator) -> np.ndarray:
    m = len(gold)
    shared = rng.random(m) < model.rho
    common = _draw_votes(gold, model, (m,), rng)
    indiv = _draw_votes(gold, model, (m, model.n), rng)
    return np.where(shared[:, None], common[:, None], indiv)


def jury_accuracy_mc(model: JuryModel, draws: int = 100_000, seed=0, gold_label=None) -> float:
    """Monte Carlo estimate of majority-vote accuracy (any ``n``, any ``rho``)."""
    rng = np.random.default_rng(seed)
    prior = _gold_prior(gold_label)
    gold = rng.choice(np.array(LABELS), size=draws, p=[prior[lab] for lab in LABELS])
    winners = vote_winners(_jury_votes(gold, model, rng), rng)
    return float(np.mean(winners == gold))


def jury_accuracy(model: JuryModel, gold_label=None, cap: int = DEFAULT_CAP, draws: int = 200_000, seed=0) -> float:
    """Exact accuracy up to ``cap`` voters, Monte Carlo (with a warning) beyond."""
    try:
        return jury_accuracy_exact(model, gold_label, cap)
    except CapExceeded:
        warnings.warn(f"n={model.n} > {cap}: falling back to Monte Carlo with {draws} draws", stacklevel=2)
        return jury_accuracy_mc(model, draws, seed, gold_label)


def simulate_jury(gold, model: JuryModel, seed=0) -> list[PredictionSet]:
    """Synthetic prediction sets for ``model.n`` classifiers.

    ``gold`` is a ``{id: label}`` map or a label sequence (ids ``item-000000``...).
    Per item, with probability ``rho`` every classifier copies one shared draw.
    """
    if isinstance(gold, dict):
        ids, labels = list(gold), list(gold.values())
    else:
        labels = list(gold)
        ids = [f"item-{i:06d}" for i in range(len(labels))]
    if not labels:
        raise ValidationError("gold must be non-empty")
    g = np.asarray(labels, dtype=np.int64)
    if not np.isin(g, LABELS).all():
        raise ValidationError("gold labels must be -1, 0 or +1")
    votes = _jury_votes(g, model, np.random.default_rng(seed))
    return [
        PredictionSet(f"juror-{j + 1}", dict(zip(ids, votes[:, j].tolist())))
        for j in range(model.n)
    ]


# ------------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class PairAgreement:
    model_a: str
    model_b: str
    observed: float
    expected: float
    kappa: float
    conditional_kappa: float | None = None


@dataclass
class IndependenceReport:
    """Pairwise agreement diagnostics and bagging gain.

    These quantities are descriptive; the bagging check only says whether the
    majority vote beat its best member by more than ``min_gain``.
    """

    pairs: list[PairAgreement]
    individual: list[ClassificationReport]
    bagged: ClassificationReport
    best_individual_f: float
    bagging_delta: float
    min_gain: float = 0.0
    bagged_predictions: PredictionSet | None = field(default=None, repr=False)

    @property
    def mean_kappa(self) -> float:
        return float(np.mean([p.kappa for p in self.pairs]))

    @property
    def mean_conditional_kappa(self) -> float:
        """Mean gold-stratified kappa, the dependence between errors beyond shared accuracy."""
        return float(np.mean([p.conditional_kappa for p in self.pairs]))

    @property
    def mean_individual_accuracy(self) -> float:
        return float(np.mean([r.accuracy for r in self.individual]))

    @property
    def no_improvement(self) -> bool:
        return self.bagging_delta <= self.min_gain

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {"model_a": p.model_a, "model_b": p.model_b, "observed_agreement": p.observed,
                 "expected_agreement": p.expected, "kappa": p.kappa,
                 "conditional_kappa": p.conditional_kappa}
                for p in self.pairs
            ],
            "mean_kappa": self.mean_kappa,
            "mean_conditional_kappa": self.mean_conditional_kappa,
            "individual": [r.to_dict() for r in self.individual],
            "bagged": self.bagged.to_dict(),
            "best_individual_f_score": self.best_individual_f,
            "bagging_delta_f_score": self.bagging_delta,
            "no_improvement": self.no_improvement,
        }


def _kappa(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    obs = float(np.mean(x == y))
    exp = float(sum(np.mean(x == lab) * np.mean(y == lab) for lab in LABELS))
    if exp >= 1.0:
        return obs, exp, (1.0 if obs >= 1.0 else 0.0)
    return obs, exp, (obs - exp) / (1.0 - exp)


def agreement(a: PredictionSet, b: PredictionSet, gold: dict[str, int] | None = None) -> PairAgreement:
    """Observed agreement, chance agreement from the marginals, and Cohen's kappa.

    Two accurate models agree beyond chance simply because both follow the
    truth, so raw kappa is positive even for conditionally independent
    models. With ``gold`` the kappa is also computed inside each gold class
    and averaged by class size; that number is near zero for independent
    errors and equals ``rho`` for the shared-draw simulation.
    """
    ids = list(a.labels)
    x = np.array([a.labels[i] for i in ids])
    y = np.array([b.labels[i] for i in ids])
    obs, exp, kappa = _kappa(x, y)
    conditional = None
    if gold is not None:
        g = np.array([gold[i] for i in ids])
        parts = [(int(np.sum(g == lab)), _kappa(x[g == lab], y[g == lab])[2]) for lab in LABELS if np.any(g == lab)]
        conditional = sum(n * k for n, k in parts) / sum(n for n, _ in parts)
    return PairAgreement(a.model, b.model, obs, exp, kappa, conditional)


def independence_report(predictions, gold: dict[str, int], seed=0, min_gain: float = 0.0) -> IndependenceReport:
    predictions = list(predictions)
    if len(predictions) < 2:
        raise ValidationError("independence diagnostics need at least two models")
    _common_ids(predictions)
    pairs = [agreement(a, b, gold) for a, b in combinations(predictions, 2)]
    individual = [evaluate(gold, p)[1] for p in predictions]
    bagged_pred = bag(predictions, seed)
    bagged = evaluate(gold, bagged_pred)[1]
    best = max(r.f_score for r in individual)
    return IndependenceReport(pairs, individual, bagged, best, bagged.f_score - best, min_gain, bagged_pred)
