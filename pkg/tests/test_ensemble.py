import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketlabel.errors import CapExceeded, DataError, ValidationError
from marketlabel.ingest import PredictionSet
from marketlabel.ensemble import (
    JuryModel,
    agreement,
    bag,
    independence_report,
    jury_accuracy,
    jury_accuracy_exact,
    jury_accuracy_mc,
    majority_vote,
    simulate_jury,
    vote_winners,
)

LABELS = (-1, 0, 1)
votes_st = st.lists(st.sampled_from(LABELS), min_size=1, max_size=9)


class CountingRng:
    def __init__(self, seed=0):
        self.rng = np.random.default_rng(seed)
        self.calls = 0

    def integers(self, *args, **kwargs):
        self.calls += 1
        return self.rng.integers(*args, **kwargs)


def win_probabilities(votes):
    """Distribution of the majority-vote outcome, derived by hand from the tie rule."""
    counts = {lab: votes.count(lab) for lab in LABELS}
    top = max(counts.values())
    tied = [lab for lab in LABELS if counts[lab] == top]
    if len(tied) == 1:
        return {tied[0]: Fraction(1)}
    mean = Fraction(sum(tied), len(tied))
    if mean.denominator == 1:
        return {int(mean): Fraction(1)}
    return {lab: Fraction(1, len(tied)) for lab in tied}


# --------------------------------------------------------------- majority vote

def test_vote_examples():
    assert majority_vote([-1, 1]) == 0
    assert majority_vote([1, 1, 0]) == 1
    assert majority_vote([-1, 0, 1]) == 0
    assert majority_vote([1, 1, -1, -1, 0]) == 0


def test_vote_random_branch_reproducible_and_fair():
    first = [majority_vote([0, 1], np.random.default_rng(0)) for _ in range(3)]
    assert len(set(first)) == 1
    rng = np.random.default_rng(12345)
    picks = [majority_vote([0, 1], rng) for _ in range(10_000)]
    assert set(picks) == {0, 1}
    assert np.mean(np.array(picks) == 1) == pytest.approx(0.5, abs=0.03)
    with pytest.raises(ValidationError):
        majority_vote([0, 1])


@given(votes_st, st.randoms())
def test_vote_permutation_invariant(votes, rnd):
    shuffled = votes[:]
    rnd.shuffle(shuffled)
    # same generator state for both calls
    assert majority_vote(votes, np.random.default_rng(1)) == majority_vote(shuffled, np.random.default_rng(1))


@given(votes_st)
def test_vote_sign_symmetric(votes):
    dist = win_probabilities(votes)
    flipped = win_probabilities([-v for v in votes])
    assert flipped == {-k: p for k, p in dist.items()}
    if len(dist) == 1:
        assert majority_vote([-v for v in votes]) == -majority_vote(votes)
    else:
        assert majority_vote(votes, np.random.default_rng(0)) in dist


@given(votes_st)
def test_vote_outcome_in_support(votes):
    dist = win_probabilities(votes)
    rng = CountingRng()
    assert majority_vote(votes, rng) in dist
    assert rng.calls == (0 if len(dist) == 1 else 1)


def test_vectorized_vote_agrees():
    rng = np.random.default_rng(4)
    votes = rng.integers(-1, 2, size=(5000, 4))
    winners = vote_winners(votes, np.random.default_rng(5))
    for row, w in zip(votes.tolist(), winners):
        assert w in win_probabilities(row)
    ties = [i for i, row in enumerate(votes.tolist()) if win_probabilities(row) == {0: 1/2, 1: 1/2}]
    assert np.mean(winners[ties] == 1) == pytest.approx(0.5, abs=0.05)


# ------------------------------------------------------------------------ bag

def _pred(name, labels):
    return PredictionSet(name, {f"h{i}": v for i, v in enumerate(labels)})


def test_bag_identical():
    a = _pred("a", [1, 0, -1, 1])
    out = bag([a, _pred("b", [1, 0, -1, 1])])
    assert out.labels == a.labels and out.model == "a+b"


def test_bag_agreeing_pair_wins():
    rng = np.random.default_rng(0)
    x = rng.integers(-1, 2, 200).tolist()
    z = rng.integers(-1, 2, 200).tolist()
    out = bag([_pred("a", x), _pred("b", z), _pred("c", x)])
    assert list(out.labels.values()) == x


def test_bag_id_mismatch():
    with pytest.raises(DataError):
        bag([PredictionSet("a", {"h1": 1}), PredictionSet("b", {"h2": 1})])
    with pytest.raises(ValidationError):
        bag([PredictionSet("a", {"h1": 1})])


def test_bag_unanimous_profiles_draw_nothing():
    rng = np.random.default_rng(3)
    base = rng.integers(-1, 2, 500)
    preds = [_pred("a", base.tolist()), _pred("b", base.tolist())]
    # third member disagrees freely, the other two always form a 2-of-3 majority
    preds.append(_pred("c", rng.integers(-1, 2, 500).tolist()))
    counter = CountingRng()
    bag(preds, rng=counter)
    assert counter.calls == 0


def test_bag_no_improvement_flag():
    gold = {f"h{i}": int(v) for i, v in enumerate(np.random.default_rng(0).integers(-1, 2, 3000))}
    preds = simulate_jury(gold, JuryModel(3, 0.6, rho=1.0), seed=1)
    rep = independence_report(preds, gold)
    assert rep.bagged.accuracy <= max(r.accuracy for r in rep.individual)
    assert rep.no_improvement
    indep = independence_report(simulate_jury(gold, JuryModel(3, 0.6), seed=1), gold)
    assert not indep.no_improvement


# -------------------------------------------------------------- jury accuracy

def jury_by_vote_vectors(n, p, gold_label):
    """Enumerate all 3**n individual vote vectors (exact rationals)."""
    p = Fraction(p).limit_denominator(10_000)
    wrong = [lab for lab in LABELS if lab != gold_label]
    law = {gold_label: p, wrong[0]: (1 - p) / 2, wrong[1]: (1 - p) / 2}
    total = Fraction(0)
    for votes in itertools.product(LABELS, repeat=n):
        prob = Fraction(1)
        for v in votes:
            prob *= law[v]
        total += prob * win_probabilities(list(votes)).get(gold_label, 0)
    return total


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("p", [0.4, 0.6, 0.85])
def test_exact_matches_vote_vector_enumeration(n, p):
    for g in LABELS:
        expected = float(jury_by_vote_vectors(n, p, g))
        assert jury_accuracy_exact(JuryModel(n, p), gold_label=g) == pytest.approx(expected, abs=1e-12)
    avg = float(sum(jury_by_vote_vectors(n, p, g) for g in LABELS) / 3)
    assert jury_accuracy_exact(JuryModel(n, p)) == pytest.approx(avg, abs=1e-12)


def test_single_juror_and_perfect_jury():
    for p in (0.2, 0.5, 0.73):
        assert jury_accuracy_exact(JuryModel(1, p)) == pytest.approx(p, abs=1e-15)
    assert jury_accuracy_exact(JuryModel(7, 1.0)) == 1.0


def test_five_jurors_against_monte_carlo():
    exact = jury_accuracy_exact(JuryModel(5, 0.6))
    assert exact > 0.6
    assert jury_accuracy_mc(JuryModel(5, 0.6), 1_000_000, seed=2024) == pytest.approx(exact, abs=0.002)


@settings(deadline=None, max_examples=40)
@given(st.floats(0.34, 0.99), st.sampled_from([1, 3, 5, 7, 9, 11, 13]))
def test_condorcet_monotone_odd(p, n):
    m = jury_accuracy_exact(JuryModel(n, p))
    m2 = jury_accuracy_exact(JuryModel(n + 2, p))
    assert m2 >= m - 1e-12


@settings(deadline=None, max_examples=40)
@given(st.floats(0.34, 0.99), st.integers(3, 15))
def test_condorcet_beats_individual(p, n):
    assert jury_accuracy_exact(JuryModel(n, p)) > p


def test_correlated_mixture_is_exact():
    indep = jury_accuracy_exact(JuryModel(5, 0.6))
    mixed = jury_accuracy_exact(JuryModel(5, 0.6, rho=0.3))
    assert mixed == pytest.approx(0.3 * 0.6 + 0.7 * indep)
    assert jury_accuracy_mc(JuryModel(5, 0.6, rho=0.3), 400_000, seed=8) == pytest.approx(mixed, abs=0.004)


def test_cap_and_fallback():
    with pytest.raises(CapExceeded):
        jury_accuracy_exact(JuryModel(26, 0.6))
    assert jury_accuracy_exact(JuryModel(25, 0.6)) > jury_accuracy_exact(JuryModel(23, 0.6))
    with pytest.warns(UserWarning, match="Monte Carlo"):
        v = jury_accuracy(JuryModel(31, 0.6), draws=50_000)
    assert v > jury_accuracy_exact(JuryModel(25, 0.6)) - 0.01


def test_jury_model_validation():
    with pytest.raises(ValidationError):
        JuryModel(0, 0.6)
    with pytest.raises(ValidationError):
        JuryModel(3, 0.6, rho=1.5)
    with pytest.raises(ValidationError):
        JuryModel(3, 0.6, error_split=(0.7, 0.7))
    assert JuryModel(3, 0.34).beats_random and not JuryModel(3, 0.3).beats_random


# ------------------------------------------------------------------ simulation

def _gold(n, seed=0):
    return {f"item-{i:06d}": int(v) for i, v in enumerate(np.random.default_rng(seed).integers(-1, 2, n))}


def test_full_correlation_gives_identical_sets():
    preds = simulate_jury(_gold(500), JuryModel(4, 0.55, rho=1.0), seed=3)
    assert len(preds) == 4
    assert all(p.labels == preds[0].labels for p in preds)


def test_simulation_seeded():
    a = simulate_jury(_gold(100), JuryModel(3, 0.6, rho=0.4), seed=9)
    b = simulate_jury(_gold(100), JuryModel(3, 0.6, rho=0.4), seed=9)
    assert [p.labels for p in a] == [p.labels for p in b]


def test_individual_accuracy_and_error_split():
    gold = _gold(20_000)
    preds = simulate_jury(gold, JuryModel(2, 0.6, error_split=(0.8, 0.2)), seed=4)
    g = np.array(list(gold.values()))
    v = np.array(list(preds[0].labels.values()))
    assert np.mean(v == g) == pytest.approx(0.6, abs=0.015)
    wrong = v != g
    low = np.where(g == -1, 0, -1)
    assert np.mean(v[wrong] == low[wrong]) == pytest.approx(0.8, abs=0.02)


def test_independent_jury_converges_to_exact():
    gold = _gold(10_000, seed=1)
    model = JuryModel(5, 0.6)
    preds = simulate_jury(gold, model, seed=2)
    bagged = bag(preds, seed=3)
    acc = np.mean([bagged.labels[i] == g for i, g in gold.items()])
    counts = {lab: sum(1 for g in gold.values() if g == lab) for lab in LABELS}
    assert acc == pytest.approx(jury_accuracy_exact(model, gold_label=counts), abs=0.015)


def test_correlated_jury_no_improvement():
    gold = _gold(10_000, seed=1)
    preds = simulate_jury(gold, JuryModel(5, 0.6, rho=1.0), seed=2)
    bagged = bag(preds, seed=3)
    acc = np.mean([bagged.labels[i] == g for i, g in gold.items()])
    assert acc == pytest.approx(0.6, abs=0.015)


# ----------------------------------------------------------------- diagnostics

def test_agreement_identical():
    a = _pred("a", [1, 0, -1, 1, 1])
    pa = agreement(a, _pred("b", [1, 0, -1, 1, 1]))
    assert pa.observed == 1.0 and pa.kappa == 1.0
    const = agreement(_pred("a", [1, 1]), _pred("b", [1, 1]))
    assert const.kappa == 1.0


def test_agreement_hand_computed():
    a = _pred("a", [1, 1, 0, -1])
    b = _pred("b", [1, 0, 0, 1])
    pa = agreement(a, b)
    # observed 2/4; marginals a = (1/4, 1/4, 2/4), b = (0, 2/4, 2/4) -> expected 1/8 + 1/4
    assert pa.observed == 0.5
    assert pa.expected == pytest.approx(0.375)
    assert pa.kappa == pytest.approx((0.5 - 0.375) / 0.625)


def test_kappa_near_zero_when_independent():
    gold = _gold(10_000, seed=6)
    rep = independence_report(simulate_jury(gold, JuryModel(3, 0.6), seed=7), gold)
    for pa in rep.pairs:
        assert pa.conditional_kappa == pytest.approx(0.0, abs=0.05)
        # raw kappa carries the shared accuracy: (0.44 - 1/3) / (2/3)
        assert pa.kappa == pytest.approx(0.16, abs=0.03)


@pytest.mark.parametrize("rho", [0.25, 0.5, 0.9])
def test_conditional_kappa_recovers_rho(rho):
    gold = _gold(10_000, seed=8)
    rep = independence_report(simulate_jury(gold, JuryModel(3, 0.6, rho=rho), seed=9), gold)
    assert rep.mean_conditional_kappa == pytest.approx(rho, abs=0.04)


def test_rho_sweep():
    gold = _gold(10_000, seed=6)
    deltas, kappas = [], []
    for rho in (0.0, 0.4, 0.8, 1.0):
        rep = independence_report(simulate_jury(gold, JuryModel(5, 0.6, rho=rho), seed=7), gold)
        deltas.append(rep.bagging_delta)
        kappas.append(rep.mean_conditional_kappa)
    assert kappas == sorted(kappas)
    assert kappas[2] > 0.5
    assert deltas[0] > 0.1
    assert abs(deltas[2]) < 0.06
    assert deltas == sorted(deltas, reverse=True)


def test_independence_report_needs_two():
    with pytest.raises(ValidationError):
        independence_report([_pred("a", [1])], {"h0": 1})
