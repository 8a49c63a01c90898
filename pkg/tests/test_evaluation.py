import numpy as np
import pytest

from w1kp import (
    EmbeddingSet,
    MetricKind,
    TripletJudgment,
    TripletOutcome,
    ValidationError,
    evaluate_triplets,
    fit_cdf,
    majority_accuracy,
    metric_preference,
    oracle_bounds,
    twoafc_score,
)
from w1kp.evaluation import make_outcomes, summarize

CDF = fit_cdf([0.5, 1.0, 1.5, 2.0, 3.0], MetricKind.EUCLIDEAN)


def triplet(votes_a, votes_total=5):
    return TripletJudgment(ref="r", a="a", b="b", votes_a=votes_a, votes_total=votes_total)


class TestMetricPreference:
    def test_zero_distance_wins(self):
        ref = np.array([1.0, 0.0])
        outcome = metric_preference(ref, ref, np.array([5.0, 5.0]), MetricKind.EUCLIDEAN, CDF)
        assert outcome.prefers_a and not outcome.tie

    def test_identical_candidates_tie(self):
        ref = np.array([0.0, 0.0])
        v = np.array([1.0, 1.0])
        outcome = metric_preference(ref, v, v.copy(), MetricKind.EUCLIDEAN, CDF)
        assert outcome.tie and not outcome.prefers_a

    def test_agrees_with_direct_comparison(self):
        rng = np.random.default_rng(8)
        from w1kp import apply_cdf, euclidean

        for _ in range(25):
            ref, a, b = rng.standard_normal((3, 6))
            outcome = metric_preference(ref, a, b, MetricKind.EUCLIDEAN, CDF)
            score_a = 1.0 - apply_cdf(CDF, euclidean(ref, a))
            score_b = 1.0 - apply_cdf(CDF, euclidean(ref, b))
            assert outcome.prefers_a == (score_a > score_b)
            assert outcome.tie == (score_a == score_b)


class TestTwoAfc:
    def test_unanimous_agreement(self):
        t = [triplet(5)]
        assert twoafc_score(t, make_outcomes(t, [True])) == 1.0

    def test_three_of_five_agree(self):
        t = [triplet(3)]
        assert twoafc_score(t, make_outcomes(t, [True])) == pytest.approx(0.6)

    def test_three_of_five_disagree(self):
        t = [triplet(3)]
        assert twoafc_score(t, make_outcomes(t, [False])) == pytest.approx(0.4)

    def test_flip_identity(self):
        rng = np.random.default_rng(3)
        triplets = [triplet(int(rng.integers(0, 6))) for _ in range(40)]
        prefs = [bool(rng.integers(0, 2)) for _ in range(40)]
        s = twoafc_score(triplets, make_outcomes(triplets, prefs))
        flipped = twoafc_score(triplets, make_outcomes(triplets, [not p for p in prefs]))
        assert flipped == pytest.approx(1.0 - s)

    def test_tie_half_credit(self):
        t = [triplet(5)]
        outcomes = [TripletOutcome(prefers_a=False, votes_a=5, votes_total=5, tie=True)]
        assert twoafc_score(t, outcomes) == 0.5

    def test_tie_strict_raises(self):
        t = [triplet(5)]
        outcomes = [TripletOutcome(prefers_a=False, votes_a=5, votes_total=5, tie=True)]
        with pytest.raises(ValidationError, match="tie"):
            twoafc_score(t, outcomes, tie_policy="strict")

    def test_never_exceeds_oracle(self):
        rng = np.random.default_rng(7)
        for trial in range(20):
            triplets = [triplet(int(rng.integers(0, 6))) for _ in range(30)]
            prefs = [bool(rng.integers(0, 2)) for _ in range(30)]
            s = twoafc_score(triplets, make_outcomes(triplets, prefs))
            max_2afc, _ = oracle_bounds(triplets)
            assert s <= max_2afc + 1e-12

    def test_majority_following_matches_oracle(self):
        rng = np.random.default_rng(9)
        triplets = [triplet(int(rng.integers(0, 6))) for _ in range(30)]
        triplets = [t for t in triplets if 2 * t.votes_a != t.votes_total]
        prefs = [2 * t.votes_a > t.votes_total for t in triplets]
        s = twoafc_score(triplets, make_outcomes(triplets, prefs))
        max_2afc, _ = oracle_bounds(triplets)
        assert s == pytest.approx(max_2afc)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            twoafc_score([triplet(3)], [])


class TestMajorityAccuracy:
    def test_majority_agreement_counts(self):
        t = [triplet(4)]
        assert majority_accuracy(t, make_outcomes(t, [True])) == 1.0

    def test_minority_choice_incorrect(self):
        t = [triplet(2)]
        assert majority_accuracy(t, make_outcomes(t, [True])) == 0.0

    def test_ten_triplet_hand_tally(self):
        votes = [5, 4, 3, 2, 1, 0, 5, 1, 4, 3]
        prefs = [True, True, False, False, False, False, True, True, True, False]
        # correct: v>2.5 wants True, v<2.5 wants False
        expected = [1, 1, 0, 1, 1, 1, 1, 0, 1, 0]
        triplets = [triplet(v) for v in votes]
        got = majority_accuracy(triplets, make_outcomes(triplets, prefs))
        assert got == pytest.approx(sum(expected) / 10)

    def test_even_split_strict_raises(self):
        t = [triplet(2, votes_total=4)]
        with pytest.raises(ValidationError, match="even vote split"):
            majority_accuracy(t, make_outcomes(t, [True]), tie_policy="strict")

    def test_even_split_half_credit(self):
        t = [triplet(2, votes_total=4)]
        assert majority_accuracy(t, make_outcomes(t, [True])) == 0.5

    def test_metric_tie_half_credit(self):
        t = [triplet(5)]
        outcomes = [TripletOutcome(prefers_a=False, votes_a=5, votes_total=5, tie=True)]
        assert majority_accuracy(t, outcomes) == 0.5


class TestOracleBounds:
    def test_three_of_five(self):
        assert oracle_bounds([triplet(3)]) == (pytest.approx(0.6), 1.0)

    def test_all_unanimous(self):
        max_2afc, max_acc = oracle_bounds([triplet(5), triplet(0)])
        assert max_2afc == 1.0 and max_acc == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            oracle_bounds([])


class TestPipeline:
    def test_evaluate_triplets_and_summary(self):
        vectors = np.array(
            [[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [0.2, 0.1]], dtype=np.float32
        )
        emb = EmbeddingSet(ids=("ref", "near", "far", "close"), vectors=vectors)
        judgments = [
            TripletJudgment(ref="ref", a="near", b="far", votes_a=5, votes_total=5),
            TripletJudgment(ref="ref", a="far", b="close", votes_a=1, votes_total=5),
        ]
        outcomes = evaluate_triplets(emb, judgments, MetricKind.EUCLIDEAN, CDF)
        assert outcomes[0].prefers_a is True
        assert outcomes[1].prefers_a is False
        doc = summarize(judgments, outcomes)
        assert doc["n_triplets"] == 2 and doc["ties"] == 0
        assert doc["twoafc"] == pytest.approx((1.0 + 0.8) / 2)
        assert doc["accuracy"] == 1.0
        assert doc["oracle_twoafc"] == pytest.approx((1.0 + 0.8) / 2)

    def test_unknown_id_rejected(self):
        emb = EmbeddingSet(ids=("x", "y"), vectors=np.eye(2, dtype=np.float32))
        judgments = [TripletJudgment(ref="x", a="y", b="zz", votes_a=3, votes_total=5)]
        with pytest.raises(ValidationError, match="unknown image id"):
            evaluate_triplets(emb, judgments, MetricKind.EUCLIDEAN, CDF)
