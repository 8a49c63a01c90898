"""Two-alternative forced-choice harness scoring a distance backbone
against human triplet judgments.

For each triplet (ref, A, B) the backbone prefers the image whose pair with
the reference scores more similar (higher w1kp, i.e. lower normalized
distance). The 2AFC score is the mean fraction of workers agreeing with that
choice; majority accuracy is the fraction of triplets where the choice
matches the worker majority. Exact ties get half credit by default; the
strict policy raises instead so audits can reject ambiguous data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import EmbeddingSet
from .distance import MetricKind, metric_function
from .errors import ValidationError
from .normalization import FittedCdf, apply_cdf

TIE_POLICIES = ("half_credit", "strict")


@dataclass(frozen=True)
class TripletOutcome:
    prefers_a: bool
    votes_a: int
    votes_total: int
    tie: bool = False

    def __post_init__(self):
        if self.votes_total < 1:
            raise ValidationError(f"votes_total must be >= 1, got {self.votes_total}")
        if not 0 <= self.votes_a <= self.votes_total:
            raise ValidationError(
                f"votes_a {self.votes_a} outside [0, {self.votes_total}]"
            )


def _check_policy(tie_policy: str) -> None:
    if tie_policy not in TIE_POLICIES:
        raise ValidationError(
            f"tie_policy must be one of {TIE_POLICIES}, got {tie_policy!r}"
        )


def metric_preference(
    ref,
    a,
    b,
    metric: MetricKind,
    cdf: FittedCdf,
    votes_a: int = 0,
    votes_total: int = 1,
) -> TripletOutcome:
    """Backbone's choice between a and b relative to ref, on w1kp scores."""
    dist = metric_function(metric)
    score_a = 1.0 - apply_cdf(cdf, dist(ref, a))
    score_b = 1.0 - apply_cdf(cdf, dist(ref, b))
    return TripletOutcome(
        prefers_a=score_a > score_b,
        votes_a=votes_a,
        votes_total=votes_total,
        tie=score_a == score_b,
    )


def evaluate_triplets(
    embeddings: EmbeddingSet, triplets, metric: MetricKind, cdf: FittedCdf
) -> list[TripletOutcome]:
    """Metric preference for every triplet judgment, ids resolved by name."""
    vectors = embeddings.vectors
    outcomes = []
    for t in triplets:
        outcomes.append(
            metric_preference(
                vectors[embeddings.index_of(t.ref)],
                vectors[embeddings.index_of(t.a)],
                vectors[embeddings.index_of(t.b)],
                metric,
                cdf,
                votes_a=t.votes_a,
                votes_total=t.votes_total,
            )
        )
    return outcomes


def _check_paired(triplets, outcomes):
    if len(triplets) != len(outcomes):
        raise ValidationError(
            f"{len(triplets)} triplets paired with {len(outcomes)} outcomes"
        )
    if not triplets:
        raise ValidationError("need at least one triplet")


def twoafc_score(triplets, outcomes, tie_policy: str = "half_credit") -> float:
    """Mean proportion of workers agreeing with the backbone's choices."""
    _check_paired(triplets, outcomes)
    _check_policy(tie_policy)
    contributions = []
    for t, o in zip(triplets, outcomes):
        frac_a = t.votes_a / t.votes_total
        if o.tie:
            if tie_policy == "strict":
                raise ValidationError(
                    f"metric tie on triplet at line {t.line} under strict policy"
                )
            contributions.append(0.5)
        elif o.prefers_a:
            contributions.append(frac_a)
        else:
            contributions.append(1.0 - frac_a)
    return math.fsum(contributions) / len(contributions)


def majority_accuracy(triplets, outcomes, tie_policy: str = "half_credit") -> float:
    """Fraction of triplets where the backbone matches the worker majority."""
    _check_paired(triplets, outcomes)
    _check_policy(tie_policy)
    credits = []
    for t, o in zip(triplets, outcomes):
        vote_margin = 2 * t.votes_a - t.votes_total
        if vote_margin == 0 or o.tie:
            if tie_policy == "strict":
                kind = "even vote split" if vote_margin == 0 else "metric tie"
                raise ValidationError(
                    f"{kind} on triplet at line {t.line} under strict policy"
                )
            credits.append(0.5)
        else:
            majority_a = vote_margin > 0
            credits.append(1.0 if o.prefers_a == majority_a else 0.0)
    return math.fsum(credits) / len(credits)


def oracle_bounds(triplets) -> tuple[float, float]:
    """Best achievable (2AFC, accuracy) for the dataset: always side with
    the worker majority."""
    triplets = list(triplets)
    if not triplets:
        raise ValidationError("need at least one triplet")
    best = [
        max(t.votes_a / t.votes_total, 1.0 - t.votes_a / t.votes_total)
        for t in triplets
    ]
    return math.fsum(best) / len(best), 1.0


def summarize(triplets, outcomes, tie_policy: str = "half_credit") -> dict:
    """Results document for the eval-2afc command."""
    oracle_twoafc, _ = oracle_bounds(triplets)
    return {
        "twoafc": twoafc_score(triplets, outcomes, tie_policy),
        "accuracy": majority_accuracy(triplets, outcomes, tie_policy),
        "oracle_twoafc": oracle_twoafc,
        "n_triplets": len(list(triplets)),
        "ties": sum(1 for o in outcomes if o.tie),
    }


def make_outcomes(triplets, prefers: list[bool]) -> list[TripletOutcome]:
    """Pair explicit preference booleans with triplet vote counts."""
    triplets = list(triplets)
    if len(triplets) != len(prefers):
        raise ValidationError("preference list length mismatch")
    return [
        TripletOutcome(
            prefers_a=p, votes_a=t.votes_a, votes_total=t.votes_total, tie=False
        )
        for t, p in zip(triplets, prefers)
    ]
