"""Similarity-level calibration: cutoff fitting, classification, evaluation.

Three thresholds beta_low < beta_mid < beta_high partition [0, 1] into the
levels none [0, beta_low), low [beta_low, beta_mid), mid [beta_mid, beta_high)
and high [beta_high, 1]. Fitting maximizes the fraction of labeled scores that
land in their own label's segment, exactly, over candidate thresholds placed
at midpoints between consecutive distinct sorted scores (plus boundary
candidates), using class prefix counts instead of a grid search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import SIMILARITY_LABELS
from .errors import CalibrationError, FormatError, ValidationError

CUTOFFS_ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class CalibrationCutoffs:
    beta_low: float
    beta_mid: float
    beta_high: float

    def __post_init__(self):
        if not 0.0 < self.beta_low < self.beta_mid < self.beta_high < 1.0:
            raise ValidationError(
                "cutoffs must satisfy 0 < beta_low < beta_mid < beta_high < 1, got "
                f"({self.beta_low}, {self.beta_mid}, {self.beta_high})"
            )


# Shipped defaults from the method's original human-calibration study, kept
# for display purposes; refit against your own judgments for new backbones.
DEFAULT_CUTOFFS = CalibrationCutoffs(beta_low=0.2, beta_mid=0.4, beta_high=0.85)


@dataclass(frozen=True)
class LabeledScore:
    score: float
    label: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score must be in [0, 1], got {self.score}")
        if self.label not in SIMILARITY_LABELS:
            raise ValidationError(
                f"label must be one of {SIMILARITY_LABELS}, got {self.label!r}"
            )


@dataclass(frozen=True)
class CutoffFit:
    cutoffs: CalibrationCutoffs
    accuracy: float  # training fraction correct under the returned cutoffs


def classify(score: float, cutoffs: CalibrationCutoffs) -> str:
    """Similarity level of a score; segments are left-closed, right-open."""
    if not 0.0 <= score <= 1.0:
        raise ValidationError(f"score must be in [0, 1], got {score}")
    if score < cutoffs.beta_low:
        return "none"
    if score < cutoffs.beta_mid:
        return "low"
    if score < cutoffs.beta_high:
        return "mid"
    return "high"


def accuracy(preds, labels) -> tuple[float, float]:
    """(micro, macro) accuracy; macro averages recall over classes in labels."""
    preds = list(preds)
    labels = list(labels)
    if len(preds) != len(labels):
        raise ValidationError(f"{len(preds)} predictions for {len(labels)} labels")
    if not labels:
        raise ValidationError("need at least one labeled example")
    micro = sum(p == t for p, t in zip(preds, labels)) / len(labels)
    recalls = []
    for cls in SIMILARITY_LABELS:
        hits = sum(1 for p, t in zip(preds, labels) if t == cls and p == cls)
        total = sum(1 for t in labels if t == cls)
        if total:
            recalls.append(hits / total)
    macro = sum(recalls) / len(recalls)
    return micro, macro


def threshold_gaps(scores) -> list[tuple[float, float, int]]:
    """Open intervals between consecutive distinct score values.

    Returns (lo, hi, position) per gap, position being the number of scores
    below any threshold placed inside the gap. Gaps outside (0, 1) are
    dropped: a cutoff must stay strictly inside the unit interval.
    """
    distinct, counts = np.unique(np.asarray(scores, dtype=np.float64), return_counts=True)
    cumulative = np.concatenate(([0], np.cumsum(counts)))
    bounds = [0.0] + [float(v) for v in distinct] + [1.0]
    gaps = []
    for t in range(len(bounds) - 1):
        lo, hi = bounds[t], bounds[t + 1]
        if lo < hi:
            gaps.append((lo, hi, int(cumulative[t])))
    return gaps


def materialize_cuts(gaps, picks) -> tuple[float, float, float]:
    """Distinct threshold values for gap indices (ascending, repeats allowed).

    A gap holding one cut gets its midpoint (the documented candidate), a
    shared gap is subdivided evenly so ordering stays strict.
    """
    values = []
    for gap_index in sorted(set(picks)):
        lo, hi, _ = gaps[gap_index]
        share = picks.count(gap_index)
        values.extend(lo + (hi - lo) * (j + 1) / (share + 1) for j in range(share))
    return tuple(values)


def fit_cutoffs_detailed(data, round_to: float | None = None) -> CutoffFit:
    """Exact accuracy-maximizing cutoffs plus the achieved training accuracy.

    The objective only depends on which gap between distinct sorted scores
    each cutoff occupies, so the exact optimum is a scan with running maxima
    over gap positions (all three cuts may share a gap, leaving middle
    segments empty). Among equally optimal placements the smallest beta_low
    gap wins, then beta_mid, then beta_high.
    """
    data = list(data)
    if not data:
        raise ValidationError("need at least one labeled score")
    scores = np.array([d.score for d in data], dtype=np.float64)
    if not np.any((scores > 0.0) & (scores < 1.0)):
        raise ValidationError("need at least one score strictly between 0 and 1")
    sorted_scores = np.sort(scores)
    order = np.argsort(scores, kind="stable")
    sorted_labels = [data[int(i)].label for i in order]

    gaps = threshold_gaps(sorted_scores)
    positions = np.array([g[2] for g in gaps], dtype=np.int64)

    # prefix[c][p] = count of label c among the p smallest scores
    n = len(data)
    prefix = {}
    for cls in SIMILARITY_LABELS:
        flags = np.fromiter((lab == cls for lab in sorted_labels), dtype=np.int64, count=n)
        prefix[cls] = np.concatenate(([0], np.cumsum(flags)))

    # correct = none[<a] + low[a..b) + mid[b..c) + high[>=c]
    #         = (none-low)[a] + (low-mid)[b] + (mid-high)[c] + total(high)
    pn, pl = prefix["none"][positions], prefix["low"][positions]
    pm, ph = prefix["mid"][positions], prefix["high"][positions]
    gain_a = pn - pl
    gain_b = pl - pm
    gain_c = pm - ph
    high_total = int(prefix["high"][n])

    m = len(gaps)
    best_c = np.empty(m, dtype=np.int64)  # max gain_c over gaps >= i
    best_c[m - 1] = gain_c[m - 1]
    for i in range(m - 2, -1, -1):
        best_c[i] = max(gain_c[i], best_c[i + 1])
    best_bc = np.empty(m, dtype=np.int64)  # max over b >= i of gain_b[b] + best_c[b]
    best_bc[m - 1] = gain_b[m - 1] + best_c[m - 1]
    for i in range(m - 2, -1, -1):
        best_bc[i] = max(gain_b[i] + best_c[i], best_bc[i + 1])

    best = max(int(gain_a[a]) + int(best_bc[a]) for a in range(m))
    a_star = next(a for a in range(m) if gain_a[a] + best_bc[a] == best)
    rest = best - int(gain_a[a_star])
    b_star = next(b for b in range(a_star, m) if gain_b[b] + best_c[b] == rest)
    c_star = next(c for c in range(b_star, m) if gain_c[c] == rest - int(gain_b[b_star]))

    beta_low, beta_mid, beta_high = materialize_cuts(gaps, [a_star, b_star, c_star])
    cutoffs = CalibrationCutoffs(beta_low=beta_low, beta_mid=beta_mid, beta_high=beta_high)
    if round_to is not None:
        cutoffs = _round_cutoffs(cutoffs, round_to)
    preds = [classify(d.score, cutoffs) for d in data]
    train_accuracy, _ = accuracy(preds, [d.label for d in data])
    if round_to is None:
        assert train_accuracy == (best + high_total) / n
    return CutoffFit(cutoffs=cutoffs, accuracy=train_accuracy)


def fit_cutoffs(data, round_to: float | None = None) -> CalibrationCutoffs:
    return fit_cutoffs_detailed(data, round_to=round_to).cutoffs


def _round_cutoffs(cutoffs: CalibrationCutoffs, round_to: float) -> CalibrationCutoffs:
    if not 0.0 < round_to < 1.0:
        raise ValidationError(f"round_to must be in (0, 1), got {round_to}")
    rounded = [
        float(f"{round(beta / round_to) * round_to:.12g}")
        for beta in (cutoffs.beta_low, cutoffs.beta_mid, cutoffs.beta_high)
    ]
    if not 0.0 < rounded[0] < rounded[1] < rounded[2] < 1.0:
        raise CalibrationError(
            f"rounding to {round_to} collapses cutoff ordering: {rounded}"
        )
    return CalibrationCutoffs(*rounded)


@dataclass(frozen=True)
class FoldResult:
    fold: int
    n_test: int
    micro: float
    macro: float


@dataclass(frozen=True)
class CrossValidationResult:
    folds: tuple[FoldResult, ...]
    mean_micro: float
    mean_macro: float


def cross_validate(data, folds: int, seed: int) -> CrossValidationResult:
    """Deterministic shuffled k-fold evaluation of the cutoff fitter."""
    data = list(data)
    if folds < 2:
        raise ValidationError(f"folds must be >= 2, got {folds}")
    if len(data) < folds:
        raise ValidationError(f"{len(data)} records cannot fill {folds} folds")
    if seed < 0:
        raise ValidationError(f"seed must be >= 0, got {seed}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
    assignment = np.array_split(rng.permutation(len(data)), folds)
    results = []
    for fold_index, held_out in enumerate(assignment):
        held = set(int(i) for i in held_out)
        train = [d for i, d in enumerate(data) if i not in held]
        test = [data[i] for i in sorted(held)]
        cutoffs = fit_cutoffs(train)
        preds = [classify(d.score, cutoffs) for d in test]
        micro, macro = accuracy(preds, [d.label for d in test])
        results.append(
            FoldResult(fold=fold_index, n_test=len(test), micro=micro, macro=macro)
        )
    mean_micro = sum(r.micro for r in results) / folds
    mean_macro = sum(r.macro for r in results) / folds
    return CrossValidationResult(
        folds=tuple(results), mean_micro=mean_micro, mean_macro=mean_macro
    )


def save_cutoffs(cutoffs: CalibrationCutoffs, path) -> None:
    doc = {
        "version": CUTOFFS_ARTIFACT_VERSION,
        "beta_low": cutoffs.beta_low,
        "beta_mid": cutoffs.beta_mid,
        "beta_high": cutoffs.beta_high,
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_cutoffs(path) -> CalibrationCutoffs:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad cutoffs artifact JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: cutoffs artifact must be a JSON object")
    if doc.get("version") != CUTOFFS_ARTIFACT_VERSION:
        raise FormatError(
            f"{path}: unsupported artifact version {doc.get('version')!r}"
        )
    try:
        return CalibrationCutoffs(
            beta_low=float(doc["beta_low"]),
            beta_mid=float(doc["beta_mid"]),
            beta_high=float(doc["beta_high"]),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: cutoffs artifact missing {exc}") from exc


def read_labeled_scores(path) -> list[LabeledScore]:
    """JSON-lines loader for precomputed (score, label) records."""
    path = Path(path)
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append(LabeledScore(score=float(obj["score"]), label=obj["label"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return out
