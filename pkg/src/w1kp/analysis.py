"""Reusability curves, classical MDS, Spearman correlation, prompt splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DistanceMatrix
from .errors import UndefinedCorrelationError, ValidationError
from .variability import (
    DEFAULT_EXACT_BUDGET,
    DEFAULT_MC_SAMPLES,
    VariabilityScore,
    eta_k_exact,
    eta_k_monte_carlo,
)

# eigenvector sign fixing treats anything this small as zero
_SIGN_TOL = 1e-12


@dataclass(frozen=True)
class CurvePoint:
    k: int
    eta_tilde: float
    estimator: str  # "exact" | "monte_carlo"
    samples: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class ReusabilityCurve:
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        ks = [p.k for p in self.points]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValidationError("curve k values must be strictly ascending")

    @property
    def k_values(self) -> list[int]:
        return [p.k for p in self.points]

    @property
    def scores(self) -> list[float]:
        return [p.eta_tilde for p in self.points]


def reusability_curve(
    matrix: DistanceMatrix,
    k_max: int,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int | None = None,
    budget: int = DEFAULT_EXACT_BUDGET,
    workers: int = 1,
) -> ReusabilityCurve:
    """w1kp score of the k-expected-maximum kernel for every k in [2, k_max].

    Exact enumeration where the subset count fits the budget, Monte Carlo
    beyond it (which then requires a seed).
    """
    if not 2 <= k_max <= matrix.size:
        raise ValidationError(f"k_max must be in [2, {matrix.size}], got {k_max}")
    points = []
    for k in range(2, k_max + 1):
        if math.comb(matrix.size, k) <= budget:
            score = eta_k_exact(matrix, k, budget=budget)
        else:
            if seed is None:
                raise ValidationError(
                    f"C({matrix.size}, {k}) exceeds the exact budget; Monte Carlo "
                    "needs an explicit seed"
                )
            score = eta_k_monte_carlo(
                matrix, k, samples=mc_samples, seed=seed, workers=workers
            )
        points.append(_curve_point(score))
    return ReusabilityCurve(points=tuple(points))


def _curve_point(score: VariabilityScore) -> CurvePoint:
    return CurvePoint(
        k=score.k,
        eta_tilde=score.w1kp,
        estimator=score.estimator,
        samples=score.samples,
        seed=score.seed,
    )


def reuse_limit(curve: ReusabilityCurve, beta_high: float) -> int | None:
    """Smallest k whose score reaches beta_high, i.e. where fresh draws start
    duplicating existing images; None if the curve never crosses."""
    for point in curve.points:
        if point.eta_tilde >= beta_high:
            return point.k
    return None


def curve_to_csv(curve: ReusabilityCurve) -> str:
    lines = ["k,eta_tilde,estimator,samples,seed"]
    for p in curve.points:
        samples = "" if p.samples is None else str(p.samples)
        seed = "" if p.seed is None else str(p.seed)
        lines.append(f"{p.k},{p.eta_tilde!r},{p.estimator},{samples},{seed}")
    return "\n".join(lines) + "\n"


def classical_mds(matrix: DistanceMatrix, dims: int) -> np.ndarray:
    """Coordinates from Torgerson double centering of squared distances.

    Negative eigenvalues are clamped to zero; each eigenvector's first
    nonzero coordinate is made positive so output is reproducible; the
    configuration is centered at the origin.
    """
    if dims < 1:
        raise ValidationError(f"dims must be >= 1, got {dims}")
    n = matrix.size
    if n < dims + 1:
        raise ValidationError(f"need n >= dims + 1 points, got n={n}, dims={dims}")
    d2 = matrix.dense() ** 2
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * centering @ d2 @ centering
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1][:dims]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    for col in range(dims):
        v = evecs[:, col]
        nonzero = np.flatnonzero(np.abs(v) > _SIGN_TOL)
        if nonzero.size and v[nonzero[0]] < 0:
            evecs[:, col] = -v
    coords = evecs * np.sqrt(evals)
    return coords - coords.mean(axis=0)


def mds_to_csv(ids, coords: np.ndarray) -> str:
    ids = list(ids)
    if len(ids) != coords.shape[0]:
        raise ValidationError(f"{len(ids)} ids for {coords.shape[0]} coordinate rows")
    dims = coords.shape[1]
    lines = ["id," + ",".join(f"x{i}" for i in range(dims))]
    for image_id, row in zip(ids, coords):
        lines.append(image_id + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Rank correlation: Pearson correlation of tie-averaged ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ValidationError("inputs must be 1-D and equal length")
    if x.size < 3:
        raise ValidationError(f"need at least 3 observations, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("inputs must be finite")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    var_x = float((rx * rx).sum())
    var_y = float((ry * ry).sum())
    if var_x == 0.0 or var_y == 0.0:
        raise UndefinedCorrelationError(
            "correlation undefined: an input has zero rank variance"
        )
    return float((rx * ry).sum() / math.sqrt(var_x * var_y))


@dataclass(frozen=True)
class PromptSplit:
    main: str
    keywords: tuple[str, ...]


def split_prompt(text: str) -> PromptSplit:
    """Split a prompt into its main part and trailing keyword qualifiers.

    Comma tokens after the first that have fewer than four words mark the
    start of the keyword tail; the marker token itself is a keyword. Longer
    tokens before the marker stay in the main part.
    """
    tokens = [t.strip() for t in text.split(",")]
    main_tokens = [tokens[0]]
    keywords: list[str] = []
    for token in tokens[1:]:
        if keywords or len(token.split()) < 4:
            keywords.append(token)
        else:
            main_tokens.append(token)
    return PromptSplit(main=", ".join(main_tokens), keywords=tuple(keywords))
