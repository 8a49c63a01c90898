"""Raw perceptual-distance functions over embedding vectors.

All arithmetic runs in float64 regardless of input dtype. Per-pair
accumulation order is fixed, so the pairwise matrix is bitwise identical
to a serial pair-by-pair loop no matter how the pairs are scheduled.
"""

from __future__ import annotations

import enum

import numpy as np

from .core import DistanceMatrix, EmbeddingSet
from .errors import ValidationError

# dot/norm rounding can push cosine marginally outside [0, 2]
_COSINE_CLAMP_TOL = 1e-12


class MetricKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "squared_euclidean"
    COSINE = "cosine"

    @classmethod
    def parse(cls, name: str) -> "MetricKind":
        for member in cls:
            if member.value == name:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ValidationError(f"unknown metric {name!r}, expected one of: {valid}")


def _as_f64_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValidationError("vectors must be 1-D")
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError("non-finite vector value")
    return a, b


def squared_euclidean(a, b) -> float:
    a, b = _as_f64_pair(a, b)
    d = a - b
    return float((d * d).sum())


def euclidean(a, b) -> float:
    return float(np.sqrt(squared_euclidean(a, b)))


def cosine_distance(a, b) -> float:
    """1 - cos(a, b), clamped to [0, 2] against rounding."""
    a, b = _as_f64_pair(a, b)
    norm_a = float(np.sqrt((a * a).sum()))
    norm_b = float(np.sqrt((b * b).sum()))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValidationError("cosine distance undefined for zero-norm vector")
    value = 1.0 - float((a * b).sum()) / (norm_a * norm_b)
    if value < 0.0:
        if value < -_COSINE_CLAMP_TOL:
            raise ValidationError(f"cosine distance {value} below 0 beyond tolerance")
        return 0.0
    if value > 2.0:
        if value > 2.0 + _COSINE_CLAMP_TOL:
            raise ValidationError(f"cosine distance {value} above 2 beyond tolerance")
        return 2.0
    return value


def metric_function(metric: MetricKind):
    return {
        MetricKind.EUCLIDEAN: euclidean,
        MetricKind.SQUARED_EUCLIDEAN: squared_euclidean,
        MetricKind.COSINE: cosine_distance,
    }[metric]


def pairwise_matrix(embeddings: EmbeddingSet, metric: MetricKind) -> DistanceMatrix:
    """All-pairs raw distances in condensed upper-triangular order."""
    n = embeddings.n
    if n < 2:
        raise ValidationError(f"pairwise matrix needs n >= 2, got {n}")
    vectors = np.asarray(embeddings.vectors, dtype=np.float64)
    blocks = [_row_block(vectors, i, metric) for i in range(n - 1)]
    values = np.concatenate(blocks) if blocks else np.empty(0)
    return DistanceMatrix(size=n, values=values, kind="raw")


def _row_block(vectors: np.ndarray, i: int, metric: MetricKind) -> np.ndarray:
    """Distances from row i to all rows j > i.

    The blocked reduction over the last axis is bitwise identical to calling
    the scalar metric per pair, which keeps the matrix reproducible under any
    pair-level parallel schedule.
    """
    rest = vectors[i + 1 :]
    if metric is MetricKind.COSINE:
        return np.array(
            [cosine_distance(vectors[i], rest[j]) for j in range(rest.shape[0])]
        )
    diff = rest - vectors[i]
    sq = (diff * diff).sum(axis=1)
    if metric is MetricKind.SQUARED_EUCLIDEAN:
        return sq
    return np.sqrt(sq)


def pair_distances(
    vectors: np.ndarray, pairs: np.ndarray, metric: MetricKind
) -> np.ndarray:
    """Raw distances for explicit (i, j) index pairs, float64, pairwise-exact."""
    vectors = np.asarray(vectors, dtype=np.float64)
    pairs = np.asarray(pairs, dtype=np.intp)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValidationError("pairs must be an (m, 2) index array")
    if metric is MetricKind.COSINE:
        return np.array(
            [cosine_distance(vectors[i], vectors[j]) for i, j in pairs]
        )
    diff = vectors[pairs[:, 0]] - vectors[pairs[:, 1]]
    sq = (diff * diff).sum(axis=1)
    if metric is MetricKind.SQUARED_EUCLIDEAN:
        return sq
    return np.sqrt(sq)
