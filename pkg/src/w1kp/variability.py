"""U-statistic variability estimators over normalized distance matrices.

Two kernels: the pairwise mean (expected normalized distance over all
unordered pairs) and the k-expected maximum (expected minimum pairwise
normalized distance over size-k subsets, i.e. how close the closest pair in
a random k-sample is). Scores report eta (a dissimilarity in [0, 1]) and its
inversion w1kp = 1 - eta.

Sums use math.fsum, which is exactly rounded and therefore independent of
enumeration order; exact estimates are bitwise reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import DistanceMatrix, EmbeddingSet
from .errors import CapacityError, ValidationError

DEFAULT_EXACT_BUDGET = 200_000
DEFAULT_MC_SAMPLES = 10_000

# Monte-Carlo draws are partitioned into fixed-size chunks, each driven by a
# PCG64 generator seeded from (seed, chunk_index); totals are merged in chunk
# order, so results do not depend on how many workers process the chunks.
MC_CHUNK = 16_384


@dataclass(frozen=True)
class VariabilityScore:
    eta: float
    kernel: str  # "mean" | "k_max"
    k: int | None = None
    estimator: str = "exact"  # "exact" | "monte_carlo"
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"eta must be in [0, 1], got {self.eta}")
        if self.kernel not in ("mean", "k_max"):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if self.estimator not in ("exact", "monte_carlo"):
            raise ValidationError(f"unknown estimator {self.estimator!r}")

    @property
    def w1kp(self) -> float:
        """Inverted score: higher means a more self-similar set."""
        return 1.0 - self.eta

    def to_json_dict(self) -> dict:
        doc = {
            "eta": self.eta,
            "w1kp": self.w1kp,
            "kernel": self.kernel,
            "estimator": self.estimator,
        }
        if self.k is not None:
            doc["k"] = self.k
        if self.estimator == "monte_carlo":
            doc["samples"] = self.samples
            doc["seed"] = self.seed
        return doc


def _require_normalized(matrix: DistanceMatrix) -> None:
    if matrix.kind != "normalized":
        raise ValidationError(f"expected a normalized matrix, got {matrix.kind!r}")
    if matrix.size < 2:
        raise ValidationError(f"need n >= 2 images, got {matrix.size}")


def eta_mean(matrix: DistanceMatrix) -> VariabilityScore:
    """Mean normalized distance over all unordered pairs."""
    _require_normalized(matrix)
    eta = math.fsum(matrix.values) / matrix.values.size
    return VariabilityScore(eta=eta, kernel="mean", estimator="exact")


def _check_k(matrix: DistanceMatrix, k: int) -> None:
    if not 2 <= k <= matrix.size:
        raise ValidationError(f"k must be in [2, {matrix.size}], got {k}")


def _subset_minima(dense: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Minimum pairwise entry within each row of subset indices."""
    k = subsets.shape[1]
    out = None
    for p, q in itertools.combinations(range(k), 2):
        vals = dense[subsets[:, p], subsets[:, q]]
        out = vals if out is None else np.minimum(out, vals)
    return out


def eta_k_exact(
    matrix: DistanceMatrix, k: int, budget: int = DEFAULT_EXACT_BUDGET
) -> VariabilityScore:
    """Average closest-pair distance over every size-k subset."""
    _require_normalized(matrix)
    _check_k(matrix, k)
    n = matrix.size
    count = math.comb(n, k)
    if count > budget:
        raise CapacityError(
            f"C({n}, {k}) = {count} subsets exceeds the exact budget of "
            f"{budget}; use eta_k_monte_carlo"
        )
    dense = matrix.dense()
    subsets = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.intp,
        count=count * k,
    ).reshape(count, k)
    minima = _subset_minima(dense, subsets)
    eta = math.fsum(minima) / count
    return VariabilityScore(eta=eta, kernel="k_max", k=k, estimator="exact")


def _sample_subsets(rng: np.random.Generator, count: int, n: int, k: int) -> np.ndarray:
    """Partial Fisher-Yates selection of `count` size-k index subsets."""
    pool = np.tile(np.arange(n, dtype=np.intp), (count, 1))
    rows = np.arange(count)
    for i in range(k):
        j = rng.integers(i, n, size=count)
        picked = pool[rows, j]
        pool[rows, j] = pool[:, i]
        pool[:, i] = picked
    return pool[:, :k]


def eta_k_monte_carlo(
    matrix: DistanceMatrix, k: int, samples: int, seed: int, workers: int = 1
) -> VariabilityScore:
    """Monte-Carlo estimate of the k-expected-maximum kernel.

    Draws `samples` uniform size-k subsets (partial Fisher-Yates over a PCG64
    stream) and averages the closest-pair distance. Deterministic for a fixed
    seed; k = n falls back to the single exact subset.
    """
    _require_normalized(matrix)
    _check_k(matrix, k)
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    if seed < 0:
        raise ValidationError(f"seed must be >= 0, got {seed}")
    n = matrix.size
    if k == n:
        # only one subset exists; sampling adds nothing
        eta = float(matrix.values.min())
        return VariabilityScore(eta=eta, kernel="k_max", k=k, estimator="exact")
    dense = matrix.dense()

    starts = range(0, samples, MC_CHUNK)
    chunk_sizes = [min(MC_CHUNK, samples - s) for s in starts]

    def run_chunk(args):
        index, size = args
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
        subsets = _sample_subsets(rng, size, n, k)
        return math.fsum(_subset_minima(dense, subsets))

    jobs = list(enumerate(chunk_sizes))
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunk_sums = list(pool.map(run_chunk, jobs))
    else:
        chunk_sums = [run_chunk(job) for job in jobs]
    eta = math.fsum(chunk_sums) / samples
    return VariabilityScore(
        eta=eta, kernel="k_max", k=k, estimator="monte_carlo",
        samples=samples, seed=seed,
    )


def total_variance_identity_check(embeddings: EmbeddingSet) -> tuple[float, float]:
    """(mean pairwise squared-Euclidean distance, trace of biased covariance).

    The two are tied by mean_pairwise_sq = (2n / (n - 1)) * trace_cov.
    """
    n = embeddings.n
    if n < 2:
        raise ValidationError(f"need n >= 2 rows, got {n}")
    vectors = np.asarray(embeddings.vectors, dtype=np.float64)
    pair_sums = []
    for i in range(n - 1):
        diff = vectors[i + 1 :] - vectors[i]
        pair_sums.append(math.fsum((diff * diff).sum(axis=1)))
    mean_pairwise_sq = math.fsum(pair_sums) / (n * (n - 1) // 2)
    centered = vectors - vectors.mean(axis=0)
    trace_cov = float((centered * centered).sum() / n)
    return mean_pairwise_sq, trace_cov
