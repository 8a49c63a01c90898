"""Shared fixtures and oracle helpers."""

import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import settings

from w1kp import DistanceMatrix, EmbeddingSet

settings.register_profile("ci", deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def random_embeddings(n, dim, seed, provenance="synthetic"):
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((n, dim)).astype(np.float32)
    ids = tuple(f"img{i:04d}" for i in range(n))
    return EmbeddingSet(ids=ids, vectors=vectors, provenance=provenance)


def random_normalized_matrix(n, seed):
    """Condensed uniform values in (0, 1); U-statistics need no metricity."""
    rng = np.random.default_rng(seed)
    values = rng.uniform(0.0, 1.0, size=n * (n - 1) // 2)
    return DistanceMatrix(size=n, values=values, kind="normalized")


def eta_k_enumeration_oracle(matrix, k):
    """Independent full-enumeration oracle for the k-expected-maximum kernel."""
    dense = matrix.dense()
    kernel_values = []
    for subset in itertools.combinations(range(matrix.size), k):
        best = min(
            dense[i][j] for i, j in itertools.combinations(subset, 2)
        )
        kernel_values.append(best)
    return math.fsum(kernel_values) / len(kernel_values)


@pytest.fixture
def tiny_set():
    return random_embeddings(6, 4, seed=101)
