"""Empirical-CDF normalization mapping raw distances onto [0, 1].

A fitted transform is just the ascending-sorted raw-distance sample; queries
count sample entries <= x (right-closed) by binary search and divide by the
sample size. Queries beyond the sample maximum saturate at exactly 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DistanceMatrix
from .distance import MetricKind
from .errors import FormatError, ValidationError

CDF_ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class FittedCdf:
    """Sorted raw-distance sample defining the empirical transform."""

    sample: np.ndarray  # ascending float64, read-only
    metric: MetricKind
    provenance: str = ""

    def __post_init__(self):
        sample = np.asarray(self.sample, dtype=np.float64)
        if sample.ndim != 1 or sample.size < 1:
            raise ValidationError("sample must be a non-empty 1-D array")
        if not np.all(np.isfinite(sample)):
            raise ValidationError("sample contains a non-finite value")
        if float(sample[0]) < 0.0:
            raise ValidationError("sample contains a negative distance")
        if np.any(np.diff(sample) < 0):
            raise ValidationError("sample must be sorted ascending")
        sample = sample.copy()
        sample.setflags(write=False)
        object.__setattr__(self, "sample", sample)

    @property
    def m(self) -> int:
        return int(self.sample.size)


def fit_cdf(distances, metric: MetricKind, provenance: str = "") -> FittedCdf:
    """Sort a raw-distance sample into a FittedCdf; input order is irrelevant."""
    sample = np.asarray(distances, dtype=np.float64)
    if sample.ndim != 1 or sample.size == 0:
        raise ValidationError("need a non-empty 1-D list of distances")
    if not np.all(np.isfinite(sample)):
        raise ValidationError("distances contain a non-finite value")
    if float(sample.min()) < 0.0:
        raise ValidationError("distances contain a negative value")
    return FittedCdf(sample=np.sort(sample), metric=metric, provenance=provenance)


def apply_cdf(cdf: FittedCdf, x: float) -> float:
    """Fraction of the fitted sample <= x."""
    if not math.isfinite(x):
        raise ValidationError(f"query must be finite, got {x}")
    if x < 0.0:
        raise ValidationError(f"query must be >= 0, got {x}")
    count = int(np.searchsorted(cdf.sample, x, side="right"))
    return count / cdf.m


def apply_cdf_many(cdf: FittedCdf, xs) -> np.ndarray:
    """Vectorized apply_cdf; bitwise identical to the scalar loop."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size and (not np.all(np.isfinite(xs)) or float(xs.min()) < 0.0):
        raise ValidationError("queries must be finite and >= 0")
    counts = np.searchsorted(cdf.sample, xs, side="right")
    return counts / cdf.m


def normalize_matrix(raw: DistanceMatrix, cdf: FittedCdf) -> DistanceMatrix:
    if raw.kind != "raw":
        raise ValidationError(f"expected a raw matrix, got kind={raw.kind!r}")
    return DistanceMatrix(
        size=raw.size, values=apply_cdf_many(cdf, raw.values), kind="normalized"
    )


def save_cdf(cdf: FittedCdf, path) -> None:
    """JSON artifact; floats keep full 64-bit precision via shortest repr."""
    doc = {
        "version": CDF_ARTIFACT_VERSION,
        "metric": cdf.metric.value,
        "provenance": cdf.provenance,
        "sample": [float(v) for v in cdf.sample],
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_cdf(path) -> FittedCdf:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad CDF artifact JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: CDF artifact must be a JSON object")
    version = doc.get("version")
    if version != CDF_ARTIFACT_VERSION:
        raise FormatError(
            f"{path}: unsupported artifact version {version!r}, "
            f"expected {CDF_ARTIFACT_VERSION}"
        )
    for key in ("metric", "sample"):
        if key not in doc:
            raise FormatError(f"{path}: CDF artifact missing {key!r}")
    metric = MetricKind.parse(doc["metric"])
    return FittedCdf(
        sample=np.asarray(doc["sample"], dtype=np.float64),
        metric=metric,
        provenance=str(doc.get("provenance", "")),
    )


def ks_statistic_uniform(values) -> float:
    """One-sample Kolmogorov-Smirnov statistic against U[0, 1]."""
    u = np.sort(np.asarray(values, dtype=np.float64))
    n = u.size
    if n == 0:
        raise ValidationError("KS statistic needs at least one value")
    if float(u[0]) < 0.0 or float(u[-1]) > 1.0:
        raise ValidationError("values must lie in [0, 1]")
    hi = np.arange(1, n + 1, dtype=np.float64) / n
    lo = np.arange(0, n, dtype=np.float64) / n
    d_plus = float(np.max(hi - u))
    d_minus = float(np.max(u - lo))
    return max(d_plus, d_minus)


# asymptotic Kolmogorov critical constants c(alpha): D_crit = c / sqrt(n)
_KS_CRITICAL_C = {0.10: 1.22385, 0.05: 1.35810, 0.01: 1.62762}


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic critical value of the one-sample KS statistic."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    try:
        c = _KS_CRITICAL_C[alpha]
    except KeyError:
        supported = sorted(_KS_CRITICAL_C)
        raise ValidationError(f"alpha must be one of {supported}") from None
    return c / math.sqrt(n)
