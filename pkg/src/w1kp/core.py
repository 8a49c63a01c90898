"""Domain types and bit-exact file I/O for embeddings and judgment datasets.

On-disk formats
---------------
W1KPEMB1 binary: magic ``W1KPEMB1`` (8 ASCII bytes), little-endian u32 n,
little-endian u32 l, then n*l little-endian IEEE-754 float32 row-major,
then a little-endian u32 byte length m followed by m bytes of UTF-8 JSON
``{"ids": [...], "provenance": "..."}`` with exactly n ids.

CSV alternative: header ``id,v0,...,v{l-1}``, one row per image. Values are
written with shortest round-trip repr so float32 bits survive the text trip.

Graded judgments: JSON lines ``{"pair_id","a","b","label"}`` with label in
none/low/mid/high. Triplets: JSON lines ``{"ref","a","b","votes_a","votes_total"}``.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"W1KPEMB1"

SIMILARITY_LABELS = ("none", "low", "mid", "high")


@dataclass(frozen=True)
class EmbeddingSet:
    """Ordered collection of fixed-dimension float32 feature vectors."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, l) float32, read-only
    provenance: str = ""

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValidationError(f"vectors must be 2-D, got shape {vectors.shape}")
        n, dim = vectors.shape
        if n < 1 or dim < 1:
            raise ValidationError(f"need n >= 1 and dim >= 1, got {n}x{dim}")
        if len(self.ids) != n:
            raise ValidationError(f"{len(self.ids)} ids for {n} vectors")
        if len(set(self.ids)) != n:
            seen, dup = set(), None
            for i in self.ids:
                if i in seen:
                    dup = i
                    break
                seen.add(i)
            raise ValidationError(f"duplicate id {dup!r}")
        if not np.all(np.isfinite(vectors)):
            bad = int(np.flatnonzero(~np.isfinite(vectors))[0])
            raise ValidationError(
                f"non-finite value at row {bad // dim}, column {bad % dim}"
            )
        vectors = vectors.copy()
        vectors.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def index_of(self, image_id: str) -> int:
        try:
            return self.ids.index(image_id)
        except ValueError:
            raise ValidationError(f"unknown image id {image_id!r}") from None


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative pairwise distances in upper-triangular storage.

    ``values[condensed_index(i, j, size)]`` holds the (i, j) entry for i < j;
    the diagonal is implicitly zero.
    """

    size: int
    values: np.ndarray  # (size*(size-1)/2,) float64, read-only
    kind: str  # "raw" | "normalized"

    def __post_init__(self):
        if self.kind not in ("raw", "normalized"):
            raise ValidationError(f"kind must be raw or normalized, got {self.kind!r}")
        if self.size < 1:
            raise ValidationError(f"size must be >= 1, got {self.size}")
        values = np.asarray(self.values, dtype=np.float64)
        expected = self.size * (self.size - 1) // 2
        if values.shape != (expected,):
            raise ValidationError(
                f"expected {expected} condensed values for size {self.size}, "
                f"got shape {values.shape}"
            )
        if expected and not np.all(np.isfinite(values)):
            raise ValidationError("non-finite distance value")
        if expected and values.size and float(values.min(initial=0.0)) < 0.0:
            raise ValidationError("negative distance value")
        if self.kind == "normalized" and expected and values.size:
            if float(values.max(initial=0.0)) > 1.0:
                raise ValidationError("normalized distance above 1")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def lookup(self, i: int, j: int) -> float:
        if not (0 <= i < self.size and 0 <= j < self.size):
            raise ValidationError(f"index ({i}, {j}) out of range for size {self.size}")
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        return float(self.values[condensed_index(i, j, self.size)])

    def dense(self) -> np.ndarray:
        """Full symmetric (size, size) float64 matrix with zero diagonal."""
        out = np.zeros((self.size, self.size), dtype=np.float64)
        iu = np.triu_indices(self.size, k=1)
        out[iu] = self.values
        out[(iu[1], iu[0])] = self.values
        return out


def condensed_index(i: int, j: int, size: int) -> int:
    """Position of entry (i, j), i < j, in row-major upper-triangular storage."""
    return i * size - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class GradedJudgment:
    """One human-graded similarity label for an image pair."""

    pair_id: str
    a: str
    b: str
    label: str
    line: int = 0

    def __post_init__(self):
        if self.label not in SIMILARITY_LABELS:
            raise ValidationError(
                f"label must be one of {SIMILARITY_LABELS}, got {self.label!r}"
            )
        if self.a == self.b:
            raise ValidationError(f"pair {self.pair_id!r} compares an image to itself")


@dataclass(frozen=True)
class TripletJudgment:
    """Worker votes for which of two images better matches a reference."""

    ref: str
    a: str
    b: str
    votes_a: int
    votes_total: int
    line: int = 0

    def __post_init__(self):
        if self.votes_total < 1:
            raise ValidationError(f"votes_total must be >= 1, got {self.votes_total}")
        if not 0 <= self.votes_a <= self.votes_total:
            raise ValidationError(
                f"votes_a {self.votes_a} outside [0, {self.votes_total}]"
            )


@dataclass(frozen=True)
class JudgmentRecords:
    """Validated judgment dataset read from disk."""

    kind: str  # "graded" | "triplet"
    records: tuple = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.records)


def write_embeddings(embeddings: EmbeddingSet, path) -> None:
    """Write an EmbeddingSet; ``.csv`` suffix selects CSV, anything else binary."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        _write_csv(embeddings, path)
    else:
        _write_binary(embeddings, path)


def read_embeddings(path) -> EmbeddingSet:
    """Read a W1KPEMB1 or CSV embedding file, auto-detected by content."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return _read_binary(path)
    return _read_csv(path)


def _write_binary(embeddings: EmbeddingSet, path: Path) -> None:
    trailer = json.dumps(
        {"ids": list(embeddings.ids), "provenance": embeddings.provenance},
        ensure_ascii=False,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", embeddings.n, embeddings.dim))
        fh.write(np.ascontiguousarray(embeddings.vectors, dtype="<f4").tobytes())
        fh.write(struct.pack("<I", len(trailer)))
        fh.write(trailer)


def _read_binary(path: Path) -> EmbeddingSet:
    data = path.read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: bad magic at byte 0, expected {MAGIC!r}")
    offset = len(MAGIC)
    if len(data) < offset + 8:
        raise FormatError(f"{path}: truncated header at byte {len(data)}")
    n, dim = struct.unpack_from("<II", data, offset)
    offset += 8
    if n < 1 or dim < 1:
        raise FormatError(f"{path}: header declares {n}x{dim} matrix")
    nbytes = n * dim * 4
    if len(data) < offset + nbytes:
        raise FormatError(f"{path}: truncated matrix at byte {len(data)}")
    vectors = np.frombuffer(data, dtype="<f4", count=n * dim, offset=offset)
    vectors = vectors.reshape(n, dim)
    offset += nbytes
    if len(data) < offset + 4:
        raise FormatError(f"{path}: truncated trailer length at byte {len(data)}")
    (tlen,) = struct.unpack_from("<I", data, offset)
    offset += 4
    if len(data) < offset + tlen:
        raise FormatError(f"{path}: truncated trailer at byte {len(data)}")
    try:
        trailer = json.loads(data[offset : offset + tlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad trailer JSON at byte {offset}: {exc}") from exc
    if not isinstance(trailer, dict) or "ids" not in trailer:
        raise FormatError(f"{path}: trailer JSON missing 'ids'")
    ids = trailer["ids"]
    if not isinstance(ids, list) or len(ids) != n:
        raise FormatError(f"{path}: trailer has {len(ids)} ids for n={n}")
    provenance = trailer.get("provenance", "")
    return EmbeddingSet(
        ids=tuple(str(i) for i in ids), vectors=vectors, provenance=str(provenance)
    )


def _write_csv(embeddings: EmbeddingSet, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"v{i}" for i in range(embeddings.dim)])
        # float32 -> float64 is exact, and repr(float) round-trips, so the
        # text survives the trip back to the identical float32 bits
        for image_id, row in zip(embeddings.ids, embeddings.vectors):
            writer.writerow([image_id] + [repr(float(v)) for v in row])


def _read_csv(path: Path) -> EmbeddingSet:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(
            f"{path}: neither W1KPEMB1 magic nor UTF-8 CSV ({exc})"
        ) from exc
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError(f"{path}: empty file") from None
    except csv.Error as exc:
        raise FormatError(f"{path}: line 1: not parseable as CSV ({exc})") from exc
    if not header or header[0] != "id":
        raise FormatError(f"{path}: line 1: CSV header must start with 'id'")
    dim = len(header) - 1
    if dim < 1 or header[1:] != [f"v{i}" for i in range(dim)]:
        raise FormatError(f"{path}: line 1: header columns must be id,v0,...,v{{l-1}}")
    ids, rows = [], []
    lineno = 1
    try:
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise FormatError(f"{path}: line {lineno}: expected {dim + 1} fields")
            ids.append(row[0])
            try:
                rows.append([np.float32(v) for v in row[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: bad float ({exc})") from exc
    except csv.Error as exc:
        raise FormatError(f"{path}: line {lineno}: not parseable as CSV ({exc})") from exc
    if not ids:
        raise FormatError(f"{path}: no data rows")
    return EmbeddingSet(
        ids=tuple(ids), vectors=np.array(rows, dtype=np.float32), provenance=""
    )


def read_judgments(path, kind: str) -> JudgmentRecords:
    """Read newline-delimited JSON judgments of the given kind."""
    if kind not in ("graded", "triplet"):
        raise ValidationError(f"kind must be graded or triplet, got {kind!r}")
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: bad JSON ({exc})") from exc
            try:
                records.append(_parse_record(obj, kind, lineno))
            except (ValidationError, KeyError, TypeError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return JudgmentRecords(kind=kind, records=tuple(records))


def _parse_record(obj: dict, kind: str, lineno: int):
    if kind == "graded":
        return GradedJudgment(
            pair_id=str(obj["pair_id"]),
            a=str(obj["a"]),
            b=str(obj["b"]),
            label=obj["label"],
            line=lineno,
        )
    return TripletJudgment(
        ref=str(obj["ref"]),
        a=str(obj["a"]),
        b=str(obj["b"]),
        votes_a=int(obj["votes_a"]),
        votes_total=int(obj["votes_total"]),
        line=lineno,
    )
