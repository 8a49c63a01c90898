"""Embedding extraction from image directories.

Output is the W1KPEMB1 wire format consumed by the scoring kit: magic
``W1KPEMB1``, little-endian u32 n and l, n*l little-endian float32 row-major,
then a u32-length-prefixed UTF-8 JSON trailer ``{"ids": [...],
"provenance": "..."}``. Rows are written in filename-sorted order no matter
how extraction is scheduled, and ids are the plain filenames.

The only built-in backbone is ``pixel_flatten`` (resize, grayscale, scale to
[0, 1], flatten), which needs no model weights and is bit-deterministic.
Neural backbones are optional plugins registered at runtime via
``register_backbone``; whether a plugin L2-normalizes its output is recorded
in the provenance string.
"""

from __future__ import annotations

import json
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

MAGIC = b"W1KPEMB1"
PAIR_MANIFEST_VERSION = 1

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff", ".webp"}

BUILTIN_BACKBONES = ("pixel_flatten", "dreamsim_like", "clip_like")


class ExtractorError(Exception):
    pass


@dataclass(frozen=True)
class BackboneSpec:
    """How to embed one image.

    ``pixel_flatten`` always works offline; ``dreamsim_like``/``clip_like``
    need an embedder registered via register_backbone first.
    """

    name: str = "pixel_flatten"
    resize: int = 64
    normalization: str = "unit_scale"  # pixel recipe recorded in provenance
    l2_normalize: bool = False

    def __post_init__(self):
        if self.name not in BUILTIN_BACKBONES and self.name not in _REGISTRY:
            known = ", ".join(sorted(set(BUILTIN_BACKBONES) | set(_REGISTRY)))
            raise ExtractorError(f"unknown backbone {self.name!r}, expected one of: {known}")
        if self.resize < 1:
            raise ExtractorError(f"resize must be >= 1, got {self.resize}")

    def provenance(self) -> str:
        return (
            f"backbone={self.name} resize={self.resize} "
            f"normalization={self.normalization} l2_normalized={str(self.l2_normalize).lower()}"
        )


# name -> callable(Image, BackboneSpec) -> 1-D float32 array
_REGISTRY: dict = {}


def register_backbone(name: str, embed_fn) -> None:
    """Plug in a neural embedder; pixel_flatten cannot be overridden."""
    if name == "pixel_flatten":
        raise ExtractorError("pixel_flatten is built in and cannot be replaced")
    _REGISTRY[name] = embed_fn


def _pixel_flatten(image: Image.Image, spec: BackboneSpec) -> np.ndarray:
    resized = image.resize((spec.resize, spec.resize), Image.Resampling.BILINEAR)
    gray = resized.convert("L")
    return (np.asarray(gray, dtype=np.float32) / np.float32(255.0)).reshape(-1)


def _embed_fn(spec: BackboneSpec):
    if spec.name == "pixel_flatten":
        return _pixel_flatten
    try:
        return _REGISTRY[spec.name]
    except KeyError:
        raise ExtractorError(
            f"backbone {spec.name!r} is an optional plugin; register an embedder "
            "with register_backbone() before extracting"
        ) from None


def list_images(image_dir) -> list[Path]:
    """Decodable-looking files in filename-sorted order (non-recursive)."""
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise ExtractorError(f"{image_dir} is not a directory")
    files = [
        p
        for p in image_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    return sorted(files, key=lambda p: p.name)


@dataclass
class ExtractResult:
    out_path: Path
    n: int
    dim: int
    skipped: list = field(default_factory=list)


def _embed_one(path: Path, spec: BackboneSpec, embed_fn) -> np.ndarray:
    try:
        with Image.open(path) as image:
            vector = np.asarray(embed_fn(image, spec), dtype=np.float32).reshape(-1)
    except (UnidentifiedImageError, OSError) as exc:
        raise ExtractorError(f"{path.name}: cannot decode image ({exc})") from exc
    if vector.ndim != 1 or vector.size < 1:
        raise ExtractorError(f"{path.name}: backbone returned an empty vector")
    if not np.all(np.isfinite(vector)):
        raise ExtractorError(f"{path.name}: backbone returned a non-finite value")
    if spec.l2_normalize:
        norm = float(np.sqrt((vector.astype(np.float64) ** 2).sum()))
        if norm == 0.0:
            raise ExtractorError(f"{path.name}: zero-norm vector cannot be L2-normalized")
        vector = (vector.astype(np.float64) / norm).astype(np.float32)
    return vector


def extract(
    image_dir,
    backbone: BackboneSpec,
    out,
    lenient: bool = False,
    workers: int = 4,
) -> ExtractResult:
    """Embed every image in the directory into one W1KPEMB1 file.

    Undecodable files abort the run unless ``lenient``, which skips them.
    Rows land in filename-sorted order regardless of worker scheduling.
    """
    files = list_images(image_dir)
    if not files:
        raise ExtractorError(f"no image files found in {image_dir}")
    embed_fn = _embed_fn(backbone)

    def job(path: Path):
        try:
            return path.name, _embed_one(path, backbone, embed_fn), None
        except ExtractorError as exc:
            return path.name, None, exc

    if workers > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, files))
    else:
        results = [job(p) for p in files]

    ids, rows, skipped = [], [], []
    for name, vector, error in results:  # results preserve filename order
        if error is not None:
            if not lenient:
                raise error
            skipped.append(name)
            continue
        ids.append(name)
        rows.append(vector)
    if not rows:
        raise ExtractorError(f"no image in {image_dir} could be embedded")
    dims = {r.size for r in rows}
    if len(dims) != 1:
        raise ExtractorError(f"backbone emitted mixed dimensions {sorted(dims)}")
    matrix = np.vstack(rows).astype(np.float32)

    out = Path(out)
    _write_w1kpemb(out, ids, matrix, backbone.provenance())
    return ExtractResult(out_path=out, n=matrix.shape[0], dim=matrix.shape[1], skipped=skipped)


def _write_w1kpemb(path: Path, ids, matrix: np.ndarray, provenance: str) -> None:
    n, dim = matrix.shape
    trailer = json.dumps(
        {"ids": list(ids), "provenance": provenance}, ensure_ascii=False
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", n, dim))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
        fh.write(struct.pack("<I", len(trailer)))
        fh.write(trailer)


def sample_pairs_manifest(image_dir, count: int, seed: int) -> dict:
    """Deterministic manifest of distinct image-id pairs for CDF fitting.

    count == C(n, 2) enumerates every pair exactly once, in filename order.
    """
    files = list_images(image_dir)
    n = len(files)
    if n < 2:
        raise ExtractorError(f"need at least 2 images, found {n}")
    total = math.comb(n, 2)
    if count < 1 or count > total:
        raise ExtractorError(f"count must be in [1, {total}] for {n} images, got {count}")
    if seed < 0:
        raise ExtractorError(f"seed must be >= 0, got {seed}")
    names = [p.name for p in files]
    all_pairs = [
        [names[i], names[j]] for i in range(n) for j in range(i + 1, n)
    ]
    if count == total:
        pairs = all_pairs
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
        chosen = rng.choice(total, size=count, replace=False)
        chosen.sort()
        pairs = [all_pairs[int(i)] for i in chosen]
    return {"version": PAIR_MANIFEST_VERSION, "pairs": pairs}
