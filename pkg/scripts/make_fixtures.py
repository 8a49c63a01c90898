#!/usr/bin/env python3
"""Regenerate the checked-in synthetic test fixtures under tests/fixtures/.

Everything is seeded; rerunning must reproduce identical files.
"""

import json
from pathlib import Path

import numpy as np

from w1kp import EmbeddingSet, write_embeddings

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def cluster_embeddings():
    """20 images in 4 well-separated clusters of 5, 6 dims."""
    rng = np.random.default_rng(20240601)
    centers = np.array(
        [
            [0, 0, 0, 0, 0, 0],
            [8, 0, 0, 0, 0, 0],
            [0, 8, 0, 0, 0, 0],
            [0, 0, 8, 8, 0, 0],
        ],
        dtype=np.float64,
    )
    rows, ids = [], []
    for c, center in enumerate(centers):
        for i in range(5):
            rows.append(center + rng.normal(scale=0.35, size=6))
            ids.append(f"c{c}_{i}")
    return EmbeddingSet(
        ids=tuple(ids),
        vectors=np.array(rows, dtype=np.float32),
        provenance="synthetic-clusters",
    )


def triplets(ids):
    """Ten triplets whose majority votes side with the obvious geometry."""
    rows = [
        # ref, a, b, votes_a (out of 5): same-cluster a should win votes
        ("c0_0", "c0_1", "c1_0", 5),
        ("c0_0", "c0_2", "c2_0", 4),
        ("c1_0", "c1_1", "c3_0", 5),
        ("c1_2", "c1_3", "c0_4", 4),
        ("c2_0", "c2_1", "c3_1", 5),
        ("c2_2", "c2_3", "c0_0", 5),
        ("c3_0", "c3_1", "c1_4", 4),
        ("c3_2", "c3_3", "c2_4", 5),
        ("c0_3", "c1_0", "c0_4", 1),  # cross-cluster a, workers prefer b
        ("c1_0", "c2_0", "c1_4", 0),
    ]
    assert all(r[0] in ids and r[1] in ids and r[2] in ids for r in rows)
    return [
        {"ref": r, "a": a, "b": b, "votes_a": v, "votes_total": 5}
        for r, a, b, v in rows
    ]


def graded(ids):
    """Graded pairs: same cluster high, adjacent mid/low, opposite none."""
    rows = [
        ("p00", "c0_0", "c0_1", "high"),
        ("p01", "c0_2", "c0_3", "high"),
        ("p02", "c1_0", "c1_1", "high"),
        ("p03", "c2_0", "c2_1", "high"),
        ("p04", "c3_0", "c3_1", "high"),
        ("p05", "c0_0", "c1_0", "low"),
        ("p06", "c0_1", "c2_0", "low"),
        ("p07", "c1_0", "c2_0", "low"),
        ("p08", "c0_0", "c3_0", "none"),
        ("p09", "c1_0", "c3_1", "none"),
        ("p10", "c2_2", "c3_2", "none"),
        ("p11", "c0_4", "c3_4", "none"),
    ]
    assert all(a in ids and b in ids for _, a, b, _lab in rows)
    return [
        {"pair_id": p, "a": a, "b": b, "label": lab} for p, a, b, lab in rows
    ]


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    emb = cluster_embeddings()
    write_embeddings(emb, FIXTURES / "clusters_20x6.w1kpemb")

    with open(FIXTURES / "triplets.jsonl", "w") as fh:
        for row in triplets(set(emb.ids)):
            fh.write(json.dumps(row) + "\n")

    with open(FIXTURES / "graded.jsonl", "w") as fh:
        for row in graded(set(emb.ids)):
            fh.write(json.dumps(row) + "\n")

    # separable labeled scores for direct calibration runs
    rng = np.random.default_rng(7)
    bands = {"none": (0.02, 0.17), "low": (0.23, 0.37), "mid": (0.45, 0.8), "high": (0.88, 0.99)}
    with open(FIXTURES / "scores.jsonl", "w") as fh:
        for label, (lo, hi) in bands.items():
            for _ in range(25):
                score = float(rng.uniform(lo, hi))
                fh.write(json.dumps({"score": score, "label": label}) + "\n")

    # small monotone-ish table for the correlate command
    rng = np.random.default_rng(3)
    xs = np.sort(rng.uniform(0, 10, size=15))
    ys = xs**2 + rng.normal(scale=0.01, size=15)
    with open(FIXTURES / "xy.csv", "w") as fh:
        fh.write("length,variability\n")
        for x, y in zip(xs, ys):
            fh.write(f"{float(x)!r},{float(y)!r}\n")

    print(f"wrote fixtures to {FIXTURES}")


if __name__ == "__main__":
    main()
