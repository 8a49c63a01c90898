"""Acceptance gate: one test per release criterion, each printing a verdict
line (run with -s to see them). Everything runs on synthetic data generated
in-process or on the checked-in fixtures; no image pipeline is involved.
"""

import json
import math
import time

import numpy as np
import pytest

from w1kp import (
    LabeledScore,
    MetricKind,
    classical_mds,
    eta_k_exact,
    eta_k_monte_carlo,
    eta_mean,
    fit_cdf,
    fit_cutoffs_detailed,
    ks_critical_value,
    ks_statistic_uniform,
    oracle_bounds,
    reusability_curve,
    spearman,
    split_prompt,
    total_variance_identity_check,
    twoafc_score,
    write_embeddings,
)
from w1kp.calibration import threshold_gaps
from w1kp.cli import main as cli_main
from w1kp.distance import euclidean
from w1kp.evaluation import majority_accuracy, make_outcomes
from w1kp.normalization import apply_cdf_many
from w1kp.core import TripletJudgment

from conftest import (
    eta_k_enumeration_oracle,
    random_embeddings,
    random_normalized_matrix,
)


def report(name, ok=True):
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}")
    assert ok


def test_probability_integral_transform():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    fit_sample = rng.lognormal(mean=0.5, sigma=0.7, size=5000)
    fresh = rng.lognormal(mean=0.5, sigma=0.7, size=5000)
    cdf = fit_cdf(fit_sample, MetricKind.EUCLIDEAN)
    transformed = apply_cdf_many(cdf, fresh)
    stat = ks_statistic_uniform(transformed)
    critical = ks_critical_value(5000, alpha=0.01)
    elapsed = time.perf_counter() - start
    assert stat < critical, f"KS {stat} >= critical {critical}"
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    report("probability integral transform uniformity (KS at alpha=0.01, <1s)")


def test_pairwise_distance_covariance_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    for trial in range(100):
        n = int(rng.integers(2, 51))
        dim = int(rng.integers(1, 513))
        s = random_embeddings(n, dim, seed=3000 + trial)
        mean_sq, _ = total_variance_identity_check(s)
        vectors = np.asarray(s.vectors, dtype=np.float64)
        trace_oracle = 0.0
        for d in range(dim):
            col = vectors[:, d]
            mu = math.fsum(col) / n
            trace_oracle += math.fsum((x - mu) ** 2 for x in col) / n
        expected = (2.0 * n / (n - 1.0)) * trace_oracle
        assert mean_sq == pytest.approx(expected, rel=1e-9), (n, dim)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.3f}s"
    report("mean pairwise squared distance = (2n/(n-1)) * covariance trace (<5s)")


def test_u_statistic_oracles():
    start = time.perf_counter()
    for i in range(50):
        n = 2 + (i % 9)  # n cycles 2..10
        m = random_normalized_matrix(n, seed=5000 + i)
        mean_eta = eta_mean(m).eta
        for k in range(2, n + 1):
            exact = eta_k_exact(m, k).eta
            assert exact == eta_k_enumeration_oracle(m, k), (n, k)
            mc = eta_k_monte_carlo(m, k, samples=100_000, seed=9000 + i * 17 + k)
            assert abs(mc.eta - exact) < 0.01, (n, k, mc.eta, exact)
        assert eta_k_exact(m, 2).eta == mean_eta
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.3f}s"
    report(
        "k-subset estimator: exact bitwise vs enumeration, Monte Carlo within "
        "0.01, k=2 equals pairwise mean (<30s)"
    )


def test_curve_monotonicity():
    for i in range(50):
        n = 3 + (i % 8)  # n cycles 3..10
        m = random_normalized_matrix(n, seed=6000 + i)
        curve = reusability_curve(m, k_max=n)
        assert all(p.estimator == "exact" for p in curve.points)
        scores = curve.scores
        assert all(b >= a for a, b in zip(scores, scores[1:])), (n, scores)
    report("reusability curve non-decreasing in k for exact estimates")


def _band_scores(n, seed):
    rng = np.random.default_rng(seed)
    centers = {"none": 0.12, "low": 0.32, "mid": 0.58, "high": 0.86}
    out = []
    labels = list(centers)
    for _ in range(n):
        label = labels[int(rng.integers(0, 4))]
        score = float(np.clip(rng.normal(centers[label], 0.13), 0.0, 1.0))
        out.append(LabeledScore(score=score, label=label))
    return out


def _brute_force_best_accuracy(data):
    """O(N^3) enumeration over all threshold-triple placements.

    Per-gap class counts come from direct comparisons; every gap triple
    (repeats allowed: shared gaps hold multiple ordered cuts) is then scored.
    """
    gaps = threshold_gaps([d.score for d in data])
    below = {cls: [] for cls in ("none", "low", "mid", "high")}
    for lo, hi, _pos in gaps:
        threshold = (lo + hi) / 2.0
        for cls in below:
            below[cls].append(
                sum(1 for d in data if d.label == cls and d.score < threshold)
            )
    total_high = sum(1 for d in data if d.label == "high")
    none_b, low_b = below["none"], below["low"]
    mid_b, high_b = below["mid"], below["high"]
    best = -1
    m = len(gaps)
    for a in range(m):
        part_a = none_b[a] - low_b[a]
        for b in range(a, m):
            part_b = part_a + low_b[b] - mid_b[b]
            for c in range(b, m):
                correct = part_b + mid_b[c] - high_b[c] + total_high
                if correct > best:
                    best = correct
    return best / len(data)


def test_calibration_optimality():
    start = time.perf_counter()
    data = _band_scores(200, seed=31)
    fit = fit_cutoffs_detailed(data)
    oracle_accuracy = _brute_force_best_accuracy(data)
    assert fit.accuracy == oracle_accuracy

    separable = [
        LabeledScore(0.05, "none"),
        LabeledScore(0.12, "none"),
        LabeledScore(0.3, "low"),
        LabeledScore(0.33, "low"),
        LabeledScore(0.55, "mid"),
        LabeledScore(0.6, "mid"),
        LabeledScore(0.9, "high"),
        LabeledScore(0.97, "high"),
    ]
    assert fit_cutoffs_detailed(separable).accuracy == 1.0
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.3f}s"
    report("cutoff fitting matches O(N^3) oracle accuracy; separable fit is exact (<10s)")


def test_twoafc_harness():
    votes = [5, 4, 3, 2, 1, 0, 5, 1, 4, 3]
    prefs = [True, True, True, False, False, False, True, False, False, True]
    triplets = [
        TripletJudgment(ref="r", a="a", b="b", votes_a=v, votes_total=5) for v in votes
    ]
    outcomes = make_outcomes(triplets, prefs)
    # hand computation: agree fraction = y/5 when preferring a, else 1 - y/5
    hand = [1.0, 0.8, 0.6, 1 - 0.4, 1 - 0.2, 1.0, 1.0, 1 - 0.2, 1 - 0.8, 0.6]
    assert twoafc_score(triplets, outcomes) == math.fsum(hand) / 10
    # majority tally by hand: metric matches the vote majority on all but #9
    hand_majority = [1, 1, 1, 1, 1, 1, 1, 1, 0, 1]
    assert majority_accuracy(triplets, outcomes) == sum(hand_majority) / 10

    single = [TripletJudgment(ref="r", a="a", b="b", votes_a=3, votes_total=5)]
    assert oracle_bounds(single) == (pytest.approx(0.6), 1.0)

    flipped = make_outcomes(triplets, [not p for p in prefs])
    assert twoafc_score(triplets, flipped) == pytest.approx(
        1.0 - twoafc_score(triplets, outcomes)
    )
    report("2AFC harness: hand-computed fixture, oracle bound, flip identity")


def test_mds_recovery():
    rng = np.random.default_rng(88)
    points = rng.uniform(-5.0, 5.0, size=(30, 2))
    values = []
    for i in range(30):
        for j in range(i + 1, 30):
            values.append(euclidean(points[i], points[j]))
    from w1kp import DistanceMatrix

    matrix = DistanceMatrix(size=30, values=np.array(values), kind="raw")
    coords = classical_mds(matrix, dims=2)
    for i in range(30):
        for j in range(i + 1, 30):
            original = euclidean(points[i], points[j])
            recovered = euclidean(coords[i], coords[j])
            assert recovered == pytest.approx(original, rel=1e-9), (i, j)
    report("classical MDS recovers planar distances within 1e-9 relative")


REFERENCE_PROMPT_SPLITS = [
    (
        "ashtray in the messy desk of the detective, smoke and dark, digital art",
        "ashtray in the messy desk of the detective",
        ["smoke and dark", "digital art"],
    ),
    (
        "onion very sad crying big tears cartoon, 3d render",
        "onion very sad crying big tears cartoon",
        ["3d render"],
    ),
    (
        "the lost city of Atlantis, 4K, hyper detailed",
        "the lost city of Atlantis",
        ["4K", "hyper detailed"],
    ),
    ("a galleon ship by Darek Zabrocki", "a galleon ship by Darek Zabrocki", []),
    (
        "hill overlooking a viking city, fantasy, forested, large trees, "
        "top down perspective",
        "hill overlooking a viking city",
        ["fantasy", "forested", "large trees", "top down perspective"],
    ),
    (
        "photo of an awesome sunny day environment concept art on a cliff, "
        "architecture by daniel libeskind with village, residential area, "
        "mixed development, highrise made up staircases",
        "photo of an awesome sunny day environment concept art on a cliff, "
        "architecture by daniel libeskind with village",
        ["residential area", "mixed development", "highrise made up staircases"],
    ),
    (
        "giant oversized  battle hedgehog with army pilot uniform and hedgehog "
        "babies ,in deep forest hungle , full body , Cinematic focus, "
        "Polaroid photo, vintage , neutral dull colors, soft lights",
        "giant oversized  battle hedgehog with army pilot uniform and hedgehog "
        "babies, in deep forest hungle",
        [
            "full body",
            "Cinematic focus",
            "Polaroid photo",
            "vintage",
            "neutral dull colors",
            "soft lights",
        ],
    ),
    (
        "pizza the hut, akira, gorillaz, poster, high quality",
        "pizza the hut",
        ["akira", "gorillaz", "poster", "high quality"],
    ),
    ("tengu spotted in atlanta", "tengu spotted in atlanta", []),
    (
        "underground cinema, realistic architecture, colorfull lights, "
        "octane render, 4k, 8k",
        "underground cinema",
        ["realistic architecture", "colorfull lights", "octane render", "4k", "8k"],
    ),
]


def test_prompt_splitter_reference_cases():
    for text, expected_main, expected_keywords in REFERENCE_PROMPT_SPLITS:
        split = split_prompt(text)
        assert split.main == expected_main, text
        assert list(split.keywords) == expected_keywords, text
    report("prompt splitter reproduces all ten reference classifications")


def test_spearman_reference_behavior():
    xs = [0.5, 1.0, 2.0, 3.5, 7.0]
    assert spearman(xs, [math.exp(x) for x in xs]) == 1.0
    assert spearman(xs, [-x for x in xs]) == -1.0

    x = [1.0, 2.0, 2.0, 2.0, 3.0, 4.0, 4.0, 5.0, 6.0, 6.0]
    y = [1.0, 1.0, 2.0, 3.0, 3.0, 4.0, 5.0, 6.0, 7.0, 7.0]
    # manual average ranks
    rank_x = [1.0, 3.0, 3.0, 3.0, 5.0, 6.5, 6.5, 8.0, 9.5, 9.5]
    rank_y = [1.5, 1.5, 3.0, 4.5, 4.5, 6.0, 7.0, 8.0, 9.5, 9.5]
    mx = sum(rank_x) / 10
    my = sum(rank_y) / 10
    cov = sum((a - mx) * (b - my) for a, b in zip(rank_x, rank_y))
    sx = math.sqrt(sum((a - mx) ** 2 for a in rank_x))
    sy = math.sqrt(sum((b - my) ** 2 for b in rank_y))
    assert spearman(x, y) == pytest.approx(cov / (sx * sy), rel=1e-12)
    report("rank correlation: monotone 1.0, reversed -1.0, ties match manual ranks")


def test_seeded_commands_are_byte_identical(tmp_path):
    emb_path = tmp_path / "set.w1kpemb"
    write_embeddings(random_embeddings(24, 6, seed=55), emb_path)
    scores_path = tmp_path / "scores.jsonl"
    with open(scores_path, "w") as fh:
        for d in _band_scores(80, seed=14):
            fh.write(json.dumps({"score": d.score, "label": d.label}) + "\n")

    def run_twice(name, *argv):
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}.{tag}"
            code = cli_main([str(x) for x in argv] + ["--out", str(out)])
            assert code == 0, name
            outs.append(out.read_bytes())
        assert outs[0] == outs[1], f"{name} output differs between runs"

    run_twice("cdf", "fit-cdf", emb_path, "--pair-count", 150, "--seed", 9)
    cdf_path = tmp_path / "cdf.json"
    assert cli_main(
        ["fit-cdf", str(emb_path), "--pair-count", "150", "--seed", "9", "--out", str(cdf_path)]
    ) == 0
    run_twice(
        "score", "score", emb_path, "--cdf", cdf_path, "--kernel", "kmax",
        "--k", 12, "--budget", 100, "--mc-samples", 3000, "--seed", 21,
    )
    run_twice(
        "curve", "reusability", "--embeddings", emb_path, "--cdf", cdf_path,
        "--k-max", 24, "--budget", 2000, "--mc-samples", 1000, "--seed", 3,
    )
    run_twice("cut", "calibrate", "--scores", scores_path, "--folds", 5, "--seed", 17)
    run_twice("mds", "mds", "--embeddings", emb_path, "--dims", 2)
    report("seeded commands rerun to byte-identical output files")
