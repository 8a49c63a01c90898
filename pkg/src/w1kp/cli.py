"""Command-line entry point tying the pipeline together.

Exit codes: 0 success, 1 I/O, 2 validation, 3 capacity. Randomized commands
require an explicit --seed; reruns with identical inputs and flags produce
byte-identical output files. W1KP_WORKERS overrides the worker count used by
Monte-Carlo estimation.

Settings resolve as flags > --config JSON file > built-in defaults. The
config file holds flag names with underscores, e.g.
{"metric": "cosine", "pair_count": 5000, "folds": 10}.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, calibration, evaluation, normalization, variability
from .core import read_embeddings, read_judgments
from .distance import MetricKind, pair_distances, pairwise_matrix
from .errors import CapacityError, ValidationError, W1kpError

PAIR_MANIFEST_VERSION = 1


def _workers() -> int:
    raw = os.environ.get("W1KP_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"W1KP_WORKERS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValidationError(f"W1KP_WORKERS must be >= 1, got {value}")
    return value


def _seed(value: int | None, *, required: bool) -> int | None:
    if value is None:
        if required:
            raise ValidationError("this command is randomized; pass an explicit --seed")
        return None
    if value < 0:
        raise ValidationError(f"seed must be >= 0, got {value}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_json(doc: dict, out: str | None) -> None:
    _emit(json.dumps(doc) + "\n", out)


def _load_cdf_for(metric_flag: str | None, cdf_path: str) -> normalization.FittedCdf:
    cdf = normalization.load_cdf(cdf_path)
    if metric_flag is not None and MetricKind.parse(metric_flag) is not cdf.metric:
        raise ValidationError(
            f"requested metric {metric_flag!r} but CDF artifact was fitted with "
            f"{cdf.metric.value!r}"
        )
    return cdf


def _sample_distinct_pairs(n: int, count: int, seed: int) -> np.ndarray:
    """Deterministic sample of `count` distinct unordered index pairs."""
    total = math.comb(n, 2)
    if count < 1:
        raise ValidationError(f"pair count must be >= 1, got {count}")
    if count > total:
        raise CapacityError(
            f"requested {count} pairs but only {total} distinct pairs exist for n={n}"
        )
    offsets = np.arange(n - 1, dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum((n - 1) - offsets)))  # row start index
    if count == total:
        flat = np.arange(total, dtype=np.int64)
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
        if total <= 4_000_000:
            flat = rng.choice(total, size=count, replace=False).astype(np.int64)
        else:
            chosen: set[int] = set()
            while len(chosen) < count:
                draw = int(rng.integers(0, total))
                if draw not in chosen:
                    chosen.add(draw)
            flat = np.fromiter(chosen, dtype=np.int64, count=count)
            flat.sort()
    rows = np.searchsorted(offsets, flat, side="right") - 1
    cols = flat - offsets[rows] + rows + 1
    return np.stack([rows, cols], axis=1)


def _read_pair_manifest(path: str, embeddings) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: bad pair manifest JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("version") != PAIR_MANIFEST_VERSION:
        raise ValidationError(f"{path}: expected pair manifest version 1")
    pairs = doc.get("pairs")
    if not isinstance(pairs, list) or not pairs:
        raise ValidationError(f"{path}: manifest has no pairs")
    index = []
    for entry in pairs:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ValidationError(f"{path}: each pair must be a two-element list")
        a, b = embeddings.index_of(str(entry[0])), embeddings.index_of(str(entry[1]))
        if a == b:
            raise ValidationError(f"{path}: pair compares {entry[0]!r} to itself")
        index.append((a, b))
    return np.asarray(index, dtype=np.intp)


def cmd_fit_cdf(args) -> None:
    embeddings = read_embeddings(args.embeddings)
    metric = MetricKind.parse(args.metric)
    if args.pairs is not None:
        pairs = _read_pair_manifest(args.pairs, embeddings)
    else:
        seed = _seed(args.seed, required=True)
        if embeddings.n < 2:
            raise CapacityError("need at least 2 images to sample pairs")
        pairs = _sample_distinct_pairs(embeddings.n, args.pair_count, seed)
    distances = pair_distances(embeddings.vectors, pairs, metric)
    cdf = normalization.fit_cdf(distances, metric, provenance=embeddings.provenance)
    normalization.save_cdf(cdf, args.out)


def _normalized_matrix(embeddings, cdf):
    raw = pairwise_matrix(embeddings, cdf.metric)
    return normalization.normalize_matrix(raw, cdf)


def cmd_score(args) -> None:
    embeddings = read_embeddings(args.embeddings)
    cdf = _load_cdf_for(args.metric, args.cdf)
    matrix = _normalized_matrix(embeddings, cdf)
    if args.kernel == "mean":
        score = variability.eta_mean(matrix)
    else:
        if args.k is None:
            raise ValidationError("--kernel kmax requires --k")
        if not 2 <= args.k <= matrix.size:
            raise ValidationError(
                f"k must be in [2, {matrix.size}], got {args.k}"
            )
        if math.comb(matrix.size, args.k) <= args.budget:
            score = variability.eta_k_exact(matrix, args.k, budget=args.budget)
        else:
            seed = _seed(args.seed, required=True)
            score = variability.eta_k_monte_carlo(
                matrix, args.k, samples=args.mc_samples, seed=seed,
                workers=_workers(),
            )
    doc = score.to_json_dict()
    if args.cutoffs is not None:
        cutoffs = calibration.load_cutoffs(args.cutoffs)
        doc["level"] = calibration.classify(score.w1kp, cutoffs)
    _emit_json(doc, args.out)


def _labeled_scores(args) -> list[calibration.LabeledScore]:
    if args.scores is not None:
        return calibration.read_labeled_scores(args.scores)
    if args.embeddings is None or args.cdf is None or args.judgments is None:
        raise ValidationError(
            "calibrate needs either --scores or all of --embeddings/--cdf/--judgments"
        )
    embeddings = read_embeddings(args.embeddings)
    cdf = _load_cdf_for(args.metric, args.cdf)
    judged = read_judgments(args.judgments, kind="graded")
    pairs = np.asarray(
        [
            (embeddings.index_of(r.a), embeddings.index_of(r.b))
            for r in judged.records
        ],
        dtype=np.intp,
    )
    raw = pair_distances(embeddings.vectors, pairs, cdf.metric)
    normalized = normalization.apply_cdf_many(cdf, raw)
    return [
        calibration.LabeledScore(score=1.0 - float(d), label=r.label)
        for d, r in zip(normalized, judged.records)
    ]


def cmd_calibrate(args) -> None:
    data = _labeled_scores(args)
    seed = _seed(args.seed, required=True)
    fit = calibration.fit_cutoffs_detailed(data, round_to=args.round_to)
    cv = calibration.cross_validate(data, folds=args.folds, seed=seed)
    calibration.save_cutoffs(fit.cutoffs, args.out)
    report = {
        "beta_low": fit.cutoffs.beta_low,
        "beta_mid": fit.cutoffs.beta_mid,
        "beta_high": fit.cutoffs.beta_high,
        "training_accuracy": fit.accuracy,
        "cross_validation": {
            "folds": [
                {"fold": f.fold, "n_test": f.n_test, "micro": f.micro, "macro": f.macro}
                for f in cv.folds
            ],
            "mean_micro": cv.mean_micro,
            "mean_macro": cv.mean_macro,
        },
        "n_records": len(data),
    }
    sys.stdout.write(json.dumps(report) + "\n")


def cmd_eval_2afc(args) -> None:
    embeddings = read_embeddings(args.embeddings)
    cdf = _load_cdf_for(args.metric, args.cdf)
    judged = read_judgments(args.triplets, kind="triplet")
    outcomes = evaluation.evaluate_triplets(
        embeddings, judged.records, cdf.metric, cdf
    )
    doc = evaluation.summarize(judged.records, outcomes, tie_policy=args.tie_policy)
    _emit_json(doc, args.out)


def cmd_reusability(args) -> None:
    embeddings = read_embeddings(args.embeddings)
    cdf = _load_cdf_for(args.metric, args.cdf)
    matrix = _normalized_matrix(embeddings, cdf)
    seed = _seed(args.seed, required=False)
    curve = analysis.reusability_curve(
        matrix,
        k_max=args.k_max,
        mc_samples=args.mc_samples,
        seed=seed,
        budget=args.budget,
        workers=_workers(),
    )
    _emit(analysis.curve_to_csv(curve), args.out)


def cmd_mds(args) -> None:
    embeddings = read_embeddings(args.embeddings)
    metric = MetricKind.parse(args.metric)
    matrix = pairwise_matrix(embeddings, metric)
    coords = analysis.classical_mds(matrix, dims=args.dims)
    _emit(analysis.mds_to_csv(embeddings.ids, coords), args.out)


def cmd_split_prompt(args) -> None:
    split = analysis.split_prompt(args.text)
    _emit_json({"main": split.main, "keywords": list(split.keywords)}, args.out)


def cmd_correlate(args) -> None:
    with open(args.table, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{args.table}: empty file") from None
        rows = [row for row in reader if row]
    if len(header) < 2:
        raise ValidationError(f"{args.table}: need at least two columns")
    x_col = args.x if args.x is not None else header[0]
    y_col = args.y if args.y is not None else header[1]
    for name in (x_col, y_col):
        if name not in header:
            raise ValidationError(f"{args.table}: no column named {name!r}")
    xi, yi = header.index(x_col), header.index(y_col)
    try:
        x = [float(row[xi]) for row in rows]
        y = [float(row[yi]) for row in rows]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{args.table}: bad numeric row ({exc})") from exc
    rho = analysis.spearman(x, y)
    _emit_json({"spearman": rho, "n": len(x), "x": x_col, "y": y_col}, args.out)


# optional flags a --config file may default, with a validator each
_CONFIG_SCHEMA = {
    "metric": lambda v: MetricKind.parse(str(v)).value,
    "kernel": lambda v: _one_of(v, ("mean", "kmax")),
    "tie_policy": lambda v: _one_of(v, evaluation.TIE_POLICIES),
    "pair_count": int,
    "k": int,
    "k_max": int,
    "mc_samples": int,
    "budget": int,
    "seed": int,
    "folds": int,
    "dims": int,
    "round_to": float,
    "cutoffs": str,
    "x": str,
    "y": str,
}


def _one_of(value, allowed):
    if value not in allowed:
        raise ValidationError(f"must be one of {list(allowed)}, got {value!r}")
    return value


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: bad config JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    config = {}
    for key, value in doc.items():
        validator = _CONFIG_SCHEMA.get(key)
        if validator is None:
            raise ValidationError(
                f"{path}: unknown config key {key!r} (known: {sorted(_CONFIG_SCHEMA)})"
            )
        try:
            config[key] = validator(value)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: bad value for {key!r}: {exc}") from exc
    return config


def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    config = config or {}

    def cfg(key, builtin):
        return config.get(key, builtin)

    parser = argparse.ArgumentParser(
        prog="w1kp",
        description="Perceptual-variability scoring for image embedding sets.",
    )
    parser.add_argument(
        "--config", default=None, help="JSON file of flag defaults (flags still win)"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    metrics = [m.value for m in MetricKind]

    p = sub.add_parser("fit-cdf", help="fit a normalization CDF from raw distances")
    p.add_argument("embeddings")
    p.add_argument("--metric", default=cfg("metric", "euclidean"), choices=metrics)
    p.add_argument("--pair-count", type=int, default=cfg("pair_count", 10000))
    p.add_argument("--seed", type=int, default=cfg("seed", None))
    p.add_argument("--pairs", default=None, help="JSON pair manifest instead of sampling")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_cdf)

    p = sub.add_parser("score", help="variability score for an embedding set")
    p.add_argument("embeddings")
    p.add_argument("--cdf", required=True)
    p.add_argument("--metric", default=cfg("metric", None), choices=metrics)
    p.add_argument("--kernel", default=cfg("kernel", "mean"), choices=["mean", "kmax"])
    p.add_argument("--k", type=int, default=cfg("k", None))
    p.add_argument(
        "--mc-samples", type=int,
        default=cfg("mc_samples", variability.DEFAULT_MC_SAMPLES),
    )
    p.add_argument(
        "--budget", type=int, default=cfg("budget", variability.DEFAULT_EXACT_BUDGET)
    )
    p.add_argument("--seed", type=int, default=cfg("seed", None))
    p.add_argument(
        "--cutoffs", default=cfg("cutoffs", None),
        help="cutoffs artifact for level display",
    )
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("calibrate", help="fit similarity-level cutoffs")
    p.add_argument("--scores", default=None, help="JSON-lines {score,label} records")
    p.add_argument("--embeddings", default=None)
    p.add_argument("--cdf", default=None)
    p.add_argument("--judgments", default=None, help="graded JSON-lines judgments")
    p.add_argument("--metric", default=cfg("metric", None), choices=metrics)
    p.add_argument("--folds", type=int, default=cfg("folds", 5))
    p.add_argument("--seed", type=int, default=cfg("seed", None))
    p.add_argument("--round-to", type=float, default=cfg("round_to", None))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("eval-2afc", help="score a backbone against triplet judgments")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--cdf", required=True)
    p.add_argument("--triplets", required=True)
    p.add_argument("--metric", default=cfg("metric", None), choices=metrics)
    p.add_argument(
        "--tie-policy", default=cfg("tie_policy", "half_credit"),
        choices=list(evaluation.TIE_POLICIES),
    )
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval_2afc)

    p = sub.add_parser("reusability", help="w1kp score curve over subset sizes")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--cdf", required=True)
    p.add_argument("--metric", default=cfg("metric", None), choices=metrics)
    p.add_argument("--k-max", type=int, default=cfg("k_max", None), required="k_max" not in config)
    p.add_argument(
        "--mc-samples", type=int,
        default=cfg("mc_samples", variability.DEFAULT_MC_SAMPLES),
    )
    p.add_argument(
        "--budget", type=int, default=cfg("budget", variability.DEFAULT_EXACT_BUDGET)
    )
    p.add_argument("--seed", type=int, default=cfg("seed", None))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reusability)

    p = sub.add_parser("mds", help="classical MDS coordinates from pairwise distances")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--metric", default=cfg("metric", "euclidean"), choices=metrics)
    p.add_argument("--dims", type=int, default=cfg("dims", 2))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mds)

    p = sub.add_parser("split-prompt", help="split a prompt into main part and keywords")
    p.add_argument("text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_split_prompt)

    p = sub.add_parser("correlate", help="Spearman correlation between two CSV columns")
    p.add_argument("table")
    p.add_argument("--x", default=cfg("x", None))
    p.add_argument("--y", default=cfg("y", None))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_correlate)

    return parser


def main(argv=None) -> int:
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        pre_args, _ = pre.parse_known_args(argv)
        parser = build_parser(_load_config(pre_args.config))
        args = parser.parse_args(argv)
        args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except W1kpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
