"""Single command-line entry point: `curate <subcommand>`.

Exit codes: 0 success, 1 input/validation errors (including usage), 2
internal errors. Diagnostics go to stderr; data goes to files or stdout.
Every subcommand is idempotent given identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__, kernels
from .analysis import (
    MauveConfig,
    ProbeConfig,
    backtranslation_quality,
    mauve,
    mauve_repeated,
    train_probe,
)
from .composition import run_recipe
from .errors import CurateError, UsageError
from .parallel import resolve_threads
from .poolstats import composition_delta, language_composition, overlap
from .records import CompositionRecipe
from .scoring import ScoreSpec, attach_scores
from .selection import select_top
from .shardio import read_embeddings, read_pool, resolve_space_path, scan_pool, write_pool

log = logging.getLogger("curate")

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; the spec wants 1."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _write_json(obj: Any, path: str | None) -> None:
    text = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_csv(rows: Sequence[Sequence[Any]], header: Sequence[str], path: str | None) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(cell) for cell in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _require_dir(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise UsageError(f"{what} directory does not exist: {path}")
    return p


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file does not exist: {path}")
    return p


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_score(args) -> int:
    pool_dir = _require_dir(args.pool, "pool")
    image_path = resolve_space_path(pool_dir, args.image_space)
    text_path = resolve_space_path(pool_dir, args.text_space)
    _require_file(str(image_path), "image sidecar")
    _require_file(str(text_path), "text sidecar")
    pool = read_pool(pool_dir, skip_invalid=args.skip_invalid)
    image_matrix = read_embeddings(image_path, args.image_space)
    text_matrix = read_embeddings(text_path, args.text_space)
    spec = ScoreSpec(score_name=args.name, image_space=args.image_space, text_space=args.text_space)
    scored = attach_scores(pool, spec, image_matrix, text_matrix)
    write_pool(scored, args.out, shard_size=args.shard_size)
    log.info("scored %d records into %s", len(scored), args.out)
    return 0


def _cmd_filter(args) -> int:
    pool_dir = _require_dir(args.pool, "pool")
    pool = read_pool(pool_dir, skip_invalid=args.skip_invalid)
    subset, report = select_top(
        pool,
        args.score,
        args.top,
        args.language,
        threads=resolve_threads(args.threads),
        approximate=args.approximate,
    )
    write_pool(subset, args.out, shard_size=args.shard_size)
    _write_json(report.to_dict(), args.report)
    return 0


def _cmd_compose(args) -> int:
    pool_dir = _require_dir(args.pool, "pool")
    recipe_path = _require_file(args.recipe, "recipe")
    try:
        recipe_obj = json.loads(recipe_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{recipe_path}: malformed recipe JSON: {exc}") from exc
    recipe = CompositionRecipe.from_dict(recipe_obj)
    pool = read_pool(pool_dir, skip_invalid=args.skip_invalid)
    out_pool, report = run_recipe(recipe, pool, threads=resolve_threads(args.threads))
    write_pool(out_pool, args.out, shard_size=args.shard_size)
    _write_json(report.to_dict(), args.report)
    return 0


def _cmd_stats_composition(args) -> int:
    pool = read_pool(_require_dir(args.pool, "pool"), skip_invalid=args.skip_invalid)
    stats = language_composition(pool, threads=resolve_threads(args.threads))
    rows = sorted(stats.per_language_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    _write_csv(rows, ("language", "count"), args.out)
    if args.json is not None:
        _write_json(stats.to_dict(), args.json)
    return 0


def _cmd_stats_overlap(args) -> int:
    left = read_pool(_require_dir(args.left, "left pool"), skip_invalid=args.skip_invalid)
    right = read_pool(_require_dir(args.right, "right pool"), skip_invalid=args.skip_invalid)
    count, per_language = overlap(left, right)
    rows = sorted(per_language.items(), key=lambda kv: (-kv[1], kv[0]))
    _write_csv(rows, ("language", "intersection_count"), args.out)
    if args.json is not None:
        _write_json(
            {"intersection_count": count, "per_language_intersection": dict(sorted(per_language.items()))},
            args.json,
        )
    return 0


def _cmd_stats_delta(args) -> int:
    before = read_pool(_require_dir(args.before, "before pool"), skip_invalid=args.skip_invalid)
    after = read_pool(_require_dir(args.after, "after pool"), skip_invalid=args.skip_invalid)
    threads = resolve_threads(args.threads)
    deltas = composition_delta(
        language_composition(before, threads=threads),
        language_composition(after, threads=threads),
    )
    rows = [(lang, f"{value:+.6f}") for lang, value in deltas.items()]
    _write_csv(rows, ("language", "delta_percentage_points"), args.out)
    if args.json is not None:
        _write_json(deltas, args.json)
    return 0


def _cmd_mauve(args) -> int:
    left = read_embeddings(_require_file(args.left, "left sidecar"))
    right = read_embeddings(_require_file(args.right, "right sidecar"))
    config = MauveConfig(
        k=args.k,
        c=args.c,
        grid_size=args.grid,
        seed=args.seed,
        max_kmeans_iters=args.max_iters,
    )
    report: dict[str, Any] = {
        "left": args.left,
        "right": args.right,
        "k": config.resolve_k(len(left.rows) + len(right.rows)),
        "c": config.c,
        "grid_size": config.grid_size,
        "seed": config.seed,
        "backend": kernels.BACKEND,
    }
    if args.repeats == 1:
        score, curve = mauve(left.rows, right.rows, config)
        report.update({"score": score, "curve_area": curve.area})
        if args.curve is not None:
            _write_csv([(x, y) for x, y in curve.points], ("x", "y"), args.curve)
    else:
        if args.curve is not None:
            raise UsageError("--curve requires --repeats 1")
        mean, sd = mauve_repeated(
            left.rows, right.rows, config, repeats=args.repeats, subsample_size=args.subsample
        )
        report.update(
            {"score": mean, "sd": sd, "repeats": args.repeats, "subsample_size": args.subsample}
        )
    _write_json(report, args.report)
    return 0


def _cmd_probe(args) -> int:
    pos = read_embeddings(_require_file(args.pos, "positive sidecar"))
    neg = read_embeddings(_require_file(args.neg, "negative sidecar"))
    config = ProbeConfig(
        l2_regularization=args.l2,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        seed=args.seed,
        train_fraction=args.train_fraction,
    )
    probe = train_probe(pos.rows, neg.rows, config)
    report = {
        "held_out_accuracy": probe.held_out_accuracy,
        "bias": probe.bias,
        "dimension": pos.dimension,
        "positives": len(pos.rows),
        "negatives": len(neg.rows),
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "l2_regularization": config.l2_regularization,
        "train_fraction": config.train_fraction,
        "seed": config.seed,
        "backend": kernels.BACKEND,
    }
    _write_json(report, args.report)
    if args.weights_out is not None:
        _write_json(probe.to_dict(), args.weights_out)
    return 0


def _cmd_backtrans(args) -> int:
    manifest_path = _require_file(args.pairs, "pair manifest")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{manifest_path}: malformed pair manifest: {exc}") from exc
    for key in ("original", "backtranslated", "languages"):
        if key not in manifest:
            raise UsageError(f"{manifest_path}: pair manifest missing key {key!r}")
    base = manifest_path.parent
    original = read_embeddings(_require_file(str(base / manifest["original"]), "original sidecar"))
    back = read_embeddings(
        _require_file(str(base / manifest["backtranslated"]), "backtranslated sidecar")
    )
    languages_path = _require_file(str(base / manifest["languages"]), "languages")
    languages = languages_path.read_text(encoding="utf-8").splitlines()
    if len(languages) != len(original.rows) or len(original.rows) != len(back.rows):
        raise UsageError(
            "pair manifest rows disagree: "
            f"{len(original.rows)} original, {len(back.rows)} backtranslated, "
            f"{len(languages)} languages"
        )
    pairs = zip(original.rows, back.rows, languages)
    report = backtranslation_quality(pairs, min_samples=args.min_samples)
    _write_json(report.to_dict(), args.report)
    if args.csv is not None:
        rows = [
            (lang, report.per_language_count[lang], f"{mean:.6f}")
            for lang, mean in sorted(
                report.per_language_mean.items(), key=lambda kv: (-kv[1], kv[0])
            )
        ]
        _write_csv(rows, ("language", "count", "mean_cosine"), args.csv)
    return 0


def _cmd_validate(args) -> int:
    scan = scan_pool(_require_dir(args.pool, "pool"))
    report = {
        "records": scan.record_count,
        "shards": scan.shard_count,
        "invalid_records": scan.invalid_count,
        "error_count": len(scan.errors),
        "errors": list(scan.errors[: args.max_errors]),
    }
    _write_json(report, args.report)
    return 0 if scan.ok else 1


# ---------------------------------------------------------------------------
# parser


def _add_common(parser: argparse.ArgumentParser, *, reads_pool: bool = False, writes_pool: bool = False):
    parser.add_argument("--threads", type=int, default=None, help="shard-level parallelism")
    if reads_pool:
        parser.add_argument(
            "--skip-invalid",
            action="store_true",
            help="count and log malformed records instead of aborting",
        )
    if writes_pool:
        parser.add_argument(
            "--shard-size", type=int, default=None, help="records per output shard"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curate", description=__doc__)
    parser.add_argument("--version", action="version", version=f"curate {__version__}")
    parser.add_argument(
        "--log-level",
        default="warning",
        choices=("debug", "info", "warning", "error"),
        help="stderr verbosity",
    )
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("score", help="attach cosine-similarity scores")
    p.add_argument("--name", required=True, help="score name to attach")
    p.add_argument("--image-space", required=True)
    p.add_argument("--text-space", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--out", required=True)
    _add_common(p, reads_pool=True, writes_pool=True)
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("filter", help="keep the top fraction by a named score")
    p.add_argument("--score", required=True)
    p.add_argument("--top", required=True, help="keep fraction in (0, 1], e.g. 0.20")
    p.add_argument("--language", default=None, help="restrict candidates to a language code")
    p.add_argument("--pool", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None, help="selection report JSON (default: stdout)")
    p.add_argument(
        "--approximate",
        action="store_true",
        help="one-pass quantile-sketch threshold; kept count becomes approximate",
    )
    _add_common(p, reads_pool=True, writes_pool=True)
    p.set_defaults(fn=_cmd_filter)

    p = sub.add_parser("compose", help="materialize a recipe (filter/replace/union/concat)")
    p.add_argument("--recipe", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    _add_common(p, reads_pool=True, writes_pool=True)
    p.set_defaults(fn=_cmd_compose)

    p = sub.add_parser("stats", help="language composition, overlap, share deltas")
    stats_sub = p.add_subparsers(dest="stats_command", metavar="kind")
    sp = stats_sub.add_parser("composition")
    sp.add_argument("--pool", required=True)
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sp.add_argument("--json", default=None, help="JSON summary path")
    _add_common(sp, reads_pool=True)
    sp.set_defaults(fn=_cmd_stats_composition)
    sp = stats_sub.add_parser("overlap")
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--json", default=None)
    _add_common(sp, reads_pool=True)
    sp.set_defaults(fn=_cmd_stats_overlap)
    sp = stats_sub.add_parser("delta")
    sp.add_argument("--before", required=True)
    sp.add_argument("--after", required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--json", default=None)
    _add_common(sp, reads_pool=True)
    sp.set_defaults(fn=_cmd_stats_delta)

    p = sub.add_parser("mauve", help="divergence-frontier similarity of two embedding sets")
    p.add_argument("--left", required=True, help="embedding sidecar")
    p.add_argument("--right", required=True, help="embedding sidecar")
    p.add_argument("--k", type=int, default=None, help="cluster count (default: n/10 capped at 500)")
    p.add_argument("--c", type=float, default=5.0, help="exponent scaling constant")
    p.add_argument("--grid", type=int, default=1000, help="lambda grid size")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-iters", type=int, default=100, help="k-means iteration cap")
    p.add_argument("--repeats", type=int, default=1, help="subsampled repeats (mean and sd)")
    p.add_argument("--subsample", type=int, default=None, help="points per side per repeat")
    p.add_argument("--curve", default=None, help="CSV path for the frontier points")
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_mauve)

    p = sub.add_parser("probe", help="linear probe separating two embedding sets")
    p.add_argument("--pos", required=True, help="positive-class sidecar")
    p.add_argument("--neg", required=True, help="negative-class sidecar")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--weights-out", default=None, help="JSON path for the trained weights")
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_probe)

    p = sub.add_parser("backtrans", help="back-translation quality aggregation")
    p.add_argument("--pairs", required=True, help="pair manifest JSON")
    p.add_argument("--min-samples", type=int, default=30)
    p.add_argument("--csv", default=None, help="per-language CSV path")
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_backtrans)

    p = sub.add_parser("validate", help="full offline validation of a pool directory")
    p.add_argument("--pool", required=True)
    p.add_argument("--max-errors", type=int, default=100, help="errors listed in the report")
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_validate)

    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Parse and run; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            stream=sys.stderr,
            level=getattr(logging, args.log_level.upper()),
            format="%(levelname)s %(name)s: %(message)s",
        )
        if not getattr(args, "fn", None):
            parser.print_usage(sys.stderr)
            print("curate: a subcommand is required", file=sys.stderr)
            return 1
        return args.fn(args)
    except SystemExit as exc:  # argparse --help / --version
        code = exc.code
        return code if isinstance(code, int) else 0
    except BrokenPipeError:
        return 1
    except CurateError as exc:
        print(f"curate: error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001 - the CLI boundary reports, never raises
        import traceback

        traceback.print_exc()
        print("curate: internal error", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
