"""Command line front end: run sessions, compare them, export dendrograms.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cluster import dendrogram_from_json, export_dendrogram
from .errors import ConfigError, DataError
from .session import (
    DEFAULT_MC_ITERATIONS,
    SessionConfig,
    compare_sessions,
    load_config_mapping,
    run_experiment,
)

# (flag, type, config key, help); every run flag overrides the config file
_RUN_FLAGS = [
    ("--corpus", str, "corpus", "text corpus, one utterance per line"),
    ("--grammar-spec", str, "grammar_spec", "weighted generator grammar file"),
    ("--utterances", int, "utterances", "number of utterances to generate"),
    ("--seed", int, "seed", "generation seed"),
    ("--window-before", int, "window_before", "context positions before the target"),
    ("--window-after", int, "window_after", "context positions after the target"),
    ("--min-freq", int, "min_freq", "minimum corpus frequency for targets"),
    ("--clusters", int, "clusters", "number of categories to induce"),
    ("--confidence", int, "confidence", "confidence score for acquired properties"),
    ("--min-corpus", int, "min_corpus", "minimum corpus size to accept"),
    ("--mc-iterations", int, "mc_iterations", "Monte Carlo iterations for statistics"),
    ("--mc-seed", int, "mc_seed", "Monte Carlo seed (defaults to --seed)"),
    ("--out", str, "out", "directory that receives <session id>/ artifacts"),
    ("--exchange-turns", int, "exchange_turns", "daughter turns in exchange mode"),
    ("--reference", str, "reference", "session dir or report to compare against"),
    ("--session-id", int, "session_id", "fixed session id (for replays)"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modoma",
        description="Unsupervised acquisition of word categories from "
        "mother-daughter language sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one acquisition session")
    run_p.add_argument("--config", help="key=value or JSON config file; flags override it")
    for flag, typ, dest, help_text in _RUN_FLAGS:
        run_p.add_argument(flag, type=typ, dest=dest, default=None, help=help_text)
    run_p.add_argument(
        "--mode", choices=("acquire-only", "exchange"), default=None,
        help="stop after acquisition, or add daughter-mother exchange turns",
    )

    compare_p = sub.add_parser("compare", help="statistics over two finished sessions")
    compare_p.add_argument("dir_a", help="session directory providing the rows")
    compare_p.add_argument("dir_b", help="session directory providing the columns")
    compare_p.add_argument("--mc-iterations", type=int, default=DEFAULT_MC_ITERATIONS)
    compare_p.add_argument("--seed", type=int, default=0)

    dendro_p = sub.add_parser("dendrogram", help="print a session's cluster tree")
    dendro_p.add_argument("directory", help="session directory")
    dendro_p.add_argument("--format", choices=("newick", "svg", "json"),
                          default="newick")
    return parser


def _cmd_run(args) -> int:
    mapping = load_config_mapping(args.config) if args.config else {}
    for _, _, dest, _ in _RUN_FLAGS:
        value = getattr(args, dest)
        if value is not None:
            mapping[dest] = value
    if args.mode is not None:
        mapping["mode"] = args.mode
    config = SessionConfig.from_mapping(mapping)
    log = run_experiment(config)
    report = log.report
    sizes = sum(len(words) for words in report.clusters.values())
    print(
        f"session {log.config.session_id}: feature {report.feature} "
        f"with {len(report.clusters)} values over {sizes} words"
    )
    print(f"artifacts in {log.directory}")
    return 0


def _cmd_compare(args) -> int:
    results = compare_sessions(args.dir_a, args.dir_b, args.mc_iterations, args.seed)
    print(
        f"overall p = {results['p']:.6g} "
        f"({results['iterations']} iterations, seed {results['seed']})"
    )
    significant = [pair for pair in results["pairs"] if pair["p"] < 0.05]
    print(
        f"{len(significant)} of {len(results['pairs'])} corrected pairwise "
        f"tests below 0.05"
    )
    for pair in significant:
        rows, cols = pair["rows"], pair["cols"]
        print(f"  {rows[0]}/{rows[1]} x {cols[0]}/{cols[1]}: p = {pair['p']:.6g}")
    return 0


def _cmd_dendrogram(args) -> int:
    path = Path(args.directory) / "dendrogram.json"
    if not path.is_file():
        raise DataError(f"no dendrogram at {path}")
    dendrogram = dendrogram_from_json(path.read_text(encoding="utf-8"))
    text = export_dendrogram(dendrogram, args.format)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "compare": _cmd_compare,
        "dendrogram": _cmd_dendrogram,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
