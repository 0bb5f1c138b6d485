"""Command-line interface: one executable covering the whole pipeline.

Subcommands: build, export, import, search, validate, stats, eval.  Data
goes to the requested output file or stdout; diagnostics go to stderr.
Exit codes: 0 success, 1 failure (including validation findings of ERROR
severity), 2 usage errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import gzip
import logging
import os
import sys

from . import __version__
from .analysis import AnalysisConfig, analyze, read_stopwords
from .engine import (
    Bm25Params,
    NativeIndex,
    import_ciff,
    parse_topics,
    search,
    write_run,
)
from .errors import CiffError
from .evalkit import DEFAULT_METRICS, evaluate_run, parse_metric, parse_qrels, parse_run
from .indexer import build_index, read_corpus
from .kernels import BACKEND
from .model import compute_stats, validate_export, write_export
from .wire import open_export

logger = logging.getLogger(__name__)

DEFAULT_TAG = "ciffkit"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ciff",
        description="Build, exchange, search, and evaluate inverted indexes "
        "in the Common Index File Format.",
    )
    parser.add_argument("--version", action="version", version=f"ciffkit {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="index a corpus file into a native index directory")
    p.add_argument("--corpus", required=True, help="TSV corpus: collection_docid<TAB>contents")
    p.add_argument("--index", required=True, help="output index directory")
    p.add_argument("--no-lowercase", action="store_true", help="keep original case")
    p.add_argument("--stemmer", choices=["none", "porter"], default="none")
    p.add_argument("--stopwords", help="stopword file, one term per line")

    p = sub.add_parser("export", help="write an index as an exchange file")
    p.add_argument("--index", required=True, help="native index directory")
    p.add_argument("--out", required=True, help="output file; a .gz suffix enables gzip")
    p.add_argument("--queries", help="topic file; restrict the export to these query terms")
    p.add_argument("--description", help="replace the header description text")

    p = sub.add_parser("import", help="read an exchange file into a native index directory")
    p.add_argument("ciff", help="exchange file (gzip detected by magic bytes)")
    p.add_argument("--index", required=True, help="output index directory")

    p = sub.add_parser("search", help="run BM25 topics against an index, emitting a run file")
    p.add_argument("--index", required=True)
    p.add_argument("--topics", required=True, help="topic file: qid<TAB>query text")
    p.add_argument("--k", type=int, default=1000, help="results per topic (default 1000)")
    p.add_argument("--bm25", choices=["lucene", "atire"], default="lucene", dest="variant")
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--out", help="run file (default stdout)")
    p.add_argument("--tag", default=DEFAULT_TAG, help="run tag (sixth column)")
    p.add_argument("--threads", type=int, default=0, help="topic worker threads (0 = auto)")

    p = sub.add_parser("validate", help="check the structural integrity of an exchange file")
    p.add_argument("ciff")

    p = sub.add_parser("stats", help="summarize an exchange file")
    p.add_argument("ciff")
    p.add_argument("--top", type=int, default=10, help="number of highest-df terms to list")

    p = sub.add_parser("eval", help="score a run file against relevance judgments")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument(
        "--metrics",
        default=None,
        help="comma-separated list, e.g. ap,p@30,ndcg@10,err@10 (the default)",
    )
    p.add_argument("--gmax", type=int, default=None, help="grade ceiling for err (default: observed max)")
    p.add_argument("--tsv", action="store_true", help="machine-readable metric<TAB>qid<TAB>value lines")
    return parser


def _load_analysis_config(args) -> AnalysisConfig:
    stopwords = frozenset()
    if args.stopwords:
        with open(args.stopwords, "r", encoding="utf-8") as f:
            stopwords = read_stopwords(f, lowercase=not args.no_lowercase)
    return AnalysisConfig(
        lowercase=not args.no_lowercase,
        stemmer=args.stemmer,
        stopwords=stopwords,
    )


def _cmd_build(args) -> int:
    config = _load_analysis_config(args)
    index = build_index(read_corpus(args.corpus), config)
    native = NativeIndex.from_in_memory(index, description=f"ciffkit {config.summary()}")
    native.save(args.index)
    logger.info(
        "indexed %d documents, %d terms, %d tokens",
        native.num_docs, native.vocabulary_size, native.total_terms,
    )
    return 0


def _cmd_export(args) -> int:
    native = NativeIndex.load(args.index)
    term_filter = None
    if args.queries:
        config = native.analysis or AnalysisConfig()
        with open(args.queries, "r", encoding="utf-8") as f:
            topics = parse_topics(f)
        term_filter = set()
        for _, query in topics:
            term_filter.update(analyze(query, config))
    export = native.to_export(term_filter=term_filter, description=args.description)
    if args.out.endswith(".gz"):
        with open(args.out, "wb") as raw:
            # mtime and filename pinned so repeated exports are byte-identical
            with gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as sink:
                write_export(export, sink)
    else:
        with open(args.out, "wb") as sink:
            write_export(export, sink)
    return 0


def _cmd_import(args) -> int:
    with open_export(args.ciff) as source:
        native = import_ciff(source)
    native.save(args.index)
    logger.info(
        "imported %d postings lists over %d documents",
        native.vocabulary_size, native.num_docs,
    )
    return 0


def _cmd_search(args) -> int:
    native = NativeIndex.load(args.index)
    config = native.analysis
    if config is None:
        logger.info("index has no recorded analysis pipeline; using defaults for queries")
        config = AnalysisConfig()
    params = Bm25Params(k1=args.k1, b=args.b, variant=args.variant)
    with open(args.topics, "r", encoding="utf-8") as f:
        topics = parse_topics(f)

    def run_topic(query: str):
        return search(native, analyze(query, config), args.k, params)

    workers = args.threads or min(8, os.cpu_count() or 1)
    if workers > 1 and len(topics) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            per_topic = list(pool.map(run_topic, (q for _, q in topics)))
    else:
        per_topic = [run_topic(q) for _, q in topics]
    results = [(qid, scored) for (qid, _), scored in zip(topics, per_topic)]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
            write_run(results, native, args.tag, sink)
    else:
        write_run(results, native, args.tag, sys.stdout)
    return 0


def _cmd_validate(args) -> int:
    with open_export(args.ciff) as source:
        report = validate_export(source)
    if report.violations:
        print(report.render())
    if report.errors:
        return 1
    return 0


def _cmd_stats(args) -> int:
    with open_export(args.ciff) as source:
        summary = compute_stats(source, top_k=args.top)
    print(summary.render())
    return 0


def _cmd_eval(args) -> int:
    metrics = list(DEFAULT_METRICS)
    if args.metrics:
        metrics = [parse_metric(text) for text in args.metrics.split(",") if text.strip()]
    with open(args.qrels, "r", encoding="utf-8") as f:
        qrels = parse_qrels(f)
    with open(args.run, "r", encoding="utf-8") as f:
        run = parse_run(f)
    report = evaluate_run(run, qrels, metrics, gmax=args.gmax)
    print(report.render_tsv() if args.tsv else report.render_table())
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "export": _cmd_export,
    "import": _cmd_import,
    "search": _cmd_search,
    "validate": _cmd_validate,
    "stats": _cmd_stats,
    "eval": _cmd_eval,
}


def run_cli(argv: list[str] | None = None) -> int:
    """Parse arguments and execute one subcommand; returns the exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (CiffError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv: list[str] | None = None) -> int:
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
