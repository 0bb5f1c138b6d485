#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Exercises the three hot paths on synthetic postings data: parsing
postings-list payloads, serializing them back, and document-at-a-time
top-k scoring.  Run from the repository root:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --docs 50000 --terms 2000 --queries 500
"""

from __future__ import annotations

import argparse
import math
import random
import time

import numpy as np

from ciffkit import _pykernels

try:
    from ciffkit import _ckernels
except ImportError:
    _ckernels = None


def make_postings(num_docs: int, num_terms: int, seed: int):
    """Synthetic term postings with a skewed document-frequency profile."""
    rng = random.Random(seed)
    terms = []
    for t in range(num_terms):
        df = max(1, int(num_docs ** rng.random()))
        docids = np.array(sorted(rng.sample(range(num_docs), df)), dtype=np.int64)
        tfs = np.array([rng.randint(1, 12) for _ in range(df)], dtype=np.int64)
        terms.append((docids, tfs))
    return terms


def bench(fn, repeat: int = 3) -> float:
    best = math.inf
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run(args) -> None:
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("c", _ckernels))
    else:
        print("note: compiled kernels unavailable; benchmarking the fallback only")

    terms = make_postings(args.docs, args.terms, args.seed)
    payloads = [_pykernels.build_postings(d, t) for d, t in terms]
    total_postings = sum(len(d) for d, _ in terms)
    total_bytes = sum(len(p) for p in payloads)
    print(
        f"{args.terms} terms, {total_postings} postings, "
        f"{total_bytes / 1e6:.1f} MB of payload, {args.docs} docs"
    )

    results: dict[str, dict[str, float]] = {}

    for name, mod in backends:
        def parse_all(mod=mod):
            for payload in payloads:
                mod.parse_postings(payload)

        results.setdefault("parse_postings", {})[name] = bench(parse_all)

    for name, mod in backends:
        def build_all(mod=mod):
            for docids, tfs in terms:
                mod.build_postings(docids, tfs)

        results.setdefault("build_postings", {})[name] = bench(build_all)

    # flat index layout for the scoring kernel
    docids_flat = np.concatenate([d for d, _ in terms])
    tfs_flat = np.concatenate([t for _, t in terms])
    lengths = np.array([len(d) for d, _ in terms], dtype=np.int64)
    offsets = np.zeros(len(terms), dtype=np.int64)
    offsets[1:] = np.cumsum(lengths[:-1])
    doclens = np.random.default_rng(args.seed).integers(5, 500, args.docs).astype(np.int64)
    avdl = float(doclens.mean())
    rng = random.Random(args.seed + 1)
    queries = []
    for _ in range(args.queries):
        n = rng.randint(1, 4)
        slots = rng.sample(range(len(terms)), n)
        idfs = np.array(
            [math.log(1.0 + (args.docs - lengths[s] + 0.5) / (lengths[s] + 0.5)) for s in slots],
            dtype=np.float64,
        )
        queries.append(
            (
                np.array([offsets[s] for s in slots], dtype=np.int64),
                np.array([lengths[s] for s in slots], dtype=np.int64),
                idfs,
            )
        )

    for name, mod in backends:
        def search_all(mod=mod):
            for q_offsets, q_lengths, q_idfs in queries:
                mod.daat_topk(
                    docids_flat, tfs_flat, q_offsets, q_lengths, q_idfs,
                    doclens, 0.9, 0.4, avdl, False, args.k,
                )

        results.setdefault("daat_topk", {})[name] = bench(search_all)

    print()
    header = f"{'kernel':<16}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel, timings in results.items():
        row = f"{kernel:<16}"
        for name, _ in backends:
            row += f"{timings[name] * 1000:>10.1f}ms"
        if len(backends) == 2:
            row += f"{timings['python'] / timings['c']:>9.1f}x"
        print(row)

    unit = {
        "parse_postings": total_bytes / 1e6,
        "build_postings": total_bytes / 1e6,
        "daat_topk": args.queries,
    }
    label = {"parse_postings": "MB/s", "build_postings": "MB/s", "daat_topk": "queries/s"}
    print()
    for kernel, timings in results.items():
        line = f"{kernel:<16}"
        for name, _ in backends:
            line += f"{unit[kernel] / timings[name]:>10.0f} {label[kernel]:<10}"
        print(line)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=20000)
    parser.add_argument("--terms", type=int, default=1000)
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--k", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=29)
    run(parser.parse_args())


if __name__ == "__main__":
    main()
