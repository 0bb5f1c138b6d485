"""Deterministic synthetic corpus and query generation for the test suite."""

from __future__ import annotations

import random

from ciffkit import CorpusDocument


def make_synthetic_corpus(num_docs=1000, vocab_size=10000, seed=13):
    """Corpus covering exactly ``vocab_size`` distinct terms.

    Each document plants a disjoint slice of the vocabulary (so coverage
    is exact) and adds a log-uniform sample that skews document frequency
    the way natural text does.
    """
    assert vocab_size % num_docs == 0
    per_doc = vocab_size // num_docs
    rng = random.Random(seed)
    docs = []
    for i in range(num_docs):
        terms = [f"w{(per_doc * i + j) % vocab_size:05d}" for j in range(per_doc)]
        n_extra = rng.randint(20, 60)
        for _ in range(n_extra):
            term_id = int(vocab_size ** rng.random()) % vocab_size
            terms.append(f"w{term_id:05d}")
        rng.shuffle(terms)
        docs.append(CorpusDocument(f"doc{i:04d}", " ".join(terms)))
    return docs


def make_queries(count=100, vocab_size=10000, seed=14, min_terms=1, max_terms=4):
    rng = random.Random(seed)
    queries = []
    for _ in range(count):
        n = rng.randint(min_terms, max_terms)
        ids = rng.sample(range(vocab_size), n)
        queries.append(" ".join(f"w{i:05d}" for i in ids))
    return queries
