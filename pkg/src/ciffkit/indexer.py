"""Corpus ingestion and in-memory inverted index construction.

The corpus file format is one document per line, two tab-separated
fields: external docid, then contents (callers must pre-escape tabs and
newlines inside contents).  Docids are assigned 0, 1, 2, ... in ingestion
order, which gives every consumer of an export the same tie-breaking
order.  Construction is fully in memory; the streaming path is the export
itself, not the indexer.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .analysis import AnalysisConfig, DEFAULT_CONFIG, analyze
from .errors import DuplicateCollectionDocid, MalformedLine
from .model import CiffDocRecord, CiffExport, CiffHeader, CiffPostingsList


@dataclass(frozen=True)
class CorpusDocument:
    collection_docid: str
    contents: str

    def __post_init__(self):
        if not self.collection_docid:
            raise ValueError("collection_docid must be non-empty")


def read_corpus(source) -> Iterator[CorpusDocument]:
    """Parse a corpus stream or path; blank lines are skipped."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as f:
            yield from read_corpus(f)
        return
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        docid, sep, contents = line.partition("\t")
        if not sep:
            raise MalformedLine("expected `collection_docid<TAB>contents`", lineno)
        if not docid:
            raise MalformedLine("empty collection_docid", lineno)
        yield CorpusDocument(docid, contents)


@dataclass
class _TermEntry:
    cf: int = 0
    postings: list[tuple[int, int]] = field(default_factory=list)  # (docid, tf)

    @property
    def df(self) -> int:
        return len(self.postings)


@dataclass
class InMemoryIndex:
    """Dictionary plus document table; immutable once built."""

    config: AnalysisConfig
    terms: dict[str, _TermEntry] = field(default_factory=dict)
    docs: list[tuple[str, int]] = field(default_factory=list)  # (collection_docid, doclength)

    @property
    def num_docs(self) -> int:
        return len(self.docs)

    @property
    def vocabulary_size(self) -> int:
        return len(self.terms)

    @property
    def total_terms(self) -> int:
        return sum(length for _, length in self.docs)

    @property
    def average_doclength(self) -> float:
        return self.total_terms / self.num_docs if self.num_docs else 0.0

    def postings(self, term: str) -> list[tuple[int, int]] | None:
        entry = self.terms.get(term)
        return list(entry.postings) if entry is not None else None

    def sorted_terms(self) -> list[str]:
        return sorted(self.terms, key=lambda t: t.encode("utf-8"))


def build_index(corpus: Iterable[CorpusDocument], config: AnalysisConfig = DEFAULT_CONFIG) -> InMemoryIndex:
    """Analyze every document and accumulate postings.

    Documents whose contents analyze to nothing still occupy a docid and a
    doc-table entry with doclength 0.
    """
    index = InMemoryIndex(config=config)
    seen: set[str] = set()
    for doc in corpus:
        if doc.collection_docid in seen:
            raise DuplicateCollectionDocid(doc.collection_docid)
        seen.add(doc.collection_docid)
        docid = len(index.docs)
        tokens = analyze(doc.contents, config)
        index.docs.append((doc.collection_docid, len(tokens)))
        for term, tf in sorted(Counter(tokens).items()):
            entry = index.terms.get(term)
            if entry is None:
                entry = index.terms[term] = _TermEntry()
            entry.cf += tf
            entry.postings.append((docid, tf))
    return index


def export_ciff(
    index: InMemoryIndex,
    term_filter: set[str] | None = None,
    description: str = "",
) -> CiffExport:
    """Produce an export of the index, optionally restricted to a term set.

    A filtered export keeps every doc record and the full-index header
    totals (scorers need true global statistics); only
    ``num_postings_lists`` and the postings lists themselves shrink to the
    intersection of the filter with the vocabulary.
    """
    ordered = index.sorted_terms()
    if term_filter is not None:
        ordered = [t for t in ordered if t in term_filter]
    header = CiffHeader(
        version=1,
        num_postings_lists=len(ordered),
        num_docs=index.num_docs,
        total_postings_lists=index.vocabulary_size,
        total_docs=index.num_docs,
        total_terms_in_collection=index.total_terms,
        average_doclength=index.average_doclength,
        description=description,
    )
    postings_lists = []
    for term in ordered:
        entry = index.terms[term]
        docids = np.fromiter((d for d, _ in entry.postings), dtype=np.int64, count=len(entry.postings))
        tfs = np.fromiter((t for _, t in entry.postings), dtype=np.int64, count=len(entry.postings))
        postings_lists.append(CiffPostingsList(term, entry.df, entry.cf, docids=docids, tfs=tfs))
    doc_records = [
        CiffDocRecord(docid, collection_docid, length)
        for docid, (collection_docid, length) in enumerate(index.docs)
    ]
    return CiffExport(header, postings_lists, doc_records)


def export_bytes(index: InMemoryIndex, term_filter=None, description: str = "") -> bytes:
    """Convenience: the canonical serialized export as a byte string."""
    from .model import write_export

    sink = io.BytesIO()
    write_export(export_ciff(index, term_filter, description), sink)
    return sink.getvalue()
