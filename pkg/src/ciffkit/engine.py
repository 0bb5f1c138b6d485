"""Query engine: import an export into a native index and run BM25 top-k search.

The native representation is flat arrays: one concatenated postings store
(row-based docids plus term frequencies), per-term offsets into it, and a
doclength array.  Collection-level statistics come from the export header
(``N = total_docs``), so a topic-filtered export scores identically to the
full one.  Traversal is exhaustive document-at-a-time with no pruning, and
per-document term contributions are added in ascending term byte order,
which makes scores reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import BinaryIO, Iterable, NamedTuple, TextIO

import numpy as np

from .analysis import AnalysisConfig
from .errors import (
    DomainError,
    InvariantViolation,
    MalformedLine,
    MissingDocRecord,
    UnknownDocid,
)
from .kernels import daat_topk
from .model import CiffDocRecord, CiffExport, CiffHeader, CiffPostingsList, read_export

VARIANT_LUCENE = "lucene"
VARIANT_ATIRE = "atire"

MANIFEST_NAME = "manifest.json"
TERMS_NAME = "terms.tsv"
DOCS_NAME = "docs.tsv"
POSTINGS_NAME = "postings.npz"

NATIVE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4
    variant: str = VARIANT_LUCENE

    def __post_init__(self):
        if self.k1 < 0:
            raise DomainError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise DomainError(f"b must be in [0, 1], got {self.b}")
        if self.variant not in (VARIANT_LUCENE, VARIANT_ATIRE):
            raise DomainError(f"unknown variant {self.variant!r}")


class ScoredDoc(NamedTuple):
    docid: int
    score: float


def _idf(variant: str, n_docs: int, df: int) -> float:
    if variant == VARIANT_ATIRE:
        return math.log(n_docs / df)
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def bm25_weight(tf: int, df: int, doclength: int, stats: tuple[int, float], params: Bm25Params) -> float:
    """Score one (term, document) pair.

    ``stats`` is ``(N, avdl)``.  With ``K = k1*((1-b) + b*doclength/avdl)``:
    lucene is ``ln(1 + (N-df+0.5)/(df+0.5)) * tf/(tf+K)`` and atire is
    ``ln(N/df) * tf*(k1+1)/(tf+K)``.
    """
    n_docs, avdl = stats
    if tf < 1:
        raise DomainError(f"tf must be >= 1, got {tf}")
    if not 1 <= df <= n_docs:
        raise DomainError(f"df must be in [1, {n_docs}], got {df}")
    if doclength < 0:
        raise DomainError(f"doclength must be >= 0, got {doclength}")
    if not avdl > 0:
        raise DomainError(f"avdl must be positive, got {avdl}")
    tf_f = float(tf)
    norm = params.k1 * ((1.0 - params.b) + params.b * (float(doclength) / avdl))
    if params.variant == VARIANT_ATIRE:
        return _idf(VARIANT_ATIRE, n_docs, df) * (tf_f * (params.k1 + 1.0)) / (tf_f + norm)
    return _idf(VARIANT_LUCENE, n_docs, df) * tf_f / (tf_f + norm)


class NativeIndex:
    """Query-ready index over flat postings arrays; immutable once built."""

    def __init__(
        self,
        terms: list[str],
        dfs,
        cfs,
        offsets,
        rows,
        tfs,
        doclengths,
        docid_by_row,
        collection_ids: list[str],
        *,
        total_docs: int,
        total_postings_lists: int,
        total_terms: int,
        average_doclength: float,
        description: str = "",
        analysis: AnalysisConfig | None = None,
    ):
        self._terms = terms
        self._term_slot = {t: i for i, t in enumerate(terms)}
        self._dfs = np.ascontiguousarray(dfs, dtype=np.int64)
        self._cfs = np.ascontiguousarray(cfs, dtype=np.int64)
        self._offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self._rows = np.ascontiguousarray(rows, dtype=np.int64)
        self._tfs = np.ascontiguousarray(tfs, dtype=np.int64)
        self._doclengths = np.ascontiguousarray(doclengths, dtype=np.int64)
        self._docid_by_row = np.ascontiguousarray(docid_by_row, dtype=np.int64)
        self._collection_ids = collection_ids
        self._contiguous = bool(
            len(self._docid_by_row) == 0
            or (self._docid_by_row == np.arange(len(self._docid_by_row), dtype=np.int64)).all()
        )
        self.total_docs = total_docs
        self.total_postings_lists = total_postings_lists
        self.total_terms = total_terms
        self.average_doclength = average_doclength
        self.description = description
        self.analysis = analysis

    # -- inspection --------------------------------------------------

    @property
    def num_docs(self) -> int:
        return len(self._doclengths)

    @property
    def vocabulary_size(self) -> int:
        return len(self._terms)

    def terms(self) -> list[str]:
        return list(self._terms)

    def term_stats(self, term: str) -> tuple[int, int] | None:
        """(df, cf) for a term, or None when absent."""
        slot = self._term_slot.get(term)
        if slot is None:
            return None
        return int(self._dfs[slot]), int(self._cfs[slot])

    def lookup(self, term: str) -> list[tuple[int, int]] | None:
        """All (docid, tf) pairs for a term, or None when absent."""
        slot = self._term_slot.get(term)
        if slot is None:
            return None
        start = int(self._offsets[slot])
        end = start + int(self._dfs[slot])
        rows = self._rows[start:end]
        docids = rows if self._contiguous else self._docid_by_row[rows]
        return list(zip(docids.tolist(), self._tfs[start:end].tolist()))

    def doclength(self, docid: int) -> int:
        return int(self._doclengths[self._row_of_docid(docid)])

    def collection_docid(self, docid: int) -> str:
        return self._collection_ids[self._row_of_docid(docid)]

    def _row_of_docid(self, docid: int) -> int:
        if self._contiguous:
            if 0 <= docid < len(self._doclengths):
                return docid
            raise UnknownDocid(f"docid {docid} outside [0, {len(self._doclengths)})")
        pos = int(np.searchsorted(self._docid_by_row, docid))
        if pos >= len(self._docid_by_row) or int(self._docid_by_row[pos]) != docid:
            raise UnknownDocid(f"docid {docid} has no doc record")
        return pos

    # -- construction ------------------------------------------------

    @classmethod
    def from_in_memory(cls, index, description: str = "") -> "NativeIndex":
        """Convert a freshly built in-memory index (see .indexer)."""
        terms = index.sorted_terms()
        dfs, cfs, offsets = [], [], []
        rows_parts, tfs_parts = [], []
        offset = 0
        for term in terms:
            entry = index.terms[term]
            dfs.append(entry.df)
            cfs.append(entry.cf)
            offsets.append(offset)
            offset += entry.df
            rows_parts.extend(d for d, _ in entry.postings)
            tfs_parts.extend(t for _, t in entry.postings)
        n = index.num_docs
        return cls(
            terms,
            dfs,
            cfs,
            offsets,
            np.array(rows_parts, dtype=np.int64),
            np.array(tfs_parts, dtype=np.int64),
            np.array([length for _, length in index.docs], dtype=np.int64),
            np.arange(n, dtype=np.int64),
            [cid for cid, _ in index.docs],
            total_docs=n,
            total_postings_lists=index.vocabulary_size,
            total_terms=index.total_terms,
            average_doclength=index.average_doclength,
            description=description,
            analysis=index.config,
        )

    def to_export(self, term_filter: set[str] | None = None, description: str | None = None) -> CiffExport:
        """Rebuild an export view of this index (optionally term-filtered)."""
        selected = self._terms
        if term_filter is not None:
            selected = [t for t in selected if t in term_filter]
        header = CiffHeader(
            version=1,
            num_postings_lists=len(selected),
            num_docs=self.num_docs,
            total_postings_lists=self.total_postings_lists,
            total_docs=self.total_docs,
            total_terms_in_collection=self.total_terms,
            average_doclength=self.average_doclength,
            description=self.description if description is None else description,
        )

        def postings_lists():
            for term in selected:
                slot = self._term_slot[term]
                start = int(self._offsets[slot])
                end = start + int(self._dfs[slot])
                rows = self._rows[start:end]
                docids = rows if self._contiguous else self._docid_by_row[rows]
                yield CiffPostingsList(
                    term,
                    int(self._dfs[slot]),
                    int(self._cfs[slot]),
                    docids=docids,
                    tfs=self._tfs[start:end],
                )

        def doc_records():
            for row in range(self.num_docs):
                yield CiffDocRecord(
                    int(self._docid_by_row[row]),
                    self._collection_ids[row],
                    int(self._doclengths[row]),
                )

        return CiffExport(header, postings_lists(), doc_records())

    # -- persistence -------------------------------------------------

    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        analysis = None
        if self.analysis is not None:
            analysis = {
                "lowercase": self.analysis.lowercase,
                "stemmer": self.analysis.stemmer,
                "stopwords": sorted(self.analysis.stopwords),
                "token_length_cap": self.analysis.token_length_cap,
            }
        manifest = {
            "format_version": NATIVE_FORMAT_VERSION,
            "total_docs": self.total_docs,
            "total_postings_lists": self.total_postings_lists,
            "total_terms": self.total_terms,
            "average_doclength": self.average_doclength,
            "description": self.description,
            "analysis": analysis,
        }
        with open(os.path.join(directory, MANIFEST_NAME), "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
        with open(os.path.join(directory, TERMS_NAME), "w", encoding="utf-8") as f:
            for i, term in enumerate(self._terms):
                f.write(f"{term}\t{int(self._dfs[i])}\t{int(self._cfs[i])}\t{int(self._offsets[i])}\n")
        with open(os.path.join(directory, DOCS_NAME), "w", encoding="utf-8") as f:
            for row in range(self.num_docs):
                f.write(
                    f"{int(self._docid_by_row[row])}\t{self._collection_ids[row]}\t"
                    f"{int(self._doclengths[row])}\n"
                )
        np.savez(os.path.join(directory, POSTINGS_NAME), rows=self._rows, tfs=self._tfs)

    @classmethod
    def load(cls, directory) -> "NativeIndex":
        with open(os.path.join(directory, MANIFEST_NAME), "r", encoding="utf-8") as f:
            manifest = json.load(f)
        if manifest.get("format_version") != NATIVE_FORMAT_VERSION:
            raise InvariantViolation(
                f"native index format {manifest.get('format_version')!r} unsupported"
            )
        analysis = None
        if manifest.get("analysis") is not None:
            a = manifest["analysis"]
            analysis = AnalysisConfig(
                lowercase=a["lowercase"],
                stemmer=a["stemmer"],
                stopwords=frozenset(a["stopwords"]),
                token_length_cap=a["token_length_cap"],
            )
        terms, dfs, cfs, offsets = [], [], [], []
        with open(os.path.join(directory, TERMS_NAME), "r", encoding="utf-8") as f:
            for line in f:
                term, df, cf, offset = line.rstrip("\n").split("\t")
                terms.append(term)
                dfs.append(int(df))
                cfs.append(int(cf))
                offsets.append(int(offset))
        docid_by_row, collection_ids, doclengths = [], [], []
        with open(os.path.join(directory, DOCS_NAME), "r", encoding="utf-8") as f:
            for line in f:
                docid, cid, length = line.rstrip("\n").split("\t")
                docid_by_row.append(int(docid))
                collection_ids.append(cid)
                doclengths.append(int(length))
        with np.load(os.path.join(directory, POSTINGS_NAME), allow_pickle=False) as data:
            rows = data["rows"]
            tfs = data["tfs"]
        return cls(
            terms,
            dfs,
            cfs,
            offsets,
            rows,
            tfs,
            np.array(doclengths, dtype=np.int64),
            np.array(docid_by_row, dtype=np.int64),
            collection_ids,
            total_docs=manifest["total_docs"],
            total_postings_lists=manifest["total_postings_lists"],
            total_terms=manifest["total_terms"],
            average_doclength=manifest["average_doclength"],
            description=manifest["description"],
            analysis=analysis,
        )


def import_ciff(source: BinaryIO, max_record_bytes: int | None = None) -> NativeIndex:
    """Read an export stream into a native index.

    Structural invariants are enforced while streaming; a posting that
    references a docid with no doc record raises MissingDocRecord.  Terms
    are reordered into UTF-8 byte order if the export was unsorted.
    """
    reader = read_export(source, max_record_bytes)
    header = reader.header
    term_names: list[str] = []
    dfs: list[int] = []
    cfs: list[int] = []
    chunks_docids: list[np.ndarray] = []
    chunks_tfs: list[np.ndarray] = []
    for i, pl in enumerate(reader.postings_lists()):
        where = f"postings list {i} (term {pl.term!r})"
        n = len(pl.docids)
        if pl.df != n:
            raise InvariantViolation(f"{where}: df={pl.df} but {n} postings")
        tf_sum = int(pl.tfs.sum()) if n else 0
        if pl.cf != tf_sum:
            raise InvariantViolation(f"{where}: cf={pl.cf} but tf sum is {tf_sum}")
        if n and int(pl.tfs.min()) < 1:
            raise InvariantViolation(f"{where}: tf below 1")
        term_names.append(pl.term)
        dfs.append(pl.df)
        cfs.append(pl.cf)
        chunks_docids.append(pl.docids)
        chunks_tfs.append(pl.tfs)

    docid_by_row: list[int] = []
    collection_ids: list[str] = []
    doclengths: list[int] = []
    prev_docid = None
    for j, dr in enumerate(reader.doc_records()):
        if not dr.collection_docid:
            raise InvariantViolation(f"doc record {j}: empty collection_docid")
        if prev_docid is not None and dr.docid <= prev_docid:
            raise InvariantViolation(f"doc record {j}: docids not sorted")
        prev_docid = dr.docid
        docid_by_row.append(dr.docid)
        collection_ids.append(dr.collection_docid)
        doclengths.append(dr.doclength)

    docid_arr = np.array(docid_by_row, dtype=np.int64)
    num_docs = len(docid_arr)
    contiguous = bool(num_docs == 0 or (docid_arr == np.arange(num_docs, dtype=np.int64)).all())

    # Arrival order -> canonical term order; offsets keep pointing into the
    # arrival-ordered concatenated store, so only the term table permutes.
    arrival_offsets = np.zeros(len(dfs), dtype=np.int64)
    if dfs:
        arrival_offsets[1:] = np.cumsum(np.asarray(dfs[:-1], dtype=np.int64))
    order = sorted(range(len(term_names)), key=lambda s: term_names[s].encode("utf-8"))
    for a, b in zip(order, order[1:]):
        if term_names[a] == term_names[b]:
            raise InvariantViolation(f"duplicate term {term_names[a]!r}")
    terms = [term_names[s] for s in order]
    sorted_dfs = [dfs[s] for s in order]
    sorted_cfs = [cfs[s] for s in order]
    sorted_offsets = [int(arrival_offsets[s]) for s in order]

    all_docids = np.concatenate(chunks_docids) if chunks_docids else np.empty(0, dtype=np.int64)
    all_tfs = np.concatenate(chunks_tfs) if chunks_tfs else np.empty(0, dtype=np.int64)
    if len(all_docids):
        if contiguous:
            top = int(all_docids.max())
            if top >= num_docs:
                raise MissingDocRecord(f"posting docid {top} but only {num_docs} doc records")
            rows = all_docids
        else:
            idx = np.searchsorted(docid_arr, all_docids)
            idx_clipped = np.minimum(idx, max(num_docs - 1, 0))
            bad = (idx >= num_docs) | (docid_arr[idx_clipped] != all_docids)
            if bad.any():
                missing = int(all_docids[bad.argmax()])
                raise MissingDocRecord(f"posting docid {missing} has no doc record")
            rows = idx.astype(np.int64)
    else:
        rows = all_docids

    return NativeIndex(
        terms,
        sorted_dfs,
        sorted_cfs,
        sorted_offsets,
        rows,
        all_tfs,
        np.array(doclengths, dtype=np.int64),
        docid_arr,
        collection_ids,
        total_docs=header.total_docs,
        total_postings_lists=header.total_postings_lists,
        total_terms=header.total_terms_in_collection,
        average_doclength=header.average_doclength,
        description=header.description,
        analysis=None,
    )


def search(index: NativeIndex, query_terms: Iterable[str], k: int = 1000,
           params: Bm25Params = Bm25Params()) -> list[ScoredDoc]:
    """Top-k BM25 retrieval over the index.

    Duplicate query terms score once; terms absent from the index
    contribute nothing.  Results are ordered by (score desc, docid asc)
    and ties are exact because equal documents produce bit-identical
    scores.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    unique = sorted(set(query_terms), key=lambda t: t.encode("utf-8"))
    slots = [s for s in (index._term_slot.get(t) for t in unique) if s is not None]
    if not slots:
        return []
    if not index.average_doclength > 0:
        raise DomainError("index average_doclength must be positive to score")
    n_docs = index.total_docs
    offsets = np.array([int(index._offsets[s]) for s in slots], dtype=np.int64)
    lengths = np.array([int(index._dfs[s]) for s in slots], dtype=np.int64)
    idfs = np.array(
        [_idf(params.variant, n_docs, int(index._dfs[s])) for s in slots], dtype=np.float64
    )
    rows, scores = daat_topk(
        index._rows,
        index._tfs,
        offsets,
        lengths,
        idfs,
        index._doclengths,
        params.k1,
        params.b,
        index.average_doclength,
        params.variant == VARIANT_ATIRE,
        k,
    )
    if index._contiguous:
        return [ScoredDoc(int(r), s) for r, s in zip(rows, scores)]
    return [ScoredDoc(int(index._docid_by_row[r]), s) for r, s in zip(rows, scores)]


def parse_topics(source) -> list[tuple[str, str]]:
    """Parse ``qid<TAB>query text`` lines; blank lines are skipped."""
    topics = []
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        qid, sep, query = line.partition("\t")
        if not sep or not qid:
            raise MalformedLine("expected `qid<TAB>query text`", lineno)
        topics.append((qid, query))
    return topics


def write_run(results: Iterable[tuple[str, list[ScoredDoc]]], index: NativeIndex,
              tag: str, sink: TextIO) -> None:
    """Emit results in the standard 6-column run format.

    One line per result: ``qid Q0 collection_docid rank score tag``, rank
    starting at 1, scores with 6 decimal places, topics in input order.
    """
    for qid, scored in results:
        for rank, sd in enumerate(scored, start=1):
            cid = index.collection_docid(sd.docid)
            sink.write(f"{qid} Q0 {cid} {rank} {sd.score:.6f} {tag}\n")
