"""Domain model for the exchange format.

An export is one header record, then exactly ``header.num_postings_lists``
postings-list records, then exactly ``header.num_docs`` document records,
each length-delimited.  Docids inside a postings list are gap-encoded on
the wire and absolute in memory.

Field numbers:

==============  ====================================  =============
record          field                                 number / kind
==============  ====================================  =============
Header          version                               1  varint
                num_postings_lists                    2  varint
                num_docs                              3  varint
                total_postings_lists                  4  varint
                total_docs                            5  varint
                total_terms_in_collection             6  varint
                average_doclength                     7  fixed64
                description                           8  bytes
Posting         docid (gap on the wire)               1  varint
                tf                                    2  varint
PostingsList    term                                  1  bytes
                df                                    2  varint
                cf                                    3  varint
                postings                              4  bytes, repeated
DocRecord       docid                                 1  varint
                collection_docid                      2  bytes
                doclength                             3  varint
==============  ====================================  =============
"""

from __future__ import annotations

import heapq
import logging
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from . import wire
from .errors import (
    CodecError,
    CountMismatch,
    InvariantViolation,
    NotIncreasing,
    UnsupportedVersion,
    ZeroGap,
)
from .kernels import build_postings, parse_postings
from .wire import FieldDescriptor, RawRecord, WireKind

logger = logging.getLogger(__name__)

SUPPORTED_VERSION = 1

# Relative tolerance for re-derived average document length.
AVDL_REL_TOL = 1e-6

HEADER_SCHEMA = {
    1: FieldDescriptor(1, WireKind.VARINT),
    2: FieldDescriptor(2, WireKind.VARINT),
    3: FieldDescriptor(3, WireKind.VARINT),
    4: FieldDescriptor(4, WireKind.VARINT),
    5: FieldDescriptor(5, WireKind.VARINT),
    6: FieldDescriptor(6, WireKind.VARINT),
    7: FieldDescriptor(7, WireKind.FIXED64),
    8: FieldDescriptor(8, WireKind.LENGTH_DELIMITED),
}

POSTING_SCHEMA = {
    1: FieldDescriptor(1, WireKind.VARINT),
    2: FieldDescriptor(2, WireKind.VARINT),
}

POSTINGS_LIST_SCHEMA = {
    1: FieldDescriptor(1, WireKind.LENGTH_DELIMITED),
    2: FieldDescriptor(2, WireKind.VARINT),
    3: FieldDescriptor(3, WireKind.VARINT),
    4: FieldDescriptor(4, WireKind.LENGTH_DELIMITED, repeated=True),
}

DOC_RECORD_SCHEMA = {
    1: FieldDescriptor(1, WireKind.VARINT),
    2: FieldDescriptor(2, WireKind.LENGTH_DELIMITED),
    3: FieldDescriptor(3, WireKind.VARINT),
}


def gap_encode(docids: list[int]) -> list[int]:
    """Turn a strictly increasing docid list into first value + gaps."""
    out = []
    prev = None
    for i, docid in enumerate(docids):
        if docid < 0:
            raise NotIncreasing(f"docid {docid} at position {i} is negative")
        if prev is None:
            out.append(docid)
        else:
            if docid <= prev:
                raise NotIncreasing(f"docid {docid} at position {i} does not increase past {prev}")
            out.append(docid - prev)
        prev = docid
    return out


def gap_decode(gaps: list[int]) -> list[int]:
    """Prefix-sum a gap list back to absolute docids (inverse of gap_encode)."""
    out = []
    total = 0
    for i, gap in enumerate(gaps):
        if gap < 0:
            raise NotIncreasing(f"gap {gap} at position {i} is negative")
        if i > 0 and gap == 0:
            raise ZeroGap(f"zero gap at position {i} implies a duplicate docid")
        total = gap if i == 0 else total + gap
        out.append(total)
    return out


@dataclass
class CiffHeader:
    version: int = SUPPORTED_VERSION
    num_postings_lists: int = 0
    num_docs: int = 0
    total_postings_lists: int = 0
    total_docs: int = 0
    total_terms_in_collection: int = 0
    average_doclength: float = 0.0
    description: str = ""

    def encode(self) -> bytes:
        entries = [
            (HEADER_SCHEMA[1], self.version),
            (HEADER_SCHEMA[2], self.num_postings_lists),
            (HEADER_SCHEMA[3], self.num_docs),
            (HEADER_SCHEMA[4], self.total_postings_lists),
            (HEADER_SCHEMA[5], self.total_docs),
            (HEADER_SCHEMA[6], self.total_terms_in_collection),
            (HEADER_SCHEMA[7], struct.pack("<d", self.average_doclength)),
            (HEADER_SCHEMA[8], self.description.encode("utf-8")),
        ]
        return wire.encode_record(RawRecord(entries))

    @classmethod
    def decode(cls, payload: bytes) -> "CiffHeader":
        rec = wire.decode_record(payload, HEADER_SCHEMA)
        avdl_bytes = rec.get(7, b"\x00" * 8)
        return cls(
            version=rec.get(1, 0),
            num_postings_lists=rec.get(2, 0),
            num_docs=rec.get(3, 0),
            total_postings_lists=rec.get(4, 0),
            total_docs=rec.get(5, 0),
            total_terms_in_collection=rec.get(6, 0),
            average_doclength=struct.unpack("<d", avdl_bytes)[0],
            description=rec.get(8, b"").decode("utf-8"),
        )

    def derived_avdl(self) -> float:
        if self.total_docs <= 0:
            return 0.0
        return self.total_terms_in_collection / self.total_docs

    def avdl_consistent(self) -> bool:
        derived = self.derived_avdl()
        scale = max(abs(derived), abs(self.average_doclength))
        if scale == 0.0:
            return True
        return abs(derived - self.average_doclength) <= AVDL_REL_TOL * scale


@dataclass(frozen=True)
class CiffPosting:
    docid: int
    tf: int


class CiffPostingsList:
    """One term's postings, held as aligned int64 docid/tf arrays."""

    __slots__ = ("term", "df", "cf", "docids", "tfs")

    def __init__(self, term: str, df: int, cf: int, postings=None, *, docids=None, tfs=None):
        self.term = term
        self.df = df
        self.cf = cf
        if postings is not None:
            self.docids = np.array([p.docid for p in postings], dtype=np.int64)
            self.tfs = np.array([p.tf for p in postings], dtype=np.int64)
        else:
            self.docids = np.ascontiguousarray(docids if docids is not None else [], dtype=np.int64)
            self.tfs = np.ascontiguousarray(tfs if tfs is not None else [], dtype=np.int64)

    @property
    def postings(self) -> list[CiffPosting]:
        return [CiffPosting(int(d), int(t)) for d, t in zip(self.docids, self.tfs)]

    def __len__(self) -> int:
        return len(self.docids)

    def __eq__(self, other):
        return (
            isinstance(other, CiffPostingsList)
            and self.term == other.term
            and self.df == other.df
            and self.cf == other.cf
            and np.array_equal(self.docids, other.docids)
            and np.array_equal(self.tfs, other.tfs)
        )

    def __repr__(self):
        return f"CiffPostingsList(term={self.term!r}, df={self.df}, cf={self.cf}, n={len(self)})"

    def encode(self) -> bytes:
        entries = [
            (POSTINGS_LIST_SCHEMA[1], self.term.encode("utf-8")),
            (POSTINGS_LIST_SCHEMA[2], self.df),
            (POSTINGS_LIST_SCHEMA[3], self.cf),
        ]
        head = wire.encode_record(RawRecord(entries))
        return head + build_postings(self.docids, self.tfs)

    @classmethod
    def decode(cls, payload: bytes, *, strict: bool = True) -> "CiffPostingsList":
        """Parse a postings-list payload; ``strict`` raises on docid regressions."""
        term, df, cf, docids, tfs, first_dup = parse_postings(payload)
        if strict and first_dup >= 0:
            raise ZeroGap(f"duplicate docid at posting {first_dup} (zero gap)")
        return cls(term.decode("utf-8"), df, cf, docids=docids, tfs=tfs)


@dataclass(frozen=True)
class CiffDocRecord:
    docid: int
    collection_docid: str
    doclength: int

    def encode(self) -> bytes:
        entries = [
            (DOC_RECORD_SCHEMA[1], self.docid),
            (DOC_RECORD_SCHEMA[2], self.collection_docid.encode("utf-8")),
            (DOC_RECORD_SCHEMA[3], self.doclength),
        ]
        return wire.encode_record(RawRecord(entries))

    @classmethod
    def decode(cls, payload: bytes) -> "CiffDocRecord":
        rec = wire.decode_record(payload, DOC_RECORD_SCHEMA)
        return cls(
            docid=rec.get(1, 0),
            collection_docid=rec.get(2, b"").decode("utf-8"),
            doclength=rec.get(3, 0),
        )


@dataclass
class CiffExport:
    """A whole export.  The two sequences may be lists or one-shot generators."""

    header: CiffHeader
    postings_lists: Iterable[CiffPostingsList] = field(default_factory=list)
    doc_records: Iterable[CiffDocRecord] = field(default_factory=list)


class CiffReader:
    """Streaming reader enforcing record order and header-declared counts.

    Usage: construct (reads and checks the header), iterate
    :meth:`postings_lists` to exhaustion, then :meth:`doc_records`.  The
    doc-record iterator verifies clean end-of-stream after the last
    record.  Docids are delivered absolute.  A reader owns its source
    stream and is sequential: share decoded values freely, not the reader.
    """

    def __init__(self, source: BinaryIO, max_record_bytes: int | None = None):
        self._source = source
        self._cap = max_record_bytes
        payload = wire.read_delimited(source, self._cap)
        if payload is None:
            raise CountMismatch("stream is empty, expected a header record")
        self.header = CiffHeader.decode(payload)
        if self.header.version != SUPPORTED_VERSION:
            raise UnsupportedVersion(
                f"export version {self.header.version}, this reader supports {SUPPORTED_VERSION}"
            )
        if not self.header.avdl_consistent():
            logger.warning(
                "header average_doclength %r differs from derived %r by more than %g relative",
                self.header.average_doclength,
                self.header.derived_avdl(),
                AVDL_REL_TOL,
            )
        self._lists_read = 0
        self._docs_read = 0
        self._phase = "postings"

    def postings_lists(self) -> Iterator[CiffPostingsList]:
        if self._phase != "postings":
            raise RuntimeError("postings lists already consumed")
        expected = self.header.num_postings_lists
        while self._lists_read < expected:
            payload = wire.read_delimited(self._source, self._cap)
            if payload is None:
                raise CountMismatch(
                    f"stream ended after {self._lists_read} of {expected} postings lists"
                )
            self._lists_read += 1
            yield CiffPostingsList.decode(payload)
        self._phase = "docs"

    def doc_records(self) -> Iterator[CiffDocRecord]:
        if self._phase == "postings":
            if self.header.num_postings_lists != self._lists_read:
                raise RuntimeError("postings lists must be consumed before doc records")
            self._phase = "docs"
        if self._phase != "docs":
            raise RuntimeError("doc records already consumed")
        expected = self.header.num_docs
        while self._docs_read < expected:
            payload = wire.read_delimited(self._source, self._cap)
            if payload is None:
                raise CountMismatch(f"stream ended after {self._docs_read} of {expected} doc records")
            self._docs_read += 1
            yield CiffDocRecord.decode(payload)
        self._phase = "done"
        if wire.read_delimited(self._source, self._cap) is not None:
            raise CountMismatch("trailing data after the last declared record")


def read_export(source: BinaryIO, max_record_bytes: int | None = None) -> CiffReader:
    """Open a streaming view of an export (header is read eagerly)."""
    return CiffReader(source, max_record_bytes)


def load_export(source: BinaryIO, max_record_bytes: int | None = None) -> CiffExport:
    """Materialize a whole export; intended for small files and tests."""
    reader = read_export(source, max_record_bytes)
    lists = list(reader.postings_lists())
    docs = list(reader.doc_records())
    return CiffExport(reader.header, lists, docs)


def _check_header_invariants(header: CiffHeader) -> None:
    if header.version != SUPPORTED_VERSION:
        raise InvariantViolation(f"header version must be {SUPPORTED_VERSION}, got {header.version}")
    if header.num_postings_lists > header.total_postings_lists:
        raise InvariantViolation("header num_postings_lists exceeds total_postings_lists")
    if header.num_docs > header.total_docs:
        raise InvariantViolation("header num_docs exceeds total_docs")
    if not header.average_doclength >= 0.0:
        raise InvariantViolation("header average_doclength is negative or NaN")
    if header.total_docs > 0 and not header.avdl_consistent():
        raise InvariantViolation(
            "header average_doclength inconsistent with total_terms_in_collection / total_docs"
        )


def write_export(export: CiffExport, sink: BinaryIO) -> None:
    """Write an export canonically; raises InvariantViolation on the first broken invariant.

    Canonical form: terms strictly increasing in UTF-8 byte order, fields
    in ascending number order, default-valued fields omitted, docids
    gap-encoded.
    """
    header = export.header
    _check_header_invariants(header)
    sink_write = wire.write_delimited
    sink_write(header.encode(), sink)

    lists_written = 0
    prev_term_bytes: bytes | None = None
    posting_docids: set[int] = set()
    for pl in export.postings_lists:
        lists_written += 1
        if lists_written > header.num_postings_lists:
            raise InvariantViolation(
                f"more postings lists than header.num_postings_lists={header.num_postings_lists}"
            )
        where = f"postings list {lists_written - 1} (term {pl.term!r})"
        term_bytes = pl.term.encode("utf-8")
        if prev_term_bytes is not None and term_bytes <= prev_term_bytes:
            raise InvariantViolation(f"{where}: terms not strictly increasing in byte order")
        prev_term_bytes = term_bytes
        n = len(pl.docids)
        if pl.df != n:
            raise InvariantViolation(f"{where}: df={pl.df} but {n} postings")
        if int(pl.tfs.sum()) != pl.cf:
            raise InvariantViolation(f"{where}: cf={pl.cf} but tf sum is {int(pl.tfs.sum())}")
        if n:
            if pl.tfs.min() < 1:
                raise InvariantViolation(f"{where}: tf below 1")
            if pl.docids[0] < 0 or (n > 1 and (np.diff(pl.docids) <= 0).any()):
                raise InvariantViolation(f"{where}: docids not strictly increasing")
            posting_docids.update(pl.docids.tolist())
        sink_write(pl.encode(), sink)
    if lists_written != header.num_postings_lists:
        raise InvariantViolation(
            f"{lists_written} postings lists written, header declares {header.num_postings_lists}"
        )

    docs_written = 0
    prev_docid = None
    doclength_sum = 0
    contiguous = True
    for dr in export.doc_records:
        docs_written += 1
        if docs_written > header.num_docs:
            raise InvariantViolation(f"more doc records than header.num_docs={header.num_docs}")
        where = f"doc record {docs_written - 1} (docid {dr.docid})"
        if dr.docid < 0:
            raise InvariantViolation(f"{where}: negative docid")
        if not dr.collection_docid:
            raise InvariantViolation(f"{where}: empty collection_docid")
        if dr.doclength < 0:
            raise InvariantViolation(f"{where}: negative doclength")
        if prev_docid is not None and dr.docid <= prev_docid:
            raise InvariantViolation(f"{where}: doc records not sorted by docid")
        if dr.docid != docs_written - 1:
            contiguous = False
        prev_docid = dr.docid
        doclength_sum += dr.doclength
        posting_docids.discard(dr.docid)
        sink_write(dr.encode(), sink)
    if docs_written != header.num_docs:
        raise InvariantViolation(f"{docs_written} doc records written, header declares {header.num_docs}")
    if posting_docids:
        raise InvariantViolation(
            f"posting docid {min(posting_docids)} has no doc record"
        )
    if header.num_docs == header.total_docs:
        if not contiguous:
            raise InvariantViolation("doc records not contiguous from 0 in a full export")
        if doclength_sum != header.total_terms_in_collection:
            raise InvariantViolation(
                f"doclength sum {doclength_sum} differs from header total_terms_in_collection "
                f"{header.total_terms_in_collection}"
            )


SEVERITY_ERROR = "ERROR"
SEVERITY_WARNING = "WARNING"


@dataclass(frozen=True)
class Violation:
    severity: str
    location: str
    message: str

    def render(self) -> str:
        return f"{self.severity}\t{self.location}\t{self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def add(self, severity: str, location: str, message: str) -> None:
        self.violations.append(Violation(severity, location, message))

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == SEVERITY_ERROR]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == SEVERITY_WARNING]

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        return "\n".join(v.render() for v in self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate_export(source: BinaryIO, max_record_bytes: int | None = None) -> ValidationReport:
    """Check every structural invariant of an export stream.

    Malformed input never raises: every defect is reported as an ERROR or
    WARNING violation.  Memory use is bounded except for a docid-coverage
    set (distinct posting docids).  Duplicate-term detection relies on the
    canonical sorted order, so duplicates in an unsorted export may only be
    reported as ordering warnings.
    """
    report = ValidationReport()
    cap = max_record_bytes

    def read_payload(location: str) -> bytes | None:
        try:
            return wire.read_delimited(source, cap)
        except CodecError as exc:
            report.add(SEVERITY_ERROR, location, f"{type(exc).__name__}: {exc}")
            return None

    payload = read_payload("header")
    if payload is None:
        if not report.violations:
            report.add(SEVERITY_ERROR, "header", "stream is empty, expected a header record")
        return report
    try:
        header = CiffHeader.decode(payload)
    except (CodecError, UnicodeDecodeError) as exc:
        report.add(SEVERITY_ERROR, "header", f"{type(exc).__name__}: {exc}")
        return report

    if header.version != SUPPORTED_VERSION:
        report.add(
            SEVERITY_ERROR,
            "header",
            f"version {header.version} unsupported (expected {SUPPORTED_VERSION})",
        )
    if header.num_postings_lists > header.total_postings_lists:
        if header.total_postings_lists == 0:
            report.add(SEVERITY_WARNING, "header", "total_postings_lists is 0 but num_postings_lists > 0")
        else:
            report.add(SEVERITY_ERROR, "header", "num_postings_lists exceeds total_postings_lists")
    if header.num_docs > header.total_docs:
        if header.total_docs == 0:
            report.add(SEVERITY_WARNING, "header", "total_docs is 0 but num_docs > 0")
        else:
            report.add(SEVERITY_ERROR, "header", "num_docs exceeds total_docs")
    if not header.average_doclength >= 0.0:
        report.add(SEVERITY_ERROR, "header", "average_doclength is negative or NaN")
    elif header.total_docs > 0 and not header.avdl_consistent():
        report.add(
            SEVERITY_WARNING,
            "header",
            f"average_doclength {header.average_doclength!r} differs from derived "
            f"{header.derived_avdl()!r} beyond {AVDL_REL_TOL} relative",
        )

    posting_docids: set[int] = set()
    prev_term: bytes | None = None
    order_warned = False
    truncated = False
    for i in range(header.num_postings_lists):
        location = f"postings_list[{i}]"
        try:
            payload = wire.read_delimited(source, cap)
        except CodecError as exc:
            report.add(SEVERITY_ERROR, location, f"{type(exc).__name__}: {exc}")
            truncated = True
            break
        if payload is None:
            report.add(
                SEVERITY_ERROR,
                "stream",
                f"stream ended after {i} of {header.num_postings_lists} postings lists",
            )
            truncated = True
            break
        try:
            term_bytes, df, cf, docids, tfs, first_dup = parse_postings(payload)
            term = term_bytes.decode("utf-8")
        except (CodecError, InvariantViolation, UnicodeDecodeError) as exc:
            report.add(SEVERITY_ERROR, location, f"{type(exc).__name__}: {exc}")
            continue
        location = f"postings_list[{i}] term={term!r}"
        if prev_term is not None:
            if term_bytes == prev_term:
                report.add(SEVERITY_ERROR, location, "duplicate term")
            elif term_bytes < prev_term and not order_warned:
                report.add(SEVERITY_WARNING, location, "terms not sorted in UTF-8 byte order")
                order_warned = True
        prev_term = term_bytes
        n = len(docids)
        if df != n:
            report.add(SEVERITY_ERROR, location, f"df={df} but {n} postings present")
        tf_sum = int(tfs.sum()) if n else 0
        if cf != tf_sum:
            report.add(SEVERITY_ERROR, location, f"cf={cf} but tf sum is {tf_sum}")
        if n and int(tfs.min()) < 1:
            report.add(SEVERITY_ERROR, location, "posting tf below 1")
        if first_dup >= 0:
            report.add(SEVERITY_ERROR, location, f"docid does not increase at posting {first_dup}")
        if n:
            posting_docids.update(docids.tolist())

    prev_docid = None
    doclength_sum = 0
    contiguous = True
    if not truncated:
        for j in range(header.num_docs):
            location = f"doc_record[{j}]"
            try:
                payload = wire.read_delimited(source, cap)
            except CodecError as exc:
                report.add(SEVERITY_ERROR, location, f"{type(exc).__name__}: {exc}")
                truncated = True
                break
            if payload is None:
                report.add(
                    SEVERITY_ERROR,
                    "stream",
                    f"stream ended after {j} of {header.num_docs} doc records",
                )
                truncated = True
                break
            try:
                dr = CiffDocRecord.decode(payload)
            except (CodecError, UnicodeDecodeError) as exc:
                report.add(SEVERITY_ERROR, location, f"{type(exc).__name__}: {exc}")
                continue
            if not dr.collection_docid:
                report.add(SEVERITY_ERROR, location, "empty collection_docid")
            if dr.doclength < 0:
                report.add(SEVERITY_ERROR, location, "negative doclength")
            if prev_docid is not None and dr.docid <= prev_docid:
                report.add(SEVERITY_ERROR, location, "doc records not sorted by docid")
            if dr.docid != j:
                contiguous = False
            prev_docid = dr.docid
            doclength_sum += max(dr.doclength, 0)
            posting_docids.discard(dr.docid)

    if not truncated:
        try:
            if wire.read_delimited(source, cap) is not None:
                report.add(SEVERITY_ERROR, "stream", "trailing data after the last declared record")
        except CodecError as exc:
            report.add(SEVERITY_ERROR, "stream", f"{type(exc).__name__}: {exc}")

    if posting_docids:
        report.add(
            SEVERITY_ERROR,
            "stream",
            f"{len(posting_docids)} posting docid(s) have no doc record "
            f"(first missing: {min(posting_docids)})",
        )
    if not truncated and header.num_docs == header.total_docs:
        if not contiguous:
            report.add(SEVERITY_ERROR, "stream", "doc records not contiguous from 0 in a full export")
        if doclength_sum != header.total_terms_in_collection:
            report.add(
                SEVERITY_ERROR,
                "stream",
                f"doclength sum {doclength_sum} differs from header "
                f"total_terms_in_collection {header.total_terms_in_collection}",
            )
    return report


@dataclass
class StatsSummary:
    header: CiffHeader
    vocabulary: int = 0
    postings: int = 0
    term_occurrences: int = 0
    doc_records: int = 0
    doclength_sum: int = 0
    min_doclength: int | None = None
    max_doclength: int | None = None
    top_terms_by_df: list[tuple[str, int]] = field(default_factory=list)

    @property
    def doclength_sum_matches_header(self) -> bool:
        return self.doclength_sum == self.header.total_terms_in_collection

    def render(self) -> str:
        lines = [
            f"version\t{self.header.version}",
            f"num_postings_lists\t{self.header.num_postings_lists}",
            f"num_docs\t{self.header.num_docs}",
            f"total_postings_lists\t{self.header.total_postings_lists}",
            f"total_docs\t{self.header.total_docs}",
            f"total_terms_in_collection\t{self.header.total_terms_in_collection}",
            f"average_doclength\t{self.header.average_doclength!r}",
            f"description\t{self.header.description}",
            f"vocabulary\t{self.vocabulary}",
            f"postings\t{self.postings}",
            f"term_occurrences\t{self.term_occurrences}",
            f"doc_records\t{self.doc_records}",
            f"doclength_sum\t{self.doclength_sum}",
            f"doclength_sum_matches_header\t{str(self.doclength_sum_matches_header).lower()}",
            f"min_doclength\t{'' if self.min_doclength is None else self.min_doclength}",
            f"max_doclength\t{'' if self.max_doclength is None else self.max_doclength}",
        ]
        for term, df in self.top_terms_by_df:
            lines.append(f"top_df\t{term}\t{df}")
        return "\n".join(lines)


def compute_stats(source: BinaryIO, top_k: int = 10, max_record_bytes: int | None = None) -> StatsSummary:
    """Single-pass summary of an export; codec errors propagate."""
    reader = read_export(source, max_record_bytes)
    summary = StatsSummary(header=reader.header)
    heap: list[tuple[int, str]] = []  # (df, term) min-heap of the current top df
    for pl in reader.postings_lists():
        summary.vocabulary += 1
        summary.postings += len(pl)
        summary.term_occurrences += pl.cf
        entry = (pl.df, pl.term)
        if len(heap) < top_k:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)
    for dr in reader.doc_records():
        summary.doc_records += 1
        summary.doclength_sum += dr.doclength
        if summary.min_doclength is None or dr.doclength < summary.min_doclength:
            summary.min_doclength = dr.doclength
        if summary.max_doclength is None or dr.doclength > summary.max_doclength:
            summary.max_doclength = dr.doclength
    summary.top_terms_by_df = [
        (term, df) for df, term in sorted(heap, key=lambda e: (-e[0], e[1]))
    ]
    return summary
