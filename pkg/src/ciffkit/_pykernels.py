"""Pure-Python implementations of the hot inner loops.

Three kernels dominate runtime on large exports: parsing a postings-list
record payload, serializing one back, and the document-at-a-time scoring
loop.  This module is the fallback twin of the compiled ``_ckernels``
extension; both expose the same functions with identical byte-level and
bit-level behaviour, and the test suite asserts that equivalence.

Postings-list payload schema: term = field 1 (length-delimited), df = 2
(varint), cf = 3 (varint), postings = 4 (repeated length-delimited).  Each
posting submessage: docid gap = field 1 (varint), tf = field 2 (varint).
"""

from __future__ import annotations

import heapq

import numpy as np

from .errors import (
    InvariantViolation,
    NegativeValue,
    NotIncreasing,
    OverlongVarint,
    TruncatedRecord,
    UnknownWireKind,
)

# Values stored into int64 arrays are capped well below 2**63 so that the
# compiled twin cannot overflow where Python integers would not.
_VALUE_CAP = 1 << 62

_U64_MAX = (1 << 64) - 1


def _varint(data: bytes, pos: int, end: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if shift >= 70:
            raise OverlongVarint("varint exceeds 10 bytes")
        if pos >= end:
            raise TruncatedRecord("input ends inside varint")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            if result > _U64_MAX:
                raise OverlongVarint("varint overflows 64 bits")
            return result, pos
        shift += 7


def _parse_posting(data: bytes, pos: int, end: int) -> tuple[int, int]:
    gap = 0
    tf = 0
    while pos < end:
        tag, pos = _varint(data, pos, end)
        number = tag >> 3
        kind = tag & 7
        if kind in (3, 4) or kind > 5:
            raise UnknownWireKind(f"wire kind {kind} at posting field {number}")
        if kind == 0:
            value, pos = _varint(data, pos, end)
            if number == 1:
                gap = value
            elif number == 2:
                tf = value
        elif kind == 1:
            if pos + 8 > end:
                raise TruncatedRecord("input ends inside fixed64 posting field")
            pos += 8
        elif kind == 5:
            if pos + 4 > end:
                raise TruncatedRecord("input ends inside fixed32 posting field")
            pos += 4
        else:
            length, pos = _varint(data, pos, end)
            if length > end - pos:
                raise TruncatedRecord("input ends inside length-delimited posting field")
            pos += length
    return gap, tf


def parse_postings(payload: bytes):
    """Parse a postings-list record payload.

    Returns ``(term_bytes, df, cf, docids, tfs, first_dup)`` where docids
    are absolute (prefix sums over the stored gaps, both int64 arrays) and
    ``first_dup`` is the index of the first posting whose docid does not
    increase (-1 if the sequence is strictly increasing).
    """
    size = len(payload)
    pos = 0
    term = b""
    df = 0
    cf = 0
    gaps: list[int] = []
    tfs: list[int] = []
    while pos < size:
        tag, pos = _varint(payload, pos, size)
        number = tag >> 3
        kind = tag & 7
        if kind in (3, 4) or kind > 5:
            raise UnknownWireKind(f"wire kind {kind} at field {number}")
        if kind == 0:
            value, pos = _varint(payload, pos, size)
            if number == 2:
                df = value
            elif number == 3:
                cf = value
        elif kind == 1:
            if pos + 8 > size:
                raise TruncatedRecord("input ends inside fixed64 field")
            pos += 8
        elif kind == 5:
            if pos + 4 > size:
                raise TruncatedRecord("input ends inside fixed32 field")
            pos += 4
        else:
            length, pos = _varint(payload, pos, size)
            if length > size - pos:
                raise TruncatedRecord("input ends inside length-delimited field")
            if number == 1:
                term = payload[pos : pos + length]
            elif number == 4:
                gap, tf = _parse_posting(payload, pos, pos + length)
                gaps.append(gap)
                tfs.append(tf)
            pos += length

    count = len(gaps)
    docids_arr = np.empty(count, dtype=np.int64)
    tfs_arr = np.empty(count, dtype=np.int64)
    running = 0
    first_dup = -1
    for i in range(count):
        gap = gaps[i]
        if gap > _VALUE_CAP:
            raise InvariantViolation("posting docid gap exceeds supported range")
        if i == 0:
            running = gap
        else:
            if gap == 0 and first_dup < 0:
                first_dup = i
            running += gap
        if running > _VALUE_CAP:
            raise InvariantViolation("posting docid exceeds supported range")
        tf = tfs[i]
        if tf > _VALUE_CAP:
            raise InvariantViolation("posting tf exceeds supported range")
        docids_arr[i] = running
        tfs_arr[i] = tf
    return term, df, cf, docids_arr, tfs_arr, first_dup


def _varint_bytes(value: int) -> bytes:
    out = bytearray()
    while True:
        low = value & 0x7F
        value >>= 7
        if value:
            out.append(low | 0x80)
        else:
            out.append(low)
            return bytes(out)


def build_postings(docids, tfs) -> bytes:
    """Serialize aligned docid/tf arrays as canonical repeated posting fields.

    Docids are absolute and must be strictly increasing and non-negative;
    the wire form stores gaps.  Zero-valued fields are omitted, matching
    the canonical writer.
    """
    docids = np.ascontiguousarray(docids, dtype=np.int64)
    tfs = np.ascontiguousarray(tfs, dtype=np.int64)
    if docids.shape[0] != tfs.shape[0]:
        raise ValueError("docids and tfs must have equal length")
    out = bytearray()
    prev = 0
    dlist = docids.tolist()
    tlist = tfs.tolist()
    for i in range(len(dlist)):
        d = dlist[i]
        t = tlist[i]
        if d < 0:
            raise NotIncreasing(f"posting {i}: negative docid {d}")
        if i > 0 and d <= prev:
            raise NotIncreasing(f"posting {i}: docid {d} does not increase past {prev}")
        if t < 0:
            raise NegativeValue(f"posting {i}: negative tf {t}")
        gap = d if i == 0 else d - prev
        prev = d
        inner = bytearray()
        if gap:
            inner.append(0x08)
            inner += _varint_bytes(gap)
        if t:
            inner.append(0x10)
            inner += _varint_bytes(t)
        out.append(0x22)
        out += _varint_bytes(len(inner))
        out += inner
    return bytes(out)


def daat_topk(docids, tfs, offsets, lengths, idfs, doclens, k1, b, avdl, atire, k):
    """Exhaustive document-at-a-time traversal returning the top-k rows.

    ``docids``/``tfs`` are the concatenated postings arrays; term ``t`` of
    the query occupies ``[offsets[t], offsets[t] + lengths[t])`` and has
    precomputed idf ``idfs[t]``.  Terms must arrive in ascending term byte
    order: per-document contributions are added in cursor order, which
    pins the floating-point result.  Returns ``(rows, scores)`` ordered by
    (score desc, row asc), at most ``k`` entries.
    """
    nterms = len(offsets)
    if k <= 0 or nterms == 0:
        return [], []
    term_docs = []
    term_tfs = []
    for t in range(nterms):
        o = int(offsets[t])
        ln = int(lengths[t])
        term_docs.append(docids[o : o + ln].tolist())
        term_tfs.append(tfs[o : o + ln].tolist())
    dls = doclens.tolist()
    idf = [float(x) for x in idfs]
    cursors = [0] * nterms
    ends = [len(td) for td in term_docs]
    one_minus_b = 1.0 - b
    k1p1 = k1 + 1.0
    heap: list[tuple[float, int]] = []
    while True:
        cur = -1
        for t in range(nterms):
            c = cursors[t]
            if c < ends[t]:
                d = term_docs[t][c]
                if cur < 0 or d < cur:
                    cur = d
        if cur < 0:
            break
        dlen = float(dls[cur])
        norm = k1 * (one_minus_b + b * (dlen / avdl))
        score = 0.0
        for t in range(nterms):
            c = cursors[t]
            if c < ends[t] and term_docs[t][c] == cur:
                tf = float(term_tfs[t][c])
                if atire:
                    score += idf[t] * (tf * k1p1) / (tf + norm)
                else:
                    score += idf[t] * tf / (tf + norm)
                cursors[t] = c + 1
        entry = (score, -cur)
        if len(heap) < k:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)
    ordered = sorted(heap, key=lambda e: (-e[0], -e[1]))
    return [-e[1] for e in ordered], [e[0] for e in ordered]
