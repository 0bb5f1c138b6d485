# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ._pykernels: postings codec and DaaT scoring in C.

Behaviour must stay byte-for-byte and bit-for-bit identical to the pure
Python module; the test suite compares the two backends directly.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.limits cimport LLONG_MAX
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy

import numpy as np

from .errors import (
    InvariantViolation,
    NegativeValue,
    NotIncreasing,
    OverlongVarint,
    TruncatedRecord,
    UnknownWireKind,
)

cdef unsigned long long VALUE_CAP = (<unsigned long long> 1) << 62


cdef int _read_varint(const unsigned char* data, Py_ssize_t end,
                      Py_ssize_t* pos, unsigned long long* out) except -1:
    cdef unsigned long long result = 0
    cdef int shift = 0
    cdef unsigned int byte
    cdef Py_ssize_t p = pos[0]
    while True:
        if p >= end:
            raise TruncatedRecord("input ends inside varint")
        byte = data[p]
        p += 1
        if shift == 63:
            if (byte & 0x7F) > 1:
                raise OverlongVarint("varint overflows 64 bits")
            result |= (<unsigned long long> (byte & 1)) << 63
            if byte & 0x80:
                raise OverlongVarint("varint exceeds 10 bytes")
            pos[0] = p
            out[0] = result
            return 0
        result |= (<unsigned long long> (byte & 0x7F)) << shift
        if not (byte & 0x80):
            pos[0] = p
            out[0] = result
            return 0
        shift += 7


cdef int _parse_posting(const unsigned char* data, Py_ssize_t pos, Py_ssize_t end,
                        unsigned long long* gap, unsigned long long* tf) except -1:
    cdef unsigned long long tag, value, length
    cdef unsigned long long number
    cdef int kind
    gap[0] = 0
    tf[0] = 0
    while pos < end:
        _read_varint(data, end, &pos, &tag)
        number = tag >> 3
        kind = <int> (tag & 7)
        if kind == 3 or kind == 4 or kind > 5:
            raise UnknownWireKind(f"wire kind {kind} at posting field {number}")
        if kind == 0:
            _read_varint(data, end, &pos, &value)
            if number == 1:
                gap[0] = value
            elif number == 2:
                tf[0] = value
        elif kind == 1:
            if pos + 8 > end:
                raise TruncatedRecord("input ends inside fixed64 posting field")
            pos += 8
        elif kind == 5:
            if pos + 4 > end:
                raise TruncatedRecord("input ends inside fixed32 posting field")
            pos += 4
        else:
            _read_varint(data, end, &pos, &length)
            if length > <unsigned long long> (end - pos):
                raise TruncatedRecord("input ends inside length-delimited posting field")
            pos += <Py_ssize_t> length
    return 0


def parse_postings(bytes payload):
    """See ._pykernels.parse_postings."""
    cdef const unsigned char* data = payload
    cdef Py_ssize_t size = len(payload)
    cdef Py_ssize_t pos = 0
    cdef unsigned long long tag, value, length
    cdef unsigned long long number
    cdef int kind
    cdef Py_ssize_t term_start = -1
    cdef Py_ssize_t term_len = 0
    cdef unsigned long long df = 0, cf = 0
    cdef Py_ssize_t count = 0, cap = 0, i
    cdef unsigned long long* gaps = NULL
    cdef unsigned long long* ptfs = NULL
    cdef unsigned long long* grown
    cdef unsigned long long gap, running = 0
    cdef Py_ssize_t first_dup = -1
    cdef long long[::1] dview
    cdef long long[::1] tview
    try:
        while pos < size:
            _read_varint(data, size, &pos, &tag)
            number = tag >> 3
            kind = <int> (tag & 7)
            if kind == 3 or kind == 4 or kind > 5:
                raise UnknownWireKind(f"wire kind {kind} at field {number}")
            if kind == 0:
                _read_varint(data, size, &pos, &value)
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
                _read_varint(data, size, &pos, &length)
                if length > <unsigned long long> (size - pos):
                    raise TruncatedRecord("input ends inside length-delimited field")
                if number == 1:
                    term_start = pos
                    term_len = <Py_ssize_t> length
                elif number == 4:
                    if count == cap:
                        cap = 16 if cap == 0 else cap * 2
                        grown = <unsigned long long*> realloc(gaps, cap * sizeof(unsigned long long))
                        if grown == NULL:
                            raise MemoryError()
                        gaps = grown
                        grown = <unsigned long long*> realloc(ptfs, cap * sizeof(unsigned long long))
                        if grown == NULL:
                            raise MemoryError()
                        ptfs = grown
                    _parse_posting(data, pos, pos + <Py_ssize_t> length,
                                   &gaps[count], &ptfs[count])
                    count += 1
                pos += <Py_ssize_t> length

        docids_arr = np.empty(count, dtype=np.int64)
        tfs_arr = np.empty(count, dtype=np.int64)
        dview = docids_arr
        tview = tfs_arr
        for i in range(count):
            gap = gaps[i]
            if gap > VALUE_CAP:
                raise InvariantViolation("posting docid gap exceeds supported range")
            if i == 0:
                running = gap
            else:
                if gap == 0 and first_dup < 0:
                    first_dup = i
                running += gap
            if running > VALUE_CAP:
                raise InvariantViolation("posting docid exceeds supported range")
            if ptfs[i] > VALUE_CAP:
                raise InvariantViolation("posting tf exceeds supported range")
            dview[i] = <long long> running
            tview[i] = <long long> ptfs[i]
        if term_start >= 0:
            term = payload[term_start:term_start + term_len]
        else:
            term = b""
        return term, int(df), int(cf), docids_arr, tfs_arr, first_dup
    finally:
        free(gaps)
        free(ptfs)


cdef inline Py_ssize_t _write_varint(unsigned char* buf, Py_ssize_t pos,
                                     unsigned long long value) nogil:
    while value >= 0x80:
        buf[pos] = <unsigned char> ((value & 0x7F) | 0x80)
        value >>= 7
        pos += 1
    buf[pos] = <unsigned char> value
    return pos + 1


def build_postings(docids, tfs):
    """See ._pykernels.build_postings."""
    cdef long long[::1] d = np.ascontiguousarray(docids, dtype=np.int64)
    cdef long long[::1] t = np.ascontiguousarray(tfs, dtype=np.int64)
    cdef Py_ssize_t n = d.shape[0]
    if t.shape[0] != n:
        raise ValueError("docids and tfs must have equal length")
    cdef unsigned char* buf = NULL
    cdef unsigned char inner[22]
    cdef Py_ssize_t pos = 0, ipos, i
    cdef long long prev = 0, docid, tf
    cdef unsigned long long gap
    if n == 0:
        return b""
    buf = <unsigned char*> malloc(n * 24)
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            docid = d[i]
            tf = t[i]
            if docid < 0:
                raise NotIncreasing(f"posting {i}: negative docid {docid}")
            if i > 0 and docid <= prev:
                raise NotIncreasing(f"posting {i}: docid {docid} does not increase past {prev}")
            if tf < 0:
                raise NegativeValue(f"posting {i}: negative tf {tf}")
            gap = <unsigned long long> (docid if i == 0 else docid - prev)
            prev = docid
            ipos = 0
            if gap:
                inner[ipos] = 0x08
                ipos = _write_varint(inner, ipos + 1, gap)
            if tf:
                inner[ipos] = 0x10
                ipos = _write_varint(inner, ipos + 1, <unsigned long long> tf)
            buf[pos] = 0x22
            pos = _write_varint(buf, pos + 1, <unsigned long long> ipos)
            memcpy(buf + pos, inner, ipos)
            pos += ipos
        return PyBytes_FromStringAndSize(<char*> buf, pos)
    finally:
        free(buf)


cdef inline bint _worse(double s1, long long r1, double s2, long long r2) nogil:
    # heap order: entry 1 ranks below entry 2
    return s1 < s2 or (s1 == s2 and r1 > r2)


cdef void _sift_up(double* hs, long long* hr, Py_ssize_t i) nogil:
    cdef Py_ssize_t parent
    cdef double s
    cdef long long r
    while i > 0:
        parent = (i - 1) >> 1
        if _worse(hs[i], hr[i], hs[parent], hr[parent]):
            s = hs[i]; hs[i] = hs[parent]; hs[parent] = s
            r = hr[i]; hr[i] = hr[parent]; hr[parent] = r
            i = parent
        else:
            return


cdef void _sift_down(double* hs, long long* hr, Py_ssize_t n, Py_ssize_t i) nogil:
    cdef Py_ssize_t left, right, smallest
    cdef double s
    cdef long long r
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < n and _worse(hs[left], hr[left], hs[smallest], hr[smallest]):
            smallest = left
        if right < n and _worse(hs[right], hr[right], hs[smallest], hr[smallest]):
            smallest = right
        if smallest == i:
            return
        s = hs[i]; hs[i] = hs[smallest]; hs[smallest] = s
        r = hr[i]; hr[i] = hr[smallest]; hr[smallest] = r
        i = smallest


def daat_topk(docids, tfs, offsets, lengths, idfs, doclens,
              double k1, double b, double avdl, bint atire, Py_ssize_t k):
    """See ._pykernels.daat_topk."""
    cdef long long[::1] dview = np.ascontiguousarray(docids, dtype=np.int64)
    cdef long long[::1] tview = np.ascontiguousarray(tfs, dtype=np.int64)
    cdef long long[::1] oview = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef long long[::1] lview = np.ascontiguousarray(lengths, dtype=np.int64)
    cdef double[::1] iview = np.ascontiguousarray(idfs, dtype=np.float64)
    cdef long long[::1] dlview = np.ascontiguousarray(doclens, dtype=np.int64)
    cdef Py_ssize_t nterms = oview.shape[0]
    if k <= 0 or nterms == 0:
        return [], []
    cdef long long* cursors = <long long*> malloc(nterms * sizeof(long long))
    cdef long long* ends = <long long*> malloc(nterms * sizeof(long long))
    cdef double* hs = <double*> malloc(k * sizeof(double))
    cdef long long* hr = <long long*> malloc(k * sizeof(long long))
    if cursors == NULL or ends == NULL or hs == NULL or hr == NULL:
        free(cursors); free(ends); free(hs); free(hr)
        raise MemoryError()
    cdef Py_ssize_t hcount = 0, tpos, i
    cdef long long cur, c
    cdef double one_minus_b = 1.0 - b
    cdef double k1p1 = k1 + 1.0
    cdef double norm, score, dlen, tfd
    try:
        for tpos in range(nterms):
            cursors[tpos] = oview[tpos]
            ends[tpos] = oview[tpos] + lview[tpos]
        with nogil:
            while True:
                cur = LLONG_MAX
                for tpos in range(nterms):
                    c = cursors[tpos]
                    if c < ends[tpos] and dview[c] < cur:
                        cur = dview[c]
                if cur == LLONG_MAX:
                    break
                dlen = <double> dlview[cur]
                norm = k1 * (one_minus_b + b * (dlen / avdl))
                score = 0.0
                for tpos in range(nterms):
                    c = cursors[tpos]
                    if c < ends[tpos] and dview[c] == cur:
                        tfd = <double> tview[c]
                        if atire:
                            score += iview[tpos] * (tfd * k1p1) / (tfd + norm)
                        else:
                            score += iview[tpos] * tfd / (tfd + norm)
                        cursors[tpos] = c + 1
                if hcount < k:
                    hs[hcount] = score
                    hr[hcount] = cur
                    _sift_up(hs, hr, hcount)
                    hcount += 1
                elif _worse(hs[0], hr[0], score, cur):
                    hs[0] = score
                    hr[0] = cur
                    _sift_down(hs, hr, hcount, 0)
        pairs = [(hs[i], hr[i]) for i in range(hcount)]
        pairs.sort(key=lambda e: (-e[0], e[1]))
        return [row for _, row in pairs], [s for s, _ in pairs]
    finally:
        free(cursors)
        free(ends)
        free(hs)
        free(hr)
