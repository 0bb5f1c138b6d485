"""Low-level wire codec: varints, tagged fields, delimited records, gzip sniffing.

The on-disk format is a sequence of length-delimited records.  Each record
is a set of tagged fields; a tag is ``(field_number << 3) | wire_kind`` and
the wire kinds in use are varint (0), 8-byte fixed (1) and length-delimited
(2).  Writers here always produce the canonical form: fields in ascending
field-number order with default-valued fields omitted.  Readers are
lenient: any field order is accepted, unknown fields are skipped, and the
last occurrence of a non-repeated field wins.
"""

from __future__ import annotations

import enum
import gzip
import os
import zlib
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Mapping

from .errors import (
    CorruptGzip,
    LengthOverflow,
    NegativeValue,
    OverlongVarint,
    TruncatedRecord,
    TruncatedStream,
    TruncatedVarint,
    UnknownWireKind,
)

MAX_FIELD_NUMBER = 536870911  # 2^29 - 1
DEFAULT_MAX_RECORD_BYTES = 1 << 30
MAX_RECORD_BYTES_ENV = "CIFF_MAX_RECORD_BYTES"

GZIP_MAGIC = b"\x1f\x8b"

_U64_MAX = (1 << 64) - 1


class WireKind(enum.IntEnum):
    VARINT = 0
    FIXED64 = 1
    LENGTH_DELIMITED = 2


# Wire-kind code 5 (4-byte fixed) is skippable on read but never written;
# codes 3 and 4 (group delimiters) are rejected outright.
_SKIPPABLE_FIXED32 = 5


@dataclass(frozen=True)
class FieldDescriptor:
    """One field of a record schema."""

    number: int
    kind: WireKind
    repeated: bool = False

    def __post_init__(self):
        if not 1 <= self.number <= MAX_FIELD_NUMBER:
            raise ValueError(f"field number {self.number} outside [1, {MAX_FIELD_NUMBER}]")
        if self.kind not in (WireKind.VARINT, WireKind.FIXED64, WireKind.LENGTH_DELIMITED):
            raise ValueError(f"unsupported wire kind {self.kind!r}")

    @property
    def tag(self) -> int:
        return (self.number << 3) | int(self.kind)


class RawRecord:
    """Schema-level view of a record: ``(FieldDescriptor, value)`` pairs.

    Values are ints for VARINT fields and bytes for FIXED64 (8 raw bytes)
    and LENGTH_DELIMITED fields.  Fields absent from the pair list take
    the type defaults (0 / empty) via :meth:`get`.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[tuple[FieldDescriptor, int | bytes]] = ()):
        self.entries = list(entries)

    def get(self, number: int, default=None):
        value = default
        for fd, v in self.entries:
            if fd.number == number:
                value = v
        return value

    def get_all(self, number: int) -> list:
        return [v for fd, v in self.entries if fd.number == number]

    def __eq__(self, other):
        return isinstance(other, RawRecord) and self.entries == other.entries

    def __repr__(self):
        return f"RawRecord({self.entries!r})"


def encode_varint(value: int) -> bytes:
    """Encode an unsigned integer as a base-128 little-endian varint."""
    if value < 0:
        raise NegativeValue(f"cannot varint-encode negative value {value}")
    if value > _U64_MAX:
        raise ValueError(f"value {value} exceeds unsigned 64-bit range")
    out = bytearray()
    while True:
        low = value & 0x7F
        value >>= 7
        if value:
            out.append(low | 0x80)
        else:
            out.append(low)
            return bytes(out)


def decode_varint(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Decode a varint at ``offset``; returns ``(value, bytes_consumed)``."""
    result = 0
    shift = 0
    pos = offset
    n = len(data)
    while True:
        if shift >= 70:  # an 11th byte would be needed
            raise OverlongVarint(f"varint at offset {offset} exceeds 10 bytes")
        if pos >= n:
            raise TruncatedVarint(f"input ends inside varint at offset {offset}")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            if result > _U64_MAX:
                raise OverlongVarint(f"varint at offset {offset} overflows 64 bits")
            return result, pos - offset
        shift += 7


def encode_record(record: RawRecord) -> bytes:
    """Serialize a record canonically.

    Requires ascending field-number order (equal numbers only for repeated
    fields); entries holding a default value (0, empty bytes) are omitted.
    """
    out = bytearray()
    prev = None
    for fd, value in record.entries:
        if prev is not None and (fd.number < prev.number or (fd.number == prev.number and not fd.repeated)):
            raise ValueError(f"fields out of canonical order at field {fd.number}")
        prev = fd
        if fd.kind == WireKind.VARINT:
            if not isinstance(value, int) or isinstance(value, bool):
                raise TypeError(f"field {fd.number}: varint value must be int, got {type(value).__name__}")
            if value < 0:
                raise NegativeValue(f"field {fd.number}: negative value {value}")
            if value == 0:
                continue
            out += encode_varint(fd.tag)
            out += encode_varint(value)
        elif fd.kind == WireKind.FIXED64:
            if not isinstance(value, (bytes, bytearray)) or len(value) != 8:
                raise TypeError(f"field {fd.number}: fixed64 value must be 8 bytes")
            if value == b"\x00" * 8:
                continue
            out += encode_varint(fd.tag)
            out += value
        else:  # LENGTH_DELIMITED
            if not isinstance(value, (bytes, bytearray)):
                raise TypeError(f"field {fd.number}: length-delimited value must be bytes")
            if len(value) == 0:
                continue
            out += encode_varint(fd.tag)
            out += encode_varint(len(value))
            out += value
    return bytes(out)


def _record_varint(data: bytes, pos: int) -> tuple[int, int]:
    # Varint truncation inside a record surfaces as TruncatedRecord.
    try:
        value, used = decode_varint(data, pos)
    except TruncatedVarint as exc:
        raise TruncatedRecord(str(exc)) from exc
    return value, pos + used


def decode_record(data: bytes, schema: Mapping[int, FieldDescriptor]) -> RawRecord:
    """Parse a record payload against ``schema``.

    Unknown field numbers and known fields arriving with a mismatched wire
    kind are skipped per their wire-kind code.  Non-repeated fields keep
    their last occurrence; repeated fields keep all occurrences in order.
    Total over arbitrary input: returns a record or raises a CodecError.
    """
    n = len(data)
    pos = 0
    single: dict[int, int | bytes] = {}
    repeated: dict[int, list] = {}
    while pos < n:
        tag, pos = _record_varint(data, pos)
        number = tag >> 3
        kind_code = tag & 7
        if kind_code in (3, 4) or kind_code > 5:
            raise UnknownWireKind(f"wire kind {kind_code} at field {number}")
        fd = schema.get(number)
        known = fd is not None and int(fd.kind) == kind_code
        if kind_code == int(WireKind.VARINT):
            value, pos = _record_varint(data, pos)
        elif kind_code == int(WireKind.FIXED64):
            if pos + 8 > n:
                raise TruncatedRecord(f"input ends inside fixed64 field {number}")
            value = data[pos : pos + 8]
            pos += 8
        elif kind_code == _SKIPPABLE_FIXED32:
            if pos + 4 > n:
                raise TruncatedRecord(f"input ends inside fixed32 field {number}")
            pos += 4
            continue
        else:  # LENGTH_DELIMITED
            length, pos = _record_varint(data, pos)
            if pos + length > n:
                raise TruncatedRecord(f"input ends inside length-delimited field {number}")
            value = data[pos : pos + length]
            pos += length
        if not known:
            continue
        if fd.repeated:
            repeated.setdefault(number, []).append(value)
        else:
            single[number] = value
    entries = []
    for number in sorted(single.keys() | repeated.keys()):
        fd = schema[number]
        if fd.repeated:
            entries.extend((fd, v) for v in repeated.get(number, ()))
        else:
            entries.append((fd, single[number]))
    return RawRecord(entries)


def max_record_bytes(override: int | None = None) -> int:
    """Resolve the per-record length cap (argument, else env var, else 1 GiB)."""
    if override is not None:
        return override
    env = os.environ.get(MAX_RECORD_BYTES_ENV)
    if env:
        return int(env)
    return DEFAULT_MAX_RECORD_BYTES


def write_delimited(payload: bytes, sink: BinaryIO) -> None:
    """Write a record as a varint length prefix followed by its bytes."""
    sink.write(encode_varint(len(payload)))
    sink.write(payload)


def read_delimited(source: BinaryIO, cap: int | None = None) -> bytes | None:
    """Read one delimited record; returns None on clean end-of-stream."""
    cap = max_record_bytes(cap)
    first = source.read(1)
    if first == b"":
        return None
    length = 0
    shift = 0
    byte = first[0]
    while True:
        if shift >= 70:
            raise OverlongVarint("record length prefix exceeds 10 bytes")
        length |= (byte & 0x7F) << shift
        if not byte & 0x80:
            break
        shift += 7
        nxt = source.read(1)
        if nxt == b"":
            raise TruncatedStream("stream ends inside a record length prefix")
        byte = nxt[0]
    if length > _U64_MAX:
        raise OverlongVarint("record length prefix overflows 64 bits")
    if length > cap:
        raise LengthOverflow(f"record of {length} bytes exceeds cap of {cap}")
    payload = bytearray()
    while len(payload) < length:
        chunk = source.read(length - len(payload))
        if not chunk:
            raise TruncatedStream(f"stream ends inside a record: got {len(payload)} of {length} bytes")
        payload += chunk
    return bytes(payload)


class _GzipStream:
    """Read-only wrapper translating decompression failures to CorruptGzip."""

    def __init__(self, raw: BinaryIO):
        self._raw = raw
        self._gz = gzip.GzipFile(fileobj=raw)

    def read(self, size: int = -1) -> bytes:
        try:
            return self._gz.read(size)
        except (EOFError, zlib.error, gzip.BadGzipFile) as exc:
            raise CorruptGzip(str(exc)) from exc

    def close(self) -> None:
        self._gz.close()
        self._raw.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def open_export(path) -> BinaryIO:
    """Open an export file, transparently decompressing gzip content.

    The decision is content-based: a file starting with the two gzip magic
    bytes is decompressed regardless of its name.
    """
    f = open(path, "rb")
    try:
        magic = f.read(2)
        f.seek(0)
    except Exception:
        f.close()
        raise
    if magic == GZIP_MAGIC:
        return _GzipStream(f)
    return f
