import gzip
import io
import pathlib
import random
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ciffkit import wire
from ciffkit.errors import (
    CountMismatch,
    InvariantViolation,
    NotIncreasing,
    TruncatedStream,
    UnsupportedVersion,
    ZeroGap,
)
from ciffkit.model import (
    CiffDocRecord,
    CiffExport,
    CiffHeader,
    CiffPosting,
    CiffPostingsList,
    compute_stats,
    gap_decode,
    gap_encode,
    load_export,
    read_export,
    validate_export,
    write_export,
)

import reference
from conftest import T1_DESCRIPTION

DATA_DIR = pathlib.Path(__file__).parent / "data"

# T1 ground truth, hand-counted from the corpus in conftest.
T1_LISTS = [
    ("apple", 2, 3, [(0, 2), (2, 1)]),
    ("banana", 2, 3, [(0, 1), (1, 2)]),
    ("cherry", 3, 3, [(0, 1), (1, 1), (2, 1)]),
    ("date", 1, 1, [(1, 1)]),
    ("fig", 1, 1, [(1, 1)]),
    ("grape", 1, 1, [(1, 1)]),
]
T1_DOC_RECORDS = [(0, "d0", 4), (1, "d1", 6), (2, "d2", 2)]


def ref_t1_bytes(
    lists=None,
    docs=None,
    version=1,
    num_postings_lists=None,
    num_docs=None,
    total_terms=12,
    avdl=4.0,
    truncate_at=None,
):
    """Build a T1 export with the independent reference encoder."""
    lists = T1_LISTS if lists is None else lists
    docs = T1_DOC_RECORDS if docs is None else docs
    header = reference.ref_header(
        version=version,
        num_postings_lists=len(lists) if num_postings_lists is None else num_postings_lists,
        num_docs=len(docs) if num_docs is None else num_docs,
        total_postings_lists=len(lists),
        total_docs=len(docs),
        total_terms=total_terms,
        avdl=avdl,
        description=T1_DESCRIPTION,
    )
    data = reference.ref_export_bytes(
        header,
        [reference.ref_postings_list(t, df, cf, p) for t, df, cf, p in lists],
        [reference.ref_doc_record(*d) for d in docs],
    )
    return data if truncate_at is None else data[:truncate_at]


class TestGapTransform:
    def test_basic(self):
        assert gap_encode([3, 7, 12]) == [3, 4, 5]
        assert gap_decode([3, 4, 5]) == [3, 7, 12]

    def test_zero_start(self):
        assert gap_encode([0]) == [0]
        assert gap_decode([0]) == [0]

    def test_adjacent(self):
        assert gap_encode([5, 6]) == [5, 1]

    def test_empty(self):
        assert gap_encode([]) == []
        assert gap_decode([]) == []

    def test_not_increasing(self):
        with pytest.raises(NotIncreasing):
            gap_encode([3, 3])
        with pytest.raises(NotIncreasing):
            gap_encode([-1, 2])

    def test_zero_gap(self):
        with pytest.raises(ZeroGap):
            gap_decode([3, 0])

    @given(st.lists(st.integers(min_value=0, max_value=2**40), min_size=0, max_size=50, unique=True))
    def test_inverse_property(self, docids):
        docids = sorted(docids)
        assert gap_decode(gap_encode(docids)) == docids

    @given(
        st.lists(st.integers(min_value=1, max_value=2**30), min_size=1, max_size=50),
        st.integers(min_value=0, max_value=10),
    )
    def test_inverse_other_direction(self, gaps, first):
        gaps = [first] + gaps
        assert gap_encode(gap_decode(gaps)) == gaps


class TestHeaderCodec:
    def test_round_trip(self):
        header = CiffHeader(1, 6, 3, 6, 3, 12, 4.0, "hello")
        assert CiffHeader.decode(header.encode()) == header

    def test_empty_payload_gives_defaults(self):
        header = CiffHeader.decode(b"")
        assert header == CiffHeader(version=0)

    def test_avdl_double_bits_preserved(self):
        value = 40.00000000000001
        header = CiffHeader(1, 0, 0, 0, 0, 0, value, "")
        decoded = CiffHeader.decode(header.encode())
        assert struct.pack("<d", decoded.average_doclength) == struct.pack("<d", value)

    def test_avdl_consistency(self):
        assert CiffHeader(1, 0, 3, 0, 3, 12, 4.0, "").avdl_consistent()
        assert not CiffHeader(1, 0, 3, 0, 3, 12, 4.1, "").avdl_consistent()


class TestPostingsListCodec:
    def test_round_trip(self):
        pl = CiffPostingsList("apple", 2, 3, [CiffPosting(0, 2), CiffPosting(2, 1)])
        decoded = CiffPostingsList.decode(pl.encode())
        assert decoded == pl
        assert decoded.postings == [CiffPosting(0, 2), CiffPosting(2, 1)]

    def test_matches_reference_encoder(self):
        pl = CiffPostingsList("apple", 2, 3, [CiffPosting(0, 2), CiffPosting(2, 1)])
        assert pl.encode() == reference.ref_postings_list("apple", 2, 3, [(0, 2), (2, 1)])

    def test_duplicate_docid_rejected_when_strict(self):
        payload = reference.ref_postings_list("x", 2, 2, [(5, 1), (5, 1)])
        with pytest.raises(ZeroGap):
            CiffPostingsList.decode(payload)
        lenient = CiffPostingsList.decode(payload, strict=False)
        assert lenient.docids.tolist() == [5, 5]


class TestExportRoundTrip:
    def test_writer_matches_reference_encoder(self, t1_export_bytes):
        assert t1_export_bytes == ref_t1_bytes()

    def test_golden_fixture(self, t1_export_bytes):
        golden = (DATA_DIR / "t1.ciff").read_bytes()
        assert t1_export_bytes == golden

    def test_structural_round_trip(self, t1_export_bytes):
        export = load_export(io.BytesIO(t1_export_bytes))
        assert export.header.num_postings_lists == 6
        assert export.header.num_docs == 3
        assert export.header.total_terms_in_collection == 12
        assert export.header.average_doclength == 4.0
        assert [(pl.term, pl.df, pl.cf) for pl in export.postings_lists] == [
            (t, df, cf) for t, df, cf, _ in T1_LISTS
        ]
        assert [(p.docid, p.tf) for p in export.postings_lists[0].postings] == [(0, 2), (2, 1)]
        assert [(d.docid, d.collection_docid, d.doclength) for d in export.doc_records] == T1_DOC_RECORDS

    def test_read_then_write_is_byte_identical(self, t1_export_bytes):
        export = load_export(io.BytesIO(t1_export_bytes))
        sink = io.BytesIO()
        write_export(export, sink)
        assert sink.getvalue() == t1_export_bytes

    def test_gzip_transparency(self, t1_export_bytes, tmp_path):
        path = tmp_path / "t1.bin"
        path.write_bytes(gzip.compress(t1_export_bytes))
        with wire.open_export(path) as f:
            export = load_export(f)
        sink = io.BytesIO()
        write_export(export, sink)
        assert sink.getvalue() == t1_export_bytes

    def test_empty_export(self):
        sink = io.BytesIO()
        write_export(CiffExport(CiffHeader()), sink)
        export = load_export(io.BytesIO(sink.getvalue()))
        assert export.header == CiffHeader()
        assert export.postings_lists == []
        assert export.doc_records == []
        assert validate_export(io.BytesIO(sink.getvalue())).ok


class TestReaderErrors:
    def test_truncated_after_header(self):
        data = ref_t1_bytes()
        header_len = 1 + data[0]
        reader = read_export(io.BytesIO(data[:header_len]))
        with pytest.raises(CountMismatch):
            list(reader.postings_lists())

    def test_truncated_mid_record(self):
        data = ref_t1_bytes()
        reader = read_export(io.BytesIO(data[: len(data) // 2]))
        with pytest.raises((CountMismatch, TruncatedStream)):
            list(reader.postings_lists())
            list(reader.doc_records())

    def test_trailing_bytes(self):
        reader = read_export(io.BytesIO(ref_t1_bytes() + b"\x01\x00"))
        list(reader.postings_lists())
        with pytest.raises(CountMismatch):
            list(reader.doc_records())

    def test_version_mismatch(self):
        with pytest.raises(UnsupportedVersion):
            read_export(io.BytesIO(ref_t1_bytes(version=2)))

    def test_empty_stream(self):
        with pytest.raises(CountMismatch):
            read_export(io.BytesIO(b""))

    def test_doc_records_require_postings_consumed(self):
        reader = read_export(io.BytesIO(ref_t1_bytes()))
        with pytest.raises(RuntimeError):
            next(reader.doc_records())

    def test_reader_warns_on_avdl_drift(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING):
            read_export(io.BytesIO(ref_t1_bytes(avdl=4.1)))
        assert any("average_doclength" in r.message for r in caplog.records)


class TestWriterInvariants:
    def _export(self, **overrides):
        header = CiffHeader(1, 1, 3, 1, 3, 12, 4.0, "x")
        lists = [CiffPostingsList("apple", 2, 3, [CiffPosting(0, 2), CiffPosting(2, 1)])]
        docs = [CiffDocRecord(*d) for d in T1_DOC_RECORDS]
        fields = {"header": header, "postings_lists": lists, "doc_records": docs}
        fields.update(overrides)
        return CiffExport(**fields)

    def _expect_violation(self, export, fragment):
        with pytest.raises(InvariantViolation, match=fragment):
            write_export(export, io.BytesIO())

    def test_valid_baseline(self):
        header = CiffHeader(1, 1, 3, 1, 3, 12, 4.0, "x")
        export = self._export(header=header)
        write_export(export, io.BytesIO())

    def test_df_mismatch(self):
        lists = [CiffPostingsList("apple", 3, 3, [CiffPosting(0, 2), CiffPosting(2, 1)])]
        self._expect_violation(self._export(postings_lists=lists), "df=3")

    def test_cf_mismatch(self):
        lists = [CiffPostingsList("apple", 2, 9, [CiffPosting(0, 2), CiffPosting(2, 1)])]
        self._expect_violation(self._export(postings_lists=lists), "cf=9")

    def test_zero_tf(self):
        lists = [CiffPostingsList("apple", 2, 2, [CiffPosting(0, 2), CiffPosting(2, 0)])]
        self._expect_violation(self._export(postings_lists=lists), "tf below 1")

    def test_docid_regression(self):
        lists = [CiffPostingsList("apple", 2, 3, [CiffPosting(2, 2), CiffPosting(0, 1)])]
        self._expect_violation(self._export(postings_lists=lists), "strictly increasing")

    def test_term_order(self):
        header = CiffHeader(1, 2, 3, 2, 3, 12, 4.0, "x")
        lists = [
            CiffPostingsList("banana", 1, 1, [CiffPosting(0, 1)]),
            CiffPostingsList("apple", 2, 3, [CiffPosting(0, 2), CiffPosting(2, 1)]),
        ]
        self._expect_violation(self._export(header=header, postings_lists=lists), "byte order")

    def test_count_mismatch(self):
        header = CiffHeader(1, 2, 3, 2, 3, 12, 4.0, "x")
        self._expect_violation(self._export(header=header), "postings lists written")

    def test_posting_without_doc_record(self):
        lists = [CiffPostingsList("apple", 2, 3, [CiffPosting(0, 2), CiffPosting(9, 1)])]
        self._expect_violation(self._export(postings_lists=lists), "no doc record")

    def test_doclength_sum_mismatch(self):
        header = CiffHeader(1, 1, 3, 1, 3, 13, 13 / 3, "x")
        self._expect_violation(self._export(header=header), "doclength sum")

    def test_header_num_exceeds_total(self):
        header = CiffHeader(1, 2, 3, 1, 3, 12, 4.0, "x")
        self._expect_violation(self._export(header=header), "num_postings_lists")


def _errors_mentioning(report, fragment):
    return [v for v in report.errors if fragment in v.message or fragment in v.location]


class TestValidate:
    def test_valid_export_empty_report(self, t1_stream):
        report = validate_export(t1_stream)
        assert report.ok
        assert report.render() == ""

    def test_df_plus_one(self):
        lists = [list(x) for x in T1_LISTS]
        lists[0][1] = 3  # apple df 2 -> 3
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=[tuple(x) for x in lists])))
        assert _errors_mentioning(report, "apple")

    def test_df_minus_one(self):
        lists = [list(x) for x in T1_LISTS]
        lists[0][1] = 1
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=[tuple(x) for x in lists])))
        assert _errors_mentioning(report, "apple")

    def test_tf_zero(self):
        lists = [list(x) for x in T1_LISTS]
        lists[0][3] = [(0, 0), (2, 1)]  # cf now also drifts; tf error must be flagged
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=[tuple(x) for x in lists])))
        assert _errors_mentioning(report, "tf below 1")

    def test_cf_mismatch(self):
        lists = [list(x) for x in T1_LISTS]
        lists[0][2] = 4
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=[tuple(x) for x in lists])))
        assert _errors_mentioning(report, "cf=4")

    def test_docid_regression(self):
        lists = [list(x) for x in T1_LISTS]
        lists[2][3] = [(0, 1), (1, 1), (1, 1)]  # cherry: duplicate docid via zero gap
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=[tuple(x) for x in lists])))
        assert _errors_mentioning(report, "docid does not increase")

    def test_truncation_after_header(self):
        data = ref_t1_bytes()
        header_len = 1 + data[0]
        report = validate_export(io.BytesIO(data[:header_len]))
        assert _errors_mentioning(report, "stream ended")

    def test_truncation_mid_postings(self):
        data = ref_t1_bytes()
        header_len = 1 + data[0]
        report = validate_export(io.BytesIO(data[: header_len + 5]))
        assert report.errors

    def test_version_not_one(self):
        report = validate_export(io.BytesIO(ref_t1_bytes(version=2)))
        assert _errors_mentioning(report, "version 2")

    def test_posting_referencing_missing_doc(self):
        lists = [list(x) for x in T1_LISTS]
        lists[3][3] = [(9, 1)]  # date -> docid 9, only 3 doc records
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=[tuple(x) for x in lists])))
        assert _errors_mentioning(report, "no doc record")

    def test_corruption_detection_is_exhaustive(self):
        # all 8 single-field corruptions in one sweep; also the acceptance shape
        corruptions = _t1_corruptions()
        assert len(corruptions) == 8
        for name, data in corruptions.items():
            report = validate_export(io.BytesIO(data))
            assert report.errors, f"corruption {name!r} not detected"

    def test_unsorted_terms_is_warning(self):
        lists = list(T1_LISTS)
        lists[0], lists[1] = lists[1], lists[0]
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=lists)))
        assert not report.errors
        assert any("sorted" in v.message for v in report.warnings)

    def test_duplicate_term_is_error(self):
        lists = [T1_LISTS[0], T1_LISTS[0]] + list(T1_LISTS[2:])
        report = validate_export(io.BytesIO(ref_t1_bytes(lists=lists, total_terms=12)))
        assert _errors_mentioning(report, "duplicate term")

    def test_avdl_drift_is_warning(self):
        report = validate_export(io.BytesIO(ref_t1_bytes(avdl=4.1)))
        assert not report.errors
        assert any("average_doclength" in v.message for v in report.warnings)

    def test_trailing_data(self):
        report = validate_export(io.BytesIO(ref_t1_bytes() + b"\x01\x00"))
        assert _errors_mentioning(report, "trailing")

    def test_num_exceeds_total(self):
        header = reference.ref_header(
            version=1, num_postings_lists=2, num_docs=0,
            total_postings_lists=1, total_docs=0, total_terms=0,
        )
        lists = [reference.ref_postings_list("a", 1, 1, [(0, 1)]),
                 reference.ref_postings_list("b", 1, 1, [(0, 1)])]
        data = reference.ref_export_bytes(header, lists, [])
        report = validate_export(io.BytesIO(data))
        assert _errors_mentioning(report, "num_postings_lists exceeds")

    def test_total_zero_with_num_is_warning_only_for_that_field(self):
        header = reference.ref_header(
            version=1, num_postings_lists=1, num_docs=0,
            total_postings_lists=0, total_docs=0, total_terms=1,
        )
        lists = [reference.ref_postings_list("a", 1, 1, [(0, 1)])]
        data = reference.ref_export_bytes(header, lists, [])
        report = validate_export(io.BytesIO(data))
        assert any("total_postings_lists is 0" in v.message for v in report.warnings)

    def test_never_raises_on_fuzz(self, t1_export_bytes):
        rng = random.Random(3)
        for _ in range(300):
            data = bytearray(t1_export_bytes)
            for _ in range(rng.randint(1, 4)):
                data[rng.randrange(len(data))] = rng.randrange(256)
            validate_export(io.BytesIO(bytes(data)))  # must not raise


def _t1_corruptions():
    """The eight single-field corruptions of a valid T1 export."""
    def with_lists(mutate):
        lists = [list(x) for x in T1_LISTS]
        mutate(lists)
        return ref_t1_bytes(lists=[tuple(x) for x in lists])

    data = ref_t1_bytes()
    header_len = 1 + data[0]
    out = {
        "df_plus_one": with_lists(lambda ls: ls[0].__setitem__(1, 3)),
        "df_minus_one": with_lists(lambda ls: ls[0].__setitem__(1, 1)),
        "tf_zero": with_lists(lambda ls: ls[0].__setitem__(3, [(0, 0), (2, 1)])),
        "cf_mismatch": with_lists(lambda ls: ls[0].__setitem__(2, 4)),
        "docid_regression": with_lists(lambda ls: ls[2].__setitem__(3, [(0, 1), (1, 1), (1, 1)])),
        "truncation_after_header": data[:header_len],
        "truncation_mid_postings": data[: header_len + 5],
        "version_not_one": ref_t1_bytes(version=2),
    }
    return out


class TestComputeStats:
    def test_t1(self, t1_stream):
        stats = compute_stats(t1_stream)
        assert stats.vocabulary == 6
        assert stats.postings == 10
        assert stats.term_occurrences == 12
        assert stats.doclength_sum == 12
        assert stats.doclength_sum_matches_header
        assert stats.min_doclength == 2
        assert stats.max_doclength == 6
        assert stats.top_terms_by_df[0] == ("cherry", 3)

    def test_filtered(self, t1_index):
        from ciffkit.indexer import export_bytes

        data = export_bytes(t1_index, term_filter={"apple"}, description="f")
        stats = compute_stats(io.BytesIO(data))
        assert stats.vocabulary == 1
        assert stats.postings == 2
        assert stats.doclength_sum == 12  # doc records retained

    def test_empty(self):
        sink = io.BytesIO()
        write_export(CiffExport(CiffHeader()), sink)
        stats = compute_stats(io.BytesIO(sink.getvalue()))
        assert stats.vocabulary == 0
        assert stats.postings == 0
        assert stats.doclength_sum == 0
        assert stats.min_doclength is None


class TestRandomizedRecordRoundTrip:
    @given(
        st.lists(
            st.tuples(st.integers(min_value=1, max_value=500), st.integers(min_value=1, max_value=50)),
            min_size=0,
            max_size=30,
        ),
        st.text(max_size=12),
    )
    def test_postings_list(self, pairs, term):
        docids = sorted({gap for gap, _ in pairs})
        postings = [CiffPosting(d, tf) for d, (_, tf) in zip(docids, pairs)]
        pl = CiffPostingsList(term, len(postings), sum(p.tf for p in postings), postings)
        assert CiffPostingsList.decode(pl.encode()) == pl

    @given(
        st.integers(min_value=0, max_value=2**31 - 1),
        st.text(min_size=1, max_size=20),
        st.integers(min_value=0, max_value=2**20),
    )
    def test_doc_record(self, docid, cid, length):
        dr = CiffDocRecord(docid, cid, length)
        assert CiffDocRecord.decode(dr.encode()) == dr

    @given(
        st.integers(min_value=0, max_value=2**20),
        st.integers(min_value=0, max_value=2**20),
        st.floats(min_value=0.0, max_value=1e9, allow_nan=False),
        st.text(max_size=30),
    )
    def test_header(self, num, total_terms, avdl, description):
        header = CiffHeader(1, num, num, num, num, total_terms, avdl, description)
        assert CiffHeader.decode(header.encode()) == header
