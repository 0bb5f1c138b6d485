import io

import pytest

from ciffkit import CorpusDocument, build_index
from ciffkit.indexer import export_bytes

T1_DOCS = [
    ("d0", "apple banana apple cherry"),
    ("d1", "banana banana cherry date fig grape"),
    ("d2", "apple cherry"),
]

T1_DESCRIPTION = "t1 test corpus"


@pytest.fixture(scope="session")
def t1_index():
    return build_index(CorpusDocument(cid, text) for cid, text in T1_DOCS)


@pytest.fixture(scope="session")
def t1_export_bytes(t1_index):
    return export_bytes(t1_index, description=T1_DESCRIPTION)


@pytest.fixture()
def t1_stream(t1_export_bytes):
    return io.BytesIO(t1_export_bytes)


# --- acceptance summary: one pass/fail line per criterion -----------------

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            _acceptance_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[name]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
