"""ciffkit: inverted-index exchange in the Common Index File Format.

Build an index from a corpus, export it as a single (optionally gzipped)
exchange file, import such files into a query-ready native index, run
BM25 retrieval over them, and evaluate the resulting run files.
"""

from .analysis import AnalysisConfig, analyze, read_stopwords
from .engine import (
    Bm25Params,
    NativeIndex,
    ScoredDoc,
    bm25_weight,
    import_ciff,
    parse_topics,
    search,
    write_run,
)
from .evalkit import (
    MetricReport,
    MetricSpec,
    Qrels,
    average_precision,
    err_at_k,
    evaluate_run,
    ndcg_at_k,
    parse_qrels,
    parse_run,
    precision_at_k,
)
from .indexer import CorpusDocument, InMemoryIndex, build_index, export_ciff, read_corpus
from .model import (
    CiffDocRecord,
    CiffExport,
    CiffHeader,
    CiffPosting,
    CiffPostingsList,
    CiffReader,
    StatsSummary,
    ValidationReport,
    compute_stats,
    gap_decode,
    gap_encode,
    load_export,
    read_export,
    validate_export,
    write_export,
)
from .porter import porter_stem
from .wire import open_export

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "Bm25Params",
    "CiffDocRecord",
    "CiffExport",
    "CiffHeader",
    "CiffPosting",
    "CiffPostingsList",
    "CiffReader",
    "CorpusDocument",
    "InMemoryIndex",
    "MetricReport",
    "MetricSpec",
    "NativeIndex",
    "Qrels",
    "ScoredDoc",
    "StatsSummary",
    "ValidationReport",
    "analyze",
    "average_precision",
    "bm25_weight",
    "build_index",
    "compute_stats",
    "err_at_k",
    "evaluate_run",
    "export_ciff",
    "gap_decode",
    "gap_encode",
    "import_ciff",
    "load_export",
    "ndcg_at_k",
    "open_export",
    "parse_qrels",
    "parse_run",
    "parse_topics",
    "porter_stem",
    "precision_at_k",
    "read_corpus",
    "read_export",
    "read_stopwords",
    "search",
    "validate_export",
    "write_export",
    "write_run",
    "__version__",
]
