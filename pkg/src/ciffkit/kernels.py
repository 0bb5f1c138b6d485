"""Kernel backend selection.

The compiled extension is preferred when present; the pure-Python module
is the drop-in fallback.  Set ``CIFFKIT_PURE_PYTHON=1`` before import to
force the fallback (useful for debugging and for the benchmark baseline).
"""

import os

from . import _pykernels

_impl = _pykernels
if os.environ.get("CIFFKIT_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND = "c" if _impl is not _pykernels else "python"

parse_postings = _impl.parse_postings
build_postings = _impl.build_postings
daat_topk = _impl.daat_topk
