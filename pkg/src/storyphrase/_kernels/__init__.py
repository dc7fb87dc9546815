"""Counting kernels: compiled extension when available, pure Python otherwise.

Set STORYPHRASE_PURE=1 to force the fallback (used by the benchmark and by
tests that assert both implementations agree).
"""

import os

from . import pure

if os.environ.get("STORYPHRASE_PURE"):
    _impl = pure
    IMPLEMENTATION = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        IMPLEMENTATION = "fast"
    except ImportError:
        _impl = pure
        IMPLEMENTATION = "pure"

window_counts = _impl.window_counts
window_groups = _impl.window_groups
