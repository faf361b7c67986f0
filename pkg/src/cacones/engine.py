"""Backend selection: compiled kernels when available, pure Python otherwise.

Set ``CACONES_PURE=1`` to force the pure backend (used by the benchmark and
by tests that compare the two).
"""

from __future__ import annotations

import os

from . import _engine_py

BACKEND = "pure"
frontier_targets = _engine_py.frontier_targets
naive_targets = _engine_py.naive_targets

if os.environ.get("CACONES_PURE", "") != "1":
    try:
        from . import _kernels

        frontier_targets = _kernels.frontier_targets
        naive_targets = _kernels.naive_targets
        BACKEND = "compiled"
    except ImportError:
        pass
