"""Select the compiled kernels when available, else the Python reference.

Set ``SORITES_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names
the implementation in use.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SORITES_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

greedy_cover = _impl.greedy_cover
greedy_pack = _impl.greedy_pack
bfs = _impl.bfs
components = _impl.components
bounded_dijkstra = _impl.bounded_dijkstra

__all__ = ["BACKEND", "greedy_cover", "greedy_pack", "bfs", "components", "bounded_dijkstra"]
