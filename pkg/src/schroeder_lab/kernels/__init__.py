"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback keeps the package
fully functional without a compiler.  Set SCHRODER_LAB_BACKEND=python or
=cython to force a backend (the latter raises if the extension is absent).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_forced = os.environ.get("SCHRODER_LAB_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _fallback as impl
elif _forced == "cython":
    from . import _core as impl  # type: ignore[attr-defined]
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as impl

BACKEND = impl.BACKEND_NAME

series_eval = impl.series_eval
rat_iterate = impl.rat_iterate
pullback_eval = impl.pullback_eval
pullback_log_abs = impl.pullback_log_abs
escape_time = impl.escape_time
power_escape = impl.power_escape


def run_chunked(fn, w: np.ndarray, threads: int = 1):
    """Apply an array kernel over disjoint slices, optionally on a thread
    pool.  Results are concatenated in slice order, so the output is
    identical for every thread count."""
    w = np.ascontiguousarray(w)
    n = len(w)
    if threads <= 1 or n < 4096:
        return fn(w)
    bounds = np.linspace(0, n, threads + 1).astype(int)
    chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda b: fn(w[b[0]:b[1]]), chunks))
    return np.concatenate(parts)
