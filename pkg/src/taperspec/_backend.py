"""Kernel backend selection.

The compiled extension is used when it built successfully; otherwise the
numpy fallback takes over transparently.  TAPERSPEC_BACKEND=numpy or
=compiled forces the choice (the forced compiled backend raises if the
extension is missing).  Both backends implement the same contract and
agree to rounding; the backend affects speed, never the statistics.
"""
from __future__ import annotations

import os

from . import _kernels_np

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built on this platform
    _compiled = None

HAVE_COMPILED = _compiled is not None


def backend_name() -> str:
    forced = os.environ.get("TAPERSPEC_BACKEND", "auto")
    if forced == "numpy":
        return "numpy"
    if forced == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "TAPERSPEC_BACKEND=compiled but the extension is not built")
        return "compiled"
    if forced != "auto":
        raise ValueError(
            f"TAPERSPEC_BACKEND={forced!r} not recognized; "
            "use auto | numpy | compiled")
    return "compiled" if HAVE_COMPILED else "numpy"


def get_kernels(name: str | None = None):
    """The active kernel module (or the explicitly requested one)."""
    chosen = name or backend_name()
    if chosen == "numpy":
        return _kernels_np
    if chosen == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel backend is unavailable")
        return _compiled
    raise ValueError(f"unknown backend {chosen!r}")
