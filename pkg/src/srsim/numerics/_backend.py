"""Selects the compiled interior-point core when present, else pure numpy.

Set SRSIM_PURE_PYTHON=1 to force the fallback (used by the benchmark)."""

from __future__ import annotations

import os

from . import _elliptope

if os.environ.get("SRSIM_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _core_cy as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    elliptope_logsdp = _compiled.elliptope_logsdp
    BACKEND = "compiled"
else:
    elliptope_logsdp = _elliptope.elliptope_logsdp
    BACKEND = "pure"
