"""Kernel backend selection: compiled extension with numpy fallback.

Set TRAPCALC_FORCE_PYTHON_KERNELS=1 to skip the extension (used by the
benchmark to time both paths in one process via direct module imports).
"""

from __future__ import annotations

import os

from . import _hill_py

if os.environ.get("TRAPCALC_FORCE_PYTHON_KERNELS", "").strip() in ("1", "true", "yes"):
    _impl = _hill_py
else:
    try:
        from . import _hill_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _hill_py

BACKEND: str = _impl.BACKEND
hill_monodromy_samples = _impl.hill_monodromy_samples
fundamental_trajectory = _impl.fundamental_trajectory
mathieu_scan_traces = _impl.mathieu_scan_traces

__all__ = [
    "BACKEND",
    "hill_monodromy_samples",
    "fundamental_trajectory",
    "mathieu_scan_traces",
]
