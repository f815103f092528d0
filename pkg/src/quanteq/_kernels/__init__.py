"""Solver kernels: compiled extension with a pure-Python fallback.

The backend is chosen once at import time. Set ``QUANTEQ_KERNEL=python`` (or
``cython``) to force a backend; forcing ``cython`` raises if the extension is
not built.
"""

from __future__ import annotations

import os

from . import _pure

_FORCED = os.environ.get("QUANTEQ_KERNEL", "").strip().lower()

if _FORCED == "python":
    _impl = _pure
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _FORCED == "cython":
            raise
        _impl = _pure
        BACKEND = "python"

KIND_EXPONENTIAL = _pure.KIND_EXPONENTIAL
KIND_GAUSSIAN = _pure.KIND_GAUSSIAN
KIND_UNIFORM = _pure.KIND_UNIFORM

STATUS_CONVERGED = _pure.STATUS_CONVERGED
STATUS_COLLAPSED = _pure.STATUS_COLLAPSED
STATUS_MAX_ITERATIONS = _pure.STATUS_MAX_ITERATIONS

truncated_mean = _impl.truncated_mean
bin_mass = _impl.bin_mass
lloyd_step = _impl.lloyd_step
lloyd_solve = _impl.lloyd_solve


def get_backend() -> str:
    """Name of the kernel backend in use ('cython' or 'python')."""
    return BACKEND


def available_backends() -> dict[str, object]:
    """Map of importable backend name -> module (for benchmarks/tests)."""
    out: dict[str, object] = {"python": _pure}
    try:
        from . import _core

        out["cython"] = _core
    except ImportError:
        pass
    return out
