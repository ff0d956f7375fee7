"""Pick the compiled kernels when available, else the numpy fallback.

Set ``ERINGEN_LAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _core_py

core = _core_py
NAME = "python"

if os.environ.get("ERINGEN_LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _compiled
    except ImportError:
        pass
    else:
        core = _compiled
        NAME = "cython"


def backends():
    """All importable kernel modules keyed by name (for tests and benchmarks)."""
    found = {"python": _core_py}
    try:
        from . import _core as _compiled
    except ImportError:
        return found
    found["cython"] = _compiled
    return found
