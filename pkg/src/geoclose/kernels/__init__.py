"""Kernel backend dispatch.

The hot set-closure loops run either as numba-compiled kernels or as pure
numpy fallbacks.  Selection happens once at import time from the
GEOCLOSE_KERNELS environment variable:

    auto    (default) numba when importable, else python
    numba   require numba, fail loudly otherwise
    python  force the fallback

`get_impl(name)` returns a specific backend module regardless of the
ambient selection; the parity tests and the benchmark use it.
"""

import os

_requested = os.environ.get("GEOCLOSE_KERNELS", "auto").strip().lower()

if _requested not in ("auto", "numba", "python"):
    raise RuntimeError(f"GEOCLOSE_KERNELS must be auto|numba|python, got {_requested!r}")

if _requested == "python":
    from . import _python as _impl

    BACKEND = "python"
else:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _python as _impl

        BACKEND = "python"

rules_close_batch = _impl.rules_close_batch
orbit_close_batch = _impl.orbit_close_batch


def backend_name() -> str:
    return BACKEND


def get_impl(name: str):
    """Return a backend module by name ('numba' or 'python')."""
    if name == "python":
        from . import _python

        return _python
    if name == "numba":
        from . import _numba

        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")
