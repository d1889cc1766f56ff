"""Hot inner kernels with a compiled core and a numpy fallback.

The compiled extension ``_ckernels`` is used when it imports cleanly.
Set ``EPKIT_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
active implementation; :func:`get_backend` returns either one explicitly,
which the benchmark and the parity tests use.
"""
import importlib
import os

from . import _pykernels

__all__ = ["BACKEND", "get_backend", "kron", "kron_sum", "nilpotent_trace",
           "concurrence_rows", "available_backends"]


def _load_compiled():
    try:
        return importlib.import_module("._ckernels", __name__)
    except ImportError:
        return None


_compiled = _load_compiled()


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


if _compiled is not None and not os.environ.get("EPKIT_PURE_PYTHON"):
    BACKEND = "cython"
    _active = _compiled
else:
    BACKEND = "python"
    _active = _pykernels

kron = _active.kron
kron_sum = _active.kron_sum
nilpotent_trace = _active.nilpotent_trace
concurrence_rows = _active.concurrence_rows
