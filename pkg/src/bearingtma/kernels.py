"""Backend selection for the numeric kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation. Set ``BEARINGTMA_PURE_PYTHON=1`` to force the fallback, or
call :func:`set_backend` at runtime. Callers look kernels up through this
module at call time, so switching takes effect immediately.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_NAMES = ("basis_matrix", "basis_deriv_matrix", "design_system", "bearing_model")

BACKEND = None


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])


def set_backend(name):
    """Select ``"cython"`` or ``"python"`` kernels for the whole process."""
    global BACKEND
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        impl = _compiled
    elif name == "python":
        impl = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    for attr in _NAMES:
        g[attr] = getattr(impl, attr)
    BACKEND = name


if _compiled is None or os.environ.get("BEARINGTMA_PURE_PYTHON", "") not in ("", "0"):
    set_backend("python")
else:
    set_backend("cython")
