"""Kernel backend selection.

``TALKMOVES_BACKEND=numpy`` forces the pure-numpy kernels;
``TALKMOVES_BACKEND=numba`` requires numba and fails loudly if it is
missing. Unset, numba is used when importable and numpy otherwise. The two
backends compute the same float64 math (fastmath stays off); runs are
bitwise-reproducible within a backend.
"""

from __future__ import annotations

import os

from . import kernels as _numpy_kernels


def _compile_numba():
    from numba import njit

    jit = njit(cache=True, fastmath=False)
    return jit(_numpy_kernels.gru_forward), jit(_numpy_kernels.gru_backward)


def get_kernels(name: str):
    """Return (gru_forward, gru_backward) for the named backend."""
    if name == "numpy":
        return _numpy_kernels.gru_forward, _numpy_kernels.gru_backward
    if name == "numba":
        return _compile_numba()
    raise ValueError(f"unknown backend {name!r}; expected 'numpy' or 'numba'")


def _select() -> str:
    requested = os.environ.get("TALKMOVES_BACKEND", "").strip().lower()
    if requested in ("numpy", "numba"):
        return requested
    if requested:
        raise ValueError(
            f"TALKMOVES_BACKEND={requested!r} not recognized; use 'numpy' or 'numba'"
        )
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


BACKEND = _select()
gru_forward, gru_backward = get_kernels(BACKEND)


def backend_name() -> str:
    return BACKEND
