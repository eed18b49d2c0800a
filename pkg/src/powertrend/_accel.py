"""Backend selection for the numeric kernels.

Set ``POWERTREND_NO_NUMBA=1`` to force the pure-numpy path. The flag is read
once, at import time.
"""
import os

JIT_OPTIONS = {
    "nogil": True,
    "cache": True,
}

_FALSY = ("", "0", "false", "no", "off")


def _numba_requested():
    return os.environ.get("POWERTREND_NO_NUMBA", "0").strip().lower() in _FALSY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
