"""Hot numeric kernels, dispatched to numba or numpy per ``_accel.USE_NUMBA``.

Both backends are importable directly (``kernels.numpy_backend`` and, when
numba is installed, ``kernels.numba_backend``) so they can be compared.
"""
from .. import _accel
from . import _numpy as numpy_backend

if _accel.HAVE_NUMBA:
    from . import _numba as numba_backend
else:  # pragma: no cover
    numba_backend = None

active = numba_backend if _accel.USE_NUMBA else numpy_backend

true_range = active.true_range
directional_movement = active.directional_movement
wilder_smooth = active.wilder_smooth
rolling_mean = active.rolling_mean
window_power = active.window_power
window_excess = active.window_excess
volsys_run = active.volsys_run

__all__ = [
    "active",
    "directional_movement",
    "numba_backend",
    "numpy_backend",
    "rolling_mean",
    "true_range",
    "volsys_run",
    "wilder_smooth",
    "window_excess",
    "window_power",
]
