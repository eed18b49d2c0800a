from numba import njit

from .._accel import JIT_OPTIONS
from . import _loops

true_range = njit(**JIT_OPTIONS)(_loops.true_range)
directional_movement = njit(**JIT_OPTIONS)(_loops.directional_movement)
wilder_smooth = njit(**JIT_OPTIONS)(_loops.wilder_smooth)
rolling_mean = njit(**JIT_OPTIONS)(_loops.rolling_mean)
window_power = njit(**JIT_OPTIONS)(_loops.window_power)
window_excess = njit(**JIT_OPTIONS)(_loops.window_excess)
volsys_run = njit(**JIT_OPTIONS)(_loops.volsys_run)
