"""Vectorised numpy kernels.

Recursions (Wilder smoothing, the stop-and-reverse machine) have no
vectorised form and run as plain Python loops.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._loops import volsys_run, wilder_smooth  # noqa: F401


def true_range(high, low, close):
    out = np.empty(high.shape[0])
    if out.shape[0] == 0:
        return out
    out[0] = high[0] - low[0]
    prev = close[:-1]
    out[1:] = np.maximum.reduce(
        [high[1:] - low[1:], np.abs(high[1:] - prev), np.abs(low[1:] - prev)]
    )
    return out


def directional_movement(high, low):
    up = np.zeros(high.shape[0])
    down = np.zeros(high.shape[0])
    up[1:] = high[1:] - high[:-1]
    down[1:] = low[:-1] - low[1:]
    plus = np.where((up > down) & (up > 0.0), up, 0.0)
    minus = np.where((down > up) & (down > 0.0), down, 0.0)
    return plus, minus


def rolling_mean(x, window):
    out = np.full(x.shape[0], np.nan)
    if x.shape[0] >= window:
        out[window - 1:] = sliding_window_view(x, window).sum(axis=1) / window
    return out


def window_power(values, base, window):
    n = values.shape[0]
    out = np.full(n, np.nan)
    if n >= window:
        view = sliding_window_view(values, window)
        ratio = view / base[: n - window + 1, None]
        out[window - 1:] = (ratio * ratio).sum(axis=1) / window
    return out


def window_excess(close, ma_window, window):
    n = close.shape[0]
    out = np.full(n, np.nan)
    first = window + ma_window - 2
    if n <= first:
        return out
    for t in range(first, n):
        j = t - window + 1
        b = close[j]
        d = sliding_window_view(close[j - ma_window + 1:t + 1] - b, ma_window).sum(axis=1)
        u = d / ma_window / b
        out[t] = (u * (2.0 + u)).sum() / window
    return out
