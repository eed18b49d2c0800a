"""Loop-form kernels.

Written in the numba-compilable subset. The numba backend compiles these; the
numpy backend reuses the inherently sequential ones as plain Python.
"""
import numpy as np


def true_range(high, low, close):
    n = high.shape[0]
    out = np.empty(n)
    if n == 0:
        return out
    out[0] = high[0] - low[0]
    for t in range(1, n):
        hl = high[t] - low[t]
        hc = abs(high[t] - close[t - 1])
        lc = abs(low[t] - close[t - 1])
        m = hl
        if hc > m:
            m = hc
        if lc > m:
            m = lc
        out[t] = m
    return out


def directional_movement(high, low):
    n = high.shape[0]
    plus = np.zeros(n)
    minus = np.zeros(n)
    for t in range(1, n):
        up = high[t] - high[t - 1]
        down = low[t - 1] - low[t]
        if up > down and up > 0.0:
            plus[t] = up
        elif down > up and down > 0.0:
            minus[t] = down
    return plus, minus


def wilder_smooth(x, period, start):
    """Seed with the mean of x[start:start+period], then recurse."""
    n = x.shape[0]
    out = np.full(n, np.nan)
    seed_at = start + period - 1
    if seed_at >= n:
        return out
    acc = 0.0
    for i in range(start, start + period):
        acc += x[i]
    s = acc / period
    out[seed_at] = s
    for t in range(seed_at + 1, n):
        s = (s * (period - 1) + x[t]) / period
        out[t] = s
    return out


def rolling_mean(x, window):
    n = x.shape[0]
    out = np.full(n, np.nan)
    for t in range(window - 1, n):
        acc = 0.0
        for i in range(t - window + 1, t + 1):
            acc += x[i]
        out[t] = acc / window
    return out


def window_power(values, base, window):
    """Trailing-window mean of (values[i] / base[first])**2.

    ``first`` is the oldest index of the window. NaN anywhere in the window
    yields NaN.
    """
    n = values.shape[0]
    out = np.full(n, np.nan)
    for t in range(window - 1, n):
        j = t - window + 1
        b = base[j]
        acc = 0.0
        for i in range(j, t + 1):
            r = values[i] / b
            acc += r * r
        out[t] = acc / window
    return out


def window_excess(close, ma_window, window):
    """Signal power minus one, without forming the moving average first.

    For each window with base P0, every MA_i - P0 is averaged from the
    differences close[m] - P0, which are exact for prices within a factor
    two of P0. The excess then keeps full relative precision even when the
    signal power is a hair above one.
    """
    n = close.shape[0]
    out = np.full(n, np.nan)
    for t in range(window + ma_window - 2, n):
        j = t - window + 1
        b = close[j]
        d = 0.0  # running sum of close[m] - b over the MA span ending at i
        for m in range(j - ma_window + 1, j + 1):
            d += close[m] - b
        acc = 0.0
        for i in range(j, t + 1):
            if i > j:
                d += (close[i] - b) - (close[i - ma_window] - b)
            u = d / ma_window / b
            acc += u * (2.0 + u)
        out[t] = acc / window
    return out


def volsys_run(close, atr, multiplier, initial_direction, gate):
    """Stop-and-reverse state machine on closes.

    initial_direction: 1 long, -1 short, 0 auto. The machine always runs;
    ``gate`` only decides on which bars a flat book may join its current
    direction. A held position exits exactly where the machine reverses.
    Returns per-bar position, SIC and SAR (NaN while flat), the closed-trade
    arrays, and the open position (direction, entry index, entry price;
    direction 0 when flat).
    """
    n = close.shape[0]
    position = np.zeros(n, dtype=np.int8)
    sic = np.full(n, np.nan)
    sar = np.full(n, np.nan)
    t_dir = np.zeros(n, dtype=np.int8)
    t_entry = np.zeros(n, dtype=np.int64)
    t_exit = np.zeros(n, dtype=np.int64)
    t_entry_px = np.zeros(n)
    t_exit_px = np.zeros(n)
    k = 0

    start = n
    for t in range(n):
        if not np.isnan(atr[t]):
            start = t
            break

    cur = 0  # traded position
    entry_i = -1
    entry_px = 0.0
    mach = 0  # machine direction
    s = 0.0
    for t in range(start, n):
        c = close[t]
        arc = multiplier * atr[t]
        if mach == 0:
            mach = initial_direction
            if mach == 0:
                mach = 1
                if t > 0 and c < close[t - 1]:
                    mach = -1
            s = c
        else:
            hit = False
            if mach == 1:
                if c > s:
                    s = c
                hit = c <= s - arc and c < s
            else:
                if c < s:
                    s = c
                hit = c >= s + arc and c > s
            if hit:
                if cur != 0:
                    t_dir[k] = cur
                    t_entry[k] = entry_i
                    t_exit[k] = t
                    t_entry_px[k] = entry_px
                    t_exit_px[k] = c
                    k += 1
                    cur = 0
                mach = -mach
                s = c
        if cur == 0 and gate[t]:
            cur = mach
            entry_i = t
            entry_px = c
        if cur != 0:
            position[t] = cur
            sic[t] = s
            sar[t] = s - cur * arc
    return (
        position,
        sic,
        sar,
        t_dir[:k].copy(),
        t_entry[:k].copy(),
        t_exit[:k].copy(),
        t_entry_px[:k].copy(),
        t_exit_px[:k].copy(),
        cur,
        entry_i,
        entry_px,
    )
