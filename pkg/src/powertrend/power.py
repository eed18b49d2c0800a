"""Windowed signal/noise power and the power ratios.

For a trailing window of N bars ending at t, with P0 the oldest close in the
window and MA the moving average of closes:

    signal power = mean((MA_i / P0)**2)
    noise power  = mean(((P_i - MA_i) / P0)**2)
    threshold    = (ATR_t / SIC_t)**2
    r_signal     = sqrt(max(signal power - 1, 0) / threshold)
    r_noise      = sqrt(noise power / threshold)

Both ratios read as multiples of the stop-loss range. A zero threshold (no
volatility) has no stop-loss scale: ratios are reported as 0 and flagged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateError, WarmupError
from .market_data import BarSeries
from .tables import to_csv
from .volsys import BacktestResult

DEGENERATE = 1  # threshold is zero
CLAMPED = 2  # signal power below 1, excess clamped to zero
_FLAG_NAMES = ((DEGENERATE, "degenerate"), (CLAMPED, "clamped"))


@dataclass(frozen=True)
class PowerParams:
    window: int = 30
    ma_window: int | None = None

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("power window must be at least 2")
        if self.ma_window is not None and self.ma_window < 1:
            raise ValueError("ma_window must be positive")

    @property
    def ma(self) -> int:
        return self.window if self.ma_window is None else self.ma_window

    @property
    def warmup(self) -> int:
        """Index of the first bar with both power values defined."""
        return self.ma - 1 + self.window - 1


@dataclass(frozen=True, eq=False)
class PowerReport:
    window: int
    ma_window: int
    ma: np.ndarray
    power_signal: np.ndarray
    power_noise: np.ndarray
    power_threshold: np.ndarray
    r_signal: np.ndarray
    r_noise: np.ndarray
    flags: np.ndarray  # int8 bitmask of DEGENERATE / CLAMPED

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.r_signal)

    @property
    def first_defined(self) -> int:
        idx = np.flatnonzero(self.defined)
        return int(idx[0]) if idx.size else -1


def moving_average(close, window: int) -> np.ndarray:
    close = np.asarray(close, dtype=float)
    if window < 1:
        raise ValueError("window must be positive")
    if close.shape[0] < window:
        raise WarmupError(f"moving average of {window} needs {window} values, got {close.shape[0]}")
    return kernels.rolling_mean(close, int(window))


def window_power(values, base: float = 1.0) -> float:
    """Mean of ``(v / base)**2`` over ``values``.

    With the default base this is the plain average power of a finite signal.
    """
    if not base > 0:
        raise DegenerateError("power base must be positive")
    v = np.asarray(values, dtype=float) / base
    if v.size == 0:
        raise ValueError("empty window")
    return float(np.mean(v * v))


def _check_length(series: BarSeries, params: PowerParams):
    need = params.warmup + 1
    if len(series) < need:
        raise WarmupError(
            f"{series.symbol}: {params.window}-bar power over a {params.ma}-bar moving average "
            f"needs {need} bars, got {len(series)}"
        )


def power_of_signal(series: BarSeries, params: PowerParams = PowerParams()) -> np.ndarray:
    _check_length(series, params)
    ma = moving_average(series.close, params.ma)
    return kernels.window_power(ma, series.close, params.window)


def power_of_noise(series: BarSeries, params: PowerParams = PowerParams()) -> np.ndarray:
    _check_length(series, params)
    ma = moving_average(series.close, params.ma)
    return kernels.window_power(series.close - ma, series.close, params.window)


def power_threshold(atr, sic) -> np.ndarray:
    atr = np.asarray(atr, dtype=float)
    sic = np.asarray(sic, dtype=float)
    if np.any(sic == 0):
        raise DegenerateError("SIC of zero")
    return np.abs(atr / sic) ** 2


def ratios(power_signal, power_noise, threshold, excess=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (r_signal, r_noise, flags); NaN wherever an input is undefined.

    ``excess`` is signal power minus one when the caller has it to better
    precision than the subtraction gives.
    """
    ps = np.asarray(power_signal, dtype=float)
    pn = np.asarray(power_noise, dtype=float)
    pt = np.asarray(threshold, dtype=float)
    if np.any(pt < 0):
        raise DegenerateError("negative power threshold")
    ok = ~(np.isnan(ps) | np.isnan(pn) | np.isnan(pt))
    r_signal = np.full(ps.shape, np.nan)
    r_noise = np.full(ps.shape, np.nan)
    flags = np.zeros(ps.shape, dtype=np.int8)

    excess = ps - 1.0 if excess is None else np.asarray(excess, dtype=float)
    clamped = ok & (excess < 0)
    flags[clamped] |= CLAMPED
    excess = np.where(clamped, 0.0, excess)

    degenerate = ok & (pt == 0)
    flags[degenerate] |= DEGENERATE
    live = ok & ~degenerate
    r_signal[degenerate] = 0.0
    r_noise[degenerate] = 0.0
    r_signal[live] = np.sqrt(excess[live] / pt[live])
    r_noise[live] = np.sqrt(pn[live] / pt[live])
    return r_signal, r_noise, flags


def power_report(
    series: BarSeries,
    params: PowerParams,
    volsys_result: BacktestResult,
) -> PowerReport:
    """Per-bar power report; SIC and ATR come from ``volsys_result``.

    Undefined (NaN) until MA, both window powers, ATR and SIC are all
    defined, and wherever the system is flat.
    """
    _check_length(series, params)
    n_atr = len(volsys_result.atr)
    if n_atr != len(series):
        raise ValueError("volatility-system result does not match the series")
    if np.isnan(volsys_result.atr).all():
        raise WarmupError(f"{series.symbol}: ATR never defined")
    ma = moving_average(series.close, params.ma)
    ps = kernels.window_power(ma, series.close, params.window)
    pn = kernels.window_power(series.close - ma, series.close, params.window)
    pt = power_threshold(volsys_result.atr, volsys_result.sic)
    excess = kernels.window_excess(series.close, params.ma, params.window)
    r_signal, r_noise, flags = ratios(ps, pn, pt, excess)
    return PowerReport(params.window, params.ma, ma, ps, pn, pt, r_signal, r_noise, flags)


def flag_names(value: int) -> str:
    return "|".join(name for bit, name in _FLAG_NAMES if value & bit)


REPORT_COLUMNS = (
    "index", "date", "close", "ma", "power_signal", "power_noise",
    "power_threshold", "r_signal", "r_noise", "flags",
)


def report_rows(series: BarSeries, report: PowerReport) -> list[dict]:
    labels = series.timestamp_labels()
    return [
        {
            "index": i,
            "date": labels[i],
            "close": float(series.close[i]),
            "ma": _none(report.ma[i]),
            "power_signal": _none(report.power_signal[i]),
            "power_noise": _none(report.power_noise[i]),
            "power_threshold": _none(report.power_threshold[i]),
            "r_signal": _none(report.r_signal[i]),
            "r_noise": _none(report.r_noise[i]),
            "flags": flag_names(int(report.flags[i])),
        }
        for i in range(len(series))
    ]


def _none(x):
    return None if np.isnan(x) else float(x)


def report_csv(series: BarSeries, report: PowerReport) -> str:
    return to_csv(REPORT_COLUMNS, report_rows(series, report))
