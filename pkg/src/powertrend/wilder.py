"""Wilder's indicator family: TR, ATR, +/-DM, +/-DI, DX, ADX, ADXR.

Indicator series are float arrays aligned with the bars; NaN marks the
warm-up prefix.

Smoothed quantities never include bar 0: it has no previous close, so its
true range and directional movement are not defined against a prior bar.
With period N the ATR is seeded at index N from TR[1..N], DX is defined from
N, ADX from 2N-1 and ADXR from 3N-2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import WarmupError
from .market_data import BarSeries


@dataclass(frozen=True)
class WilderParams:
    smoothing_period: int = 14

    def __post_init__(self):
        if int(self.smoothing_period) != self.smoothing_period or self.smoothing_period < 1:
            raise ValueError("smoothing_period must be a positive integer")


@dataclass(frozen=True, eq=False)
class Directional:
    plus_dm: np.ndarray
    minus_dm: np.ndarray
    plus_di: np.ndarray
    minus_di: np.ndarray
    dx: np.ndarray
    adx: np.ndarray
    adxr: np.ndarray


def _require(series: BarSeries, n: int, what: str):
    if len(series) < n:
        raise WarmupError(f"{series.symbol}: {what} needs at least {n} bars, got {len(series)}")


def true_range(series: BarSeries) -> np.ndarray:
    _require(series, 2, "true range")
    return kernels.true_range(series.high, series.low, series.close)


def wilder_smooth(values, period: int, start: int = 0) -> np.ndarray:
    """Mean of the first ``period`` values from ``start``, then
    ``s_t = (s_{t-1} * (period - 1) + x_t) / period``."""
    return kernels.wilder_smooth(np.asarray(values, dtype=float), int(period), int(start))


def atr(series: BarSeries, params: WilderParams = WilderParams()) -> np.ndarray:
    n = params.smoothing_period
    _require(series, n + 1, "ATR")
    return wilder_smooth(true_range(series), n, start=1)


def directional_movement(series: BarSeries) -> tuple[np.ndarray, np.ndarray]:
    """Per-bar (+DM, -DM); bar 0 is 0."""
    return kernels.directional_movement(series.high, series.low)


def _ratio(num, den):
    out = np.full(num.shape, np.nan)
    ok = ~np.isnan(num) & ~np.isnan(den)
    nz = ok & (den != 0)
    out[ok] = 0.0
    out[nz] = num[nz] / den[nz]
    return out


def dx_from_di(plus_di, minus_di) -> np.ndarray:
    """``100 * |+DI - -DI| / (+DI + -DI)``; 0 when both are 0."""
    plus_di = np.asarray(plus_di, dtype=float)
    minus_di = np.asarray(minus_di, dtype=float)
    return 100.0 * _ratio(np.abs(plus_di - minus_di), plus_di + minus_di)


def directional(series: BarSeries, params: WilderParams = WilderParams()) -> Directional:
    n = params.smoothing_period
    _require(series, 2 * n, "directional index")
    plus_dm, minus_dm = directional_movement(series)
    tr_s = wilder_smooth(true_range(series), n, start=1)
    plus_di = 100.0 * _ratio(wilder_smooth(plus_dm, n, start=1), tr_s)
    minus_di = 100.0 * _ratio(wilder_smooth(minus_dm, n, start=1), tr_s)
    dx = dx_from_di(plus_di, minus_di)
    adx = wilder_smooth(dx, n, start=n)
    adxr = np.full(len(series), np.nan)
    lag = n - 1
    if lag:
        adxr[lag:] = (adx[lag:] + adx[:-lag]) / 2.0
    else:
        adxr[:] = adx
    return Directional(plus_dm, minus_dm, plus_di, minus_di, dx, adx, adxr)


def last_defined(values) -> float:
    """Final non-NaN value, or NaN if none."""
    v = np.asarray(values, dtype=float)
    idx = np.flatnonzero(~np.isnan(v))
    return float(v[idx[-1]]) if idx.size else float("nan")


def first_defined(values) -> int:
    """Index of the first non-NaN value, or -1."""
    idx = np.flatnonzero(~np.isnan(np.asarray(values, dtype=float)))
    return int(idx[0]) if idx.size else -1
