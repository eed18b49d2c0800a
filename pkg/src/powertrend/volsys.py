"""Wilder's Volatility System: stop-and-reverse on a trailing ATR stop.

While long the Significant Close (SIC) is the highest close since entry and
the stop-and-reverse level is ``SIC - ARC``; while short, the lowest close and
``SIC + ARC``. ARC is ``multiplier * ATR`` on the current bar. A close at or
beyond the stop exits at that close and reverses at the same price. A zero
ARC (flat ATR) needs a strict move against the position to trigger.

An optional per-bar gate restricts where positions may be *opened*. The stop
machine itself runs on every bar; a flat book joins its current direction at
the next gated bar, and a held position exits where the machine reverses.
Every gated trade is therefore a late-entered copy of an ungated one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import WarmupError
from .market_data import BarSeries
from .tables import to_csv
from .wilder import WilderParams, atr

LONG, SHORT, FLAT = 1, -1, 0
_DIRECTIONS = {"long": LONG, "short": SHORT, "auto": 0}
_NAMES = {LONG: "long", SHORT: "short"}


@dataclass(frozen=True)
class VolSysParams:
    multiplier: float = 3.0
    atr_params: WilderParams = field(default_factory=WilderParams)
    initial_direction: str = "auto"

    def __post_init__(self):
        if not self.multiplier > 0:
            raise ValueError("multiplier must be positive")
        if self.initial_direction not in _DIRECTIONS:
            raise ValueError("initial_direction must be long, short or auto")


@dataclass(frozen=True)
class Trade:
    direction: str
    entry_index: int
    exit_index: int
    entry_price: float
    exit_price: float

    @property
    def pnl_points(self) -> float:
        sign = 1.0 if self.direction == "long" else -1.0
        return sign * (self.exit_price - self.entry_price)


@dataclass(frozen=True, eq=False)
class BacktestResult:
    trades: tuple[Trade, ...]
    open_trade: Trade | None  # marked to the final close; None when flat
    atr: np.ndarray
    sic: np.ndarray
    sar: np.ndarray
    position: np.ndarray  # int8: 1 long, -1 short, 0 flat

    @property
    def realized_pnl(self) -> float:
        return float(sum(t.pnl_points for t in self.trades))

    @property
    def open_pnl(self) -> float:
        return self.open_trade.pnl_points if self.open_trade else 0.0

    @property
    def total_pnl_points(self) -> float:
        return self.realized_pnl + self.open_pnl

    @property
    def all_trades(self) -> tuple[Trade, ...]:
        return self.trades + ((self.open_trade,) if self.open_trade else ())

    @property
    def first_entry_price(self) -> float | None:
        trades = self.all_trades
        return trades[0].entry_price if trades else None

    @property
    def total_pnl_norm(self) -> float:
        """Total points divided by the first entry price; 0 without trades."""
        p = self.first_entry_price
        return self.total_pnl_points / p if p else 0.0

    @property
    def trade_count(self) -> int:
        return len(self.all_trades)


def run(
    series: BarSeries,
    params: VolSysParams = VolSysParams(),
    enabled: Sequence[bool] | np.ndarray | None = None,
) -> BacktestResult:
    n_atr = params.atr_params.smoothing_period
    if len(series) < n_atr + 1:
        raise WarmupError(
            f"{series.symbol}: volatility system needs {n_atr + 1} bars for ATR warm-up, got {len(series)}"
        )
    a = atr(series, params.atr_params)
    if enabled is None:
        gate = np.ones(len(series), dtype=np.bool_)
    else:
        gate = np.asarray(enabled, dtype=np.bool_)
        if gate.shape != (len(series),):
            raise ValueError("gate must align 1:1 with bars")
    out = kernels.volsys_run(
        series.close, a, float(params.multiplier), _DIRECTIONS[params.initial_direction], gate
    )
    position, sic, sar, t_dir, t_in, t_out, px_in, px_out, cur, entry_i, entry_px = out
    trades = tuple(
        Trade(_NAMES[int(d)], int(i), int(o), float(pi), float(po))
        for d, i, o, pi, po in zip(t_dir, t_in, t_out, px_in, px_out)
    )
    open_trade = None
    if cur != FLAT:
        open_trade = Trade(_NAMES[int(cur)], int(entry_i), len(series) - 1, float(entry_px), float(series.close[-1]))
    return BacktestResult(trades, open_trade, a, sic, sar, position)


def sic_series(result: BacktestResult) -> np.ndarray:
    """Per-bar SIC of the active position (NaN while warming up or flat)."""
    return result.sic


TRADE_COLUMNS = ("direction", "entry_index", "entry_price", "exit_index", "exit_price", "pnl_points")


def trade_rows(result: BacktestResult, include_open: bool = True) -> list[dict]:
    trades = result.all_trades if include_open else result.trades
    return [
        {
            "direction": t.direction,
            "entry_index": t.entry_index,
            "entry_price": t.entry_price,
            "exit_index": t.exit_index,
            "exit_price": t.exit_price,
            "pnl_points": t.pnl_points,
        }
        for t in trades
    ]


def trades_csv(result: BacktestResult, include_open: bool = True) -> str:
    return to_csv(TRADE_COLUMNS, trade_rows(result, include_open))
