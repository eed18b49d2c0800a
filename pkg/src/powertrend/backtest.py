"""Experiment harness: multiplier sweeps, power gating, MA-range sweeps and
per-symbol universe runs.

Gating is two-pass. An ungated run supplies the SIC that the power report
needs; the report's signal ratio then gates entries of a second run with the
same parameters.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, PowerTrendError
from .market_data import BarSeries
from .power import PowerParams, PowerReport, power_report
from .tables import to_csv
from .volsys import BacktestResult, VolSysParams, run
from .wilder import directional, last_defined

GATE_MODES = ("off", "arm-once", "while-above")


def default_multipliers() -> tuple[float, ...]:
    return tuple(round(0.1 * k, 10) for k in range(1, 81))


@dataclass(frozen=True)
class SweepSpec:
    multipliers: tuple[float, ...] = field(default_factory=default_multipliers)
    power_windows: tuple[int, ...] = (30, 50, 100)
    gate_level: float = 4.0
    gate_mode: str = "arm-once"

    def __post_init__(self):
        m = tuple(float(x) for x in self.multipliers)
        if not m:
            raise ValueError("multiplier grid is empty")
        if any(x <= 0 for x in m):
            raise ValueError("multipliers must be positive")
        if any(b <= a for a, b in zip(m, m[1:])):
            raise ValueError("multiplier grid must be strictly increasing")
        object.__setattr__(self, "multipliers", m)
        object.__setattr__(self, "power_windows", tuple(int(w) for w in self.power_windows))
        if self.gate_mode not in GATE_MODES:
            raise ValueError(f"gate_mode must be one of {GATE_MODES}")


def gate_from_power(r_signal, level: float, mode: str = "arm-once") -> np.ndarray:
    """Per-bar entry permission from the signal ratio.

    ``r_signal`` may be a :class:`PowerReport`. NaN never meets the level.
    """
    if isinstance(r_signal, PowerReport):
        r_signal = r_signal.r_signal
    r = np.asarray(r_signal, dtype=float)
    if mode == "off":
        return np.ones(r.shape, dtype=bool)
    above = r >= level  # NaN compares False
    if mode == "while-above":
        return above
    if mode == "arm-once":
        return np.logical_or.accumulate(above) if above.size else above
    raise ValueError(f"unknown gate mode {mode!r}")


@dataclass(frozen=True, eq=False)
class GatedRun:
    result: BacktestResult
    ungated: BacktestResult
    report: PowerReport | None
    gate: np.ndarray


def gated_run(
    series: BarSeries,
    params: VolSysParams,
    power_params: PowerParams | None,
    level: float = 4.0,
    mode: str = "arm-once",
    ungated: BacktestResult | None = None,
) -> GatedRun:
    if ungated is None:
        ungated = run(series, params)
    if mode == "off" or power_params is None:
        report = power_report(series, power_params, ungated) if power_params else None
        return GatedRun(ungated, ungated, report, np.ones(len(series), dtype=bool))
    report = power_report(series, power_params, ungated)
    gate = gate_from_power(report.r_signal, level, mode)
    return GatedRun(run(series, params, gate), ungated, report, gate)


@dataclass(frozen=True)
class SweepPoint:
    window: int | None
    multiplier: float
    total_pnl: float
    total_pnl_norm: float
    trades: int
    error: str = ""


def sweep_multiplier(
    series: BarSeries,
    spec: SweepSpec,
    base: VolSysParams = VolSysParams(),
    ma_window: int | None = None,
) -> list[SweepPoint]:
    """One volatility-system run per grid point (per power window when gated).

    Failures at a grid point are recorded in ``error`` and the sweep goes on.
    """
    windows: Sequence[int | None] = (None,) if spec.gate_mode == "off" else spec.power_windows
    out = []
    for w in windows:
        pp = PowerParams(w, ma_window) if w is not None else None
        for m in spec.multipliers:
            try:
                g = gated_run(series, replace(base, multiplier=m), pp, spec.gate_level, spec.gate_mode)
                r = g.result
                out.append(SweepPoint(w, m, r.total_pnl_points, r.total_pnl_norm, r.trade_count))
            except PowerTrendError as exc:
                out.append(SweepPoint(w, m, math.nan, math.nan, 0, str(exc)))
    return out


@dataclass(frozen=True)
class MaRangePoint:
    range: int
    r_signal: float
    r_noise: float
    flags: int
    first_defined: int  # -1 when the range never warms up


def sweep_ma_range(
    series: BarSeries,
    range_grid: Iterable[int],
    params: VolSysParams = VolSysParams(),
) -> list[MaRangePoint]:
    """Final-bar ratios for each moving-average range (power window = range)."""
    result = run(series, params)
    out = []
    for n in range_grid:
        n = int(n)
        pp = PowerParams(n)
        if pp.warmup >= len(series):
            out.append(MaRangePoint(n, math.nan, math.nan, 0, -1))
            continue
        rep = power_report(series, pp, result)
        out.append(MaRangePoint(n, float(rep.r_signal[-1]), float(rep.r_noise[-1]), int(rep.flags[-1]), rep.first_defined))
    return out


# -- universe -----------------------------------------------------------------


@dataclass(frozen=True)
class UniverseRow:
    symbol: str
    window: int
    final_pnl: float = math.nan
    final_pnl_norm: float = math.nan
    r_signal: float = math.nan
    r_noise: float = math.nan
    dx: float = math.nan
    adx: float = math.nan
    adxr: float = math.nan
    excluded: bool = False
    reason: str = ""


@dataclass(frozen=True)
class UniverseResult:
    rows: dict[int, tuple[UniverseRow, ...]]

    @property
    def exclusions(self) -> list[tuple[str, int, str]]:
        return [
            (r.symbol, w, r.reason)
            for w, rows in sorted(self.rows.items())
            for r in rows
            if r.excluded
        ]


def _snapshot(values, how: str) -> float:
    if how == "final":
        return last_defined(values)
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    return float(v.mean()) if v.size else math.nan


def _symbol_rows(job) -> list[UniverseRow]:
    series, windows, params, level, mode, snapshot = job
    sym = series.symbol
    try:
        ungated = run(series, params)
        dmi = directional(series, params.atr_params)
    except PowerTrendError as exc:
        return [UniverseRow(sym, w, excluded=True, reason=str(exc)) for w in windows]
    ind = {k: _snapshot(getattr(dmi, k), snapshot) for k in ("dx", "adx", "adxr")}
    rows = []
    for w in windows:
        try:
            g = gated_run(series, params, PowerParams(w), level, mode, ungated=ungated)
        except PowerTrendError as exc:
            rows.append(UniverseRow(sym, w, excluded=True, reason=str(exc)))
            continue
        r = g.result
        rows.append(UniverseRow(
            sym, w,
            final_pnl=r.total_pnl_points,
            final_pnl_norm=r.total_pnl_norm,
            r_signal=_snapshot(g.report.r_signal, snapshot),
            r_noise=_snapshot(g.report.r_noise, snapshot),
            **ind,
        ))
    return rows


def run_universe(
    series_set: Sequence[BarSeries],
    spec: SweepSpec = SweepSpec(),
    params: VolSysParams = VolSysParams(multiplier=4.0),
    failures: Iterable[tuple[str, str]] = (),
    workers: int = 1,
    snapshot: str = "final",
) -> UniverseResult:
    """Per-symbol gated runs for every power window in ``spec``.

    ``failures`` are (symbol, reason) pairs from loading; they appear as
    excluded rows. Symbols are independent; output is sorted by symbol and
    does not depend on ``workers``.
    """
    if snapshot not in ("final", "mean"):
        raise ValueError("snapshot must be 'final' or 'mean'")
    failures = list(failures)
    if not series_set and not failures:
        raise DataError("empty universe")
    windows = spec.power_windows
    jobs = [(s, windows, params, spec.gate_level, spec.gate_mode, snapshot) for s in series_set]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_symbol = list(pool.map(_symbol_rows, jobs, chunksize=1))
    else:
        per_symbol = [_symbol_rows(j) for j in jobs]
    for sym, reason in failures:
        per_symbol.append([UniverseRow(sym, w, excluded=True, reason=reason) for w in windows])

    rows = {w: [] for w in windows}
    for group in per_symbol:
        for row in group:
            rows[row.window].append(row)
    return UniverseResult({w: tuple(sorted(rs, key=lambda r: r.symbol)) for w, rs in rows.items()})


UNIVERSE_COLUMNS = (
    "symbol", "final_pnl", "final_pnl_norm", "r_signal", "r_noise",
    "dx", "adx", "adxr", "excluded", "reason",
)


def universe_csv(rows: Sequence[UniverseRow]) -> str:
    return to_csv(UNIVERSE_COLUMNS, [asdict(r) for r in rows])


SWEEP_COLUMNS = ("window", "multiplier", "total_pnl", "total_pnl_norm", "trades", "error")


def sweep_csv(points: Sequence[SweepPoint]) -> str:
    return to_csv(SWEEP_COLUMNS, [asdict(p) for p in points])
