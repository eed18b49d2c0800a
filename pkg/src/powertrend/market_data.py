"""Bars, series, CSV ingestion and synthetic price generators."""
from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import DataError

SYNTH_KINDS = (
    "constant",
    "linear",
    "sine",
    "sine-plus-linear",
    "multi-sine-plus-linear",
    "zigzag",
    "random-walk",
)

REQUIRED_COLUMNS = ("date", "open", "high", "low", "close")

# Phase (steps above the trough) of the 9-bar, 8-step wire graphs that
# reproduce the four stop-loss examples, keyed by amplitude multiple.
WIRE_GRAPH_OFFSETS = {1: 0, 2: 1, 3: 2, 4: 0}
WIRE_GRAPH_BARS = 9


def _bar_problem(o, h, l, c):
    if not all(math.isfinite(v) for v in (o, h, l, c)):
        return "non-finite price"
    if min(o, h, l, c) <= 0:
        return "non-positive price"
    if l > h:
        return f"low {l} above high {h}"
    if not (l <= o <= h):
        return f"open {o} outside [low, high]"
    if not (l <= c <= h):
        return f"close {c} outside [low, high]"
    return None


@dataclass(frozen=True)
class Bar:
    timestamp: object
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        problem = _bar_problem(self.open, self.high, self.low, self.close)
        if problem:
            raise DataError(f"invalid bar at {self.timestamp}: {problem}")


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BarSeries:
    """Immutable OHLC series held column-wise as read-only numpy arrays.

    Timestamps are ``datetime64[D]`` for loaded data and ``int64`` indices
    for synthetic data.
    """

    symbol: str
    timestamps: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps)
        if ts.dtype.kind not in "iuM":
            ts = ts.astype("datetime64[D]")
        object.__setattr__(self, "timestamps", _readonly(ts, ts.dtype))
        for name in ("open", "high", "low", "close"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = len(self.timestamps)
        if not all(len(getattr(self, k)) == n for k in ("open", "high", "low", "close")):
            raise DataError("OHLC columns differ in length")
        bad = ~(
            np.isfinite(self.open)
            & np.isfinite(self.high)
            & np.isfinite(self.low)
            & np.isfinite(self.close)
        )
        bad |= (self.low <= 0) | (self.low > self.high)
        bad |= (self.open < self.low) | (self.open > self.high)
        bad |= (self.close < self.low) | (self.close > self.high)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            problem = _bar_problem(self.open[i], self.high[i], self.low[i], self.close[i])
            raise DataError(f"{self.symbol}: invalid bar at index {i}: {problem}")
        if n > 1 and not (self.timestamps[1:] > self.timestamps[:-1]).all():
            raise DataError(f"{self.symbol}: timestamps not strictly increasing")

    @classmethod
    def from_bars(cls, symbol: str, bars: Sequence[Bar]) -> "BarSeries":
        return cls(
            symbol,
            np.array([b.timestamp for b in bars]),
            [b.open for b in bars],
            [b.high for b in bars],
            [b.low for b in bars],
            [b.close for b in bars],
        )

    @classmethod
    def wire(cls, symbol: str, prices, timestamps=None) -> "BarSeries":
        """Single-price bars (open = high = low = close)."""
        p = np.asarray(prices, dtype=float)
        if timestamps is None:
            timestamps = np.arange(len(p), dtype=np.int64)
        return cls(symbol, timestamps, p, p, p, p)

    def __len__(self) -> int:
        return len(self.close)

    def __getitem__(self, i: int) -> Bar:
        return Bar(
            self.timestamps[i].item(),
            float(self.open[i]),
            float(self.high[i]),
            float(self.low[i]),
            float(self.close[i]),
        )

    def __iter__(self) -> Iterator[Bar]:
        for i in range(len(self)):
            yield self[i]

    def scaled(self, k: float) -> "BarSeries":
        """Every price multiplied by ``k`` (> 0)."""
        if not k > 0:
            raise DataError("scale factor must be positive")
        return BarSeries(
            self.symbol, self.timestamps,
            self.open * k, self.high * k, self.low * k, self.close * k,
        )

    def shifted(self, offset: float) -> "BarSeries":
        return BarSeries(
            self.symbol, self.timestamps,
            self.open + offset, self.high + offset, self.low + offset, self.close + offset,
        )

    def timestamp_labels(self) -> list[str]:
        if self.timestamps.dtype.kind == "M":
            return [str(t) for t in self.timestamps.astype("datetime64[D]")]
        return [str(int(t)) for t in self.timestamps]


# -- CSV ---------------------------------------------------------------------


def load_csv(
    path,
    columns: Mapping[str, str] | None = None,
    symbol: str | None = None,
) -> BarSeries:
    """Load an OHLC CSV into a date-sorted :class:`BarSeries`.

    ``columns`` maps the canonical names (date, open, high, low, close) to
    header names in the file; matching is case-insensitive. Rows are numbered
    from 1, counting data rows only.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    mapping = {k: k for k in REQUIRED_COLUMNS}
    if columns:
        mapping.update({k.lower(): v for k, v in columns.items()})
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        index = {h.strip().lower(): i for i, h in enumerate(header)}
        cols = {}
        for canon in REQUIRED_COLUMNS:
            name = mapping[canon].strip().lower()
            if name not in index:
                raise DataError(f"{path}: missing column {mapping[canon]!r}")
            cols[canon] = index[name]

        rows = []
        seen: dict[dt.date, int] = {}
        for rowno, rec in enumerate(reader, start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            try:
                date = dt.date.fromisoformat(rec[cols["date"]].strip())
                o, h, l, c = (float(rec[cols[k]]) for k in ("open", "high", "low", "close"))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}: row {rowno}: unparsable ({exc})") from None
            problem = _bar_problem(o, h, l, c)
            if problem:
                raise DataError(f"{path}: row {rowno}: {problem}")
            if date in seen:
                raise DataError(f"{path}: row {rowno}: duplicate date {date} (first at row {seen[date]})")
            seen[date] = rowno
            rows.append((date, o, h, l, c))

    rows.sort(key=lambda r: r[0])
    arr = np.array([r[1:] for r in rows], dtype=float).reshape(-1, 4)
    return BarSeries(
        symbol or path.stem,
        np.array([r[0] for r in rows], dtype="datetime64[D]"),
        arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3],
    )


SYNTH_EPOCH = np.datetime64("2000-01-03", "D")


def save_csv(series: BarSeries, path) -> None:
    """Write ``series`` as date,open,high,low,close.

    Integer timestamps are written as consecutive days from 2000-01-03.
    """
    ts = series.timestamps
    if ts.dtype.kind != "M":
        ts = SYNTH_EPOCH + ts.astype("timedelta64[D]")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REQUIRED_COLUMNS)
        for t, o, h, l, c in zip(ts, series.open, series.high, series.low, series.close):
            w.writerow([str(t), repr(float(o)), repr(float(h)), repr(float(l)), repr(float(c))])


def load_dir(path) -> tuple[list[BarSeries], list[tuple[str, str]]]:
    """Load every ``*.csv`` in a directory; returns (series, failures)."""
    loaded, failed = [], []
    for f in sorted(Path(path).glob("*.csv")):
        try:
            loaded.append(load_csv(f))
        except DataError as exc:
            failed.append((f.stem, str(exc)))
    return loaded, failed


# -- synthetic ---------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic price path.

    ``level`` is the starting price (the mean for sines); ``slope`` the price
    change per bar. Sine terms are ``amplitude * sin(2*pi*t/period + phase)``.
    For ``zigzag``, ``step`` is the per-bar move, ``amplitudes[0]`` the swing
    height (an integer multiple of ``step``), ``offset`` how many steps above
    the trough the path starts (it always moves up first) and ``warmup`` a
    lead-in of alternating bars that ends one step above ``level``, so that
    the indicator warm-up finishes on a down move into the first pattern bar.
    ``noise`` adds seeded Gaussian noise (price units; for ``random-walk`` it
    is the per-bar log-return volatility).
    """

    kind: str
    bars: int
    level: float = 100.0
    slope: float = 0.0
    amplitudes: tuple[float, ...] = ()
    periods: tuple[float, ...] = ()
    phases: tuple[float, ...] = ()
    step: float = 1.0
    offset: int = 0
    warmup: int = 0
    noise: float = 0.0
    seed: int = 0
    symbol: str = field(default="SYNTH", compare=False)

    def __post_init__(self):
        if self.kind not in SYNTH_KINDS:
            raise DataError(f"unknown synthetic kind {self.kind!r}")
        if self.bars < 1:
            raise DataError("bars must be positive")
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        nums = (self.level, self.slope, self.step, self.noise, *self.amplitudes, *self.periods, *self.phases)
        if not all(math.isfinite(v) for v in nums):
            raise DataError("synthetic parameters must be finite")
        n_terms = len(self.amplitudes)
        if self.kind in ("sine", "sine-plus-linear", "multi-sine-plus-linear", "zigzag") and n_terms == 0:
            raise DataError(f"{self.kind} needs an amplitude")
        if self.kind in ("sine", "sine-plus-linear") and n_terms != 1:
            raise DataError(f"{self.kind} takes exactly one amplitude")
        if self.kind != "zigzag" and n_terms and len(self.periods) != n_terms:
            raise DataError("one period per amplitude required")
        if self.phases and len(self.phases) != n_terms:
            raise DataError("one phase per amplitude required")
        if any(p <= 0 for p in self.periods):
            raise DataError("periods must be positive")
        if self.kind == "zigzag":
            if self.step <= 0:
                raise DataError("zigzag step must be positive")
            m = self.amplitudes[0] / self.step
            if m < 1 or abs(m - round(m)) > 1e-9:
                raise DataError("zigzag amplitude must be a positive multiple of step")
            if not 0 <= self.offset <= round(m):
                raise DataError("zigzag offset must lie within the swing")
        if self.noise < 0:
            raise DataError("noise must be non-negative")

    @property
    def swing(self) -> int:
        """Zigzag amplitude in steps."""
        return int(round(self.amplitudes[0] / self.step))

    @classmethod
    def parse(cls, text: str, symbol: str = "SYNTH") -> "SyntheticSpec":
        """Parse the inline ``kind:param:...`` form.

        constant:level:bars
        linear:start:slope:bars
        sine:level:amplitude:period:bars
        sine-plus-linear:level:slope:amplitude:period:bars
        multi-sine-plus-linear:level:slope:bars:amp@period[@phase],...
        zigzag:start:step:amplitude:bars[:offset[:warmup]]
        random-walk:start:volatility:bars[:seed[:drift]]

        A leading ``@`` reads a JSON file of field names instead.
        """
        if text.startswith("@"):
            return load_synth_file(text[1:], symbol=symbol)
        kind, _, rest = text.partition(":")
        parts = rest.split(":") if rest else []
        try:
            if kind == "constant":
                level, bars = parts
                return cls(kind, int(bars), level=float(level), symbol=symbol)
            if kind == "linear":
                start, slope, bars = parts
                return cls(kind, int(bars), level=float(start), slope=float(slope), symbol=symbol)
            if kind == "sine":
                level, amp, period, bars = parts
                return cls(kind, int(bars), level=float(level), amplitudes=(float(amp),),
                           periods=(float(period),), symbol=symbol)
            if kind == "sine-plus-linear":
                level, slope, amp, period, bars = parts
                return cls(kind, int(bars), level=float(level), slope=float(slope),
                           amplitudes=(float(amp),), periods=(float(period),), symbol=symbol)
            if kind == "multi-sine-plus-linear":
                level, slope, bars, terms = parts
                amps, periods, phases = [], [], []
                for term in terms.split(","):
                    bits = [float(b) for b in term.split("@")]
                    amps.append(bits[0])
                    periods.append(bits[1])
                    phases.append(bits[2] if len(bits) > 2 else 0.0)
                return cls(kind, int(bars), level=float(level), slope=float(slope),
                           amplitudes=tuple(amps), periods=tuple(periods), phases=tuple(phases),
                           symbol=symbol)
            if kind == "zigzag":
                start, step, amp, bars, *extra = parts
                if len(extra) > 2:
                    raise ValueError("too many fields")
                offset = int(extra[0]) if extra else 0
                warmup = int(extra[1]) if len(extra) > 1 else 0
                return cls(kind, int(bars), level=float(start), step=float(step),
                           amplitudes=(float(amp),), offset=offset, warmup=warmup, symbol=symbol)
            if kind == "random-walk":
                start, vol, bars, *extra = parts
                if len(extra) > 2:
                    raise ValueError("too many fields")
                seed = int(extra[0]) if extra else 0
                drift = float(extra[1]) if len(extra) > 1 else 0.0
                return cls(kind, int(bars), level=float(start), noise=float(vol), seed=seed,
                           slope=drift, symbol=symbol)
        except ValueError as exc:
            raise DataError(f"bad synthetic spec {text!r}: {exc}") from None
        raise DataError(f"unknown synthetic kind {kind!r}")


def load_synth_file(path, symbol: str = "SYNTH") -> SyntheticSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read synthetic spec {path}: {exc}") from None
    raw.setdefault("symbol", symbol)
    for key in ("amplitudes", "periods", "phases"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return SyntheticSpec(**raw)
    except TypeError as exc:
        raise DataError(f"bad synthetic spec {path}: {exc}") from None


def wire_graph_spec(multiple: int, step: float = 1.0, start: float = 100.0, warmup: int = 14) -> SyntheticSpec:
    """Zigzag reproducing the stop-loss examples for swing ``multiple * step``.

    Eight moves of one ``step`` each, starting and ending at ``start``; the
    first pattern move is up. ``warmup`` should equal the ATR period so that
    trading starts on the first pattern bar with ATR == step.
    """
    if multiple not in WIRE_GRAPH_OFFSETS:
        raise DataError("wire graph fixtures exist for multiples 1-4")
    return SyntheticSpec(
        "zigzag",
        WIRE_GRAPH_BARS,
        level=start,
        step=step,
        amplitudes=(multiple * step,),
        offset=WIRE_GRAPH_OFFSETS[multiple],
        warmup=warmup,
        symbol=f"WIRE{multiple}",
    )


def _zigzag(spec: SyntheticSpec) -> np.ndarray:
    m = spec.swing
    k = np.arange(spec.bars) + spec.offset
    r = k % (2 * m)
    height = np.where(r <= m, r, 2 * m - r) - spec.offset
    body = spec.level + height * spec.step
    # lead-in alternates and ends one step above the first pattern bar
    lead = spec.level + spec.step * ((spec.warmup - 1 - np.arange(spec.warmup)) % 2 == 0)
    return np.concatenate([lead, body])


def generate(spec: SyntheticSpec) -> BarSeries:
    """Deterministic synthetic series for ``spec``."""
    t = np.arange(spec.bars, dtype=float)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "random-walk":
        steps = spec.slope + spec.noise * rng.standard_normal(spec.bars)
        steps[0] = 0.0
        close = spec.level * np.exp(np.cumsum(steps))
        open_ = np.concatenate([[spec.level], close[:-1]])
        wick = spec.noise * np.abs(rng.standard_normal((2, spec.bars)))
        high = np.maximum(open_, close) * np.exp(wick[0])
        low = np.minimum(open_, close) * np.exp(-wick[1])
        ts = np.arange(spec.bars, dtype=np.int64)
        return BarSeries(spec.symbol, ts, open_, high, low, close)

    if spec.kind == "zigzag":
        price = _zigzag(spec)
    else:
        price = spec.level + spec.slope * t
        phases = spec.phases or (0.0,) * len(spec.amplitudes)
        for a, p, ph in zip(spec.amplitudes, spec.periods, phases):
            price = price + a * np.sin(2 * np.pi * t / p + ph)
    if spec.noise > 0:
        price = price + spec.noise * rng.standard_normal(price.shape[0])
    if not (price > 0).all():
        i = int(np.flatnonzero(~(price > 0))[0])
        raise DataError(f"synthetic spec drives price to {price[i]} at bar {i}")
    return BarSeries.wire(spec.symbol, price)


def with_symbol(spec: SyntheticSpec, symbol: str) -> SyntheticSpec:
    return replace(spec, symbol=symbol)
