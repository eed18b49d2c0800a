"""``powertrend`` command line.

Every subcommand writes data files (CSV or JSON) into ``--out``; nothing is
plotted. Exit codes: 0 success, 1 usage error, 2 data error, 3 computation
degeneracy.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import (
    GATE_MODES,
    SWEEP_COLUMNS,
    UNIVERSE_COLUMNS,
    SweepSpec,
    default_multipliers,
    gated_run,
    run_universe,
    sweep_ma_range,
    sweep_multiplier,
)
from .errors import DataError, DegenerateError, PowerTrendError
from .market_data import SyntheticSpec, generate, load_csv, load_dir
from .power import REPORT_COLUMNS, PowerParams, power_report, report_rows
from .stats import ols
from .tables import to_csv, to_json
from .volsys import TRADE_COLUMNS, VolSysParams, run, trade_rows
from .wilder import WilderParams, atr, directional, true_range

EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument helpers ----------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    """``x``, ``a,b,c`` or inclusive ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(n)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _int_grid(text: str) -> list[int]:
    if ":" in text:
        try:
            start, stop, step = (int(t) for t in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
        return list(range(start, stop + 1, step))
    return _int_list(text)


def _add_common(p, windows="30,50,100", mult=None, gate_mode="off"):
    p.add_argument("--period", type=int, default=14, help="Wilder smoothing period (default 14)")
    p.add_argument("--window", "--windows", type=_int_list, default=_int_list(windows),
                   help=f"power window(s), comma separated (default {windows})")
    p.add_argument("--ma-window", type=int, default=None, help="moving-average range (default: window)")
    p.add_argument("--mult", type=_grid, default=mult,
                   help="ATR multiplier: value, list or start:stop:step")
    p.add_argument("--direction", choices=("auto", "long", "short"), default="auto")
    p.add_argument("--gate", type=float, default=4.0, help="signal-ratio gate level (default 4)")
    p.add_argument("--gate-mode", choices=GATE_MODES, default=gate_mode)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generated-at header")


def _add_input(p, allow_dir=False):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--csv", type=Path, help="OHLC CSV file")
    g.add_argument("--synth", help="synthetic spec kind:param:... or @spec.json")
    if allow_dir:
        g.add_argument("--dir", type=Path, help="directory of OHLC CSV files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="powertrend", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("indicators", help="TR, ATR, DI, DX, ADX, ADXR per bar")
    _add_input(p)
    _add_common(p)

    p = sub.add_parser("power", help="power report per window")
    _add_input(p)
    _add_common(p, mult=[3.0])

    p = sub.add_parser("backtest", help="one volatility-system run; trades + summary")
    _add_input(p)
    _add_common(p, windows="30", mult=[3.0])

    p = sub.add_parser("sweep", help="P&L versus ATR multiplier")
    _add_input(p)
    _add_common(p, mult=list(default_multipliers()))

    p = sub.add_parser("ma-sweep", help="final-bar power ratios versus MA range")
    _add_input(p)
    _add_common(p, mult=[3.0])
    p.add_argument("--ranges", type=_int_grid, default=list(range(10, 401, 10)),
                   help="MA ranges: list or start:stop:step (default 10:400:10)")

    p = sub.add_parser("universe", help="gated runs over a directory of symbols")
    _add_input(p, allow_dir=True)
    _add_common(p, mult=[4.0], gate_mode="arm-once")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--snapshot", choices=("final", "mean"), default="final",
                   help="indicator value fed to regressions (default final)")

    p = sub.add_parser("regress", help="OLS of one universe column on another")
    p.add_argument("--in", dest="input", type=Path, required=True, help="universe CSV")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--no-timestamp", action="store_true")
    return parser


# -- output ----------------------------------------------------------------------


def _stamp(args) -> str | None:
    if args.no_timestamp:
        return None
    now = dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat()
    return f"generated {now} by powertrend {__version__}"


def _write(args, name: str, columns, rows) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"{name}.{args.format}"
    emit = to_csv if args.format == "csv" else to_json
    path.write_text(emit(columns, rows, _stamp(args)))
    return path


def _write_doc(args, name: str, doc: dict) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"{name}.json"
    stamp = _stamp(args)
    if stamp:
        doc = {"generated": stamp, **doc}
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


# -- commands ----------------------------------------------------------------------


def _series(args):
    if args.csv is not None:
        return load_csv(args.csv)
    return generate(SyntheticSpec.parse(args.synth))


def _single_mult(args) -> float:
    if not args.mult or len(args.mult) != 1:
        raise UsageError("this command takes a single --mult value")
    return args.mult[0]


def _volsys(args, mult: float) -> VolSysParams:
    return VolSysParams(mult, WilderParams(args.period), args.direction)


def cmd_indicators(args):
    s = _series(args)
    wp = WilderParams(args.period)
    tr, a, d = true_range(s), atr(s, wp), directional(s, wp)
    labels = s.timestamp_labels()
    cols = ("index", "date", "open", "high", "low", "close", "tr", "atr",
            "plus_di", "minus_di", "dx", "adx", "adxr", "warmup")
    rows = []
    for i in range(len(s)):
        vals = {"tr": tr[i], "atr": a[i], "plus_di": d.plus_di[i], "minus_di": d.minus_di[i],
                "dx": d.dx[i], "adx": d.adx[i], "adxr": d.adxr[i]}
        rows.append({
            "index": i, "date": labels[i],
            "open": float(s.open[i]), "high": float(s.high[i]),
            "low": float(s.low[i]), "close": float(s.close[i]),
            **{k: float(v) for k, v in vals.items()},
            "warmup": any(math.isnan(v) for v in vals.values()),
        })
    return [_write(args, "indicators", cols, rows)]


def cmd_power(args):
    s = _series(args)
    result = run(s, _volsys(args, _single_mult(args)))
    written = []
    for w in args.window:
        rep = power_report(s, PowerParams(w, args.ma_window), result)
        written.append(_write(args, f"power_w{w}", REPORT_COLUMNS, report_rows(s, rep)))
    return written


def cmd_backtest(args):
    s = _series(args)
    params = _volsys(args, _single_mult(args))
    pp = PowerParams(args.window[0], args.ma_window) if args.gate_mode != "off" else None
    g = gated_run(s, params, pp, args.gate, args.gate_mode)
    r = g.result
    summary = {
        "symbol": s.symbol,
        "bars": len(s),
        "multiplier": params.multiplier,
        "period": args.period,
        "gate_mode": args.gate_mode,
        "gate_level": args.gate if args.gate_mode != "off" else None,
        "window": pp.window if pp else None,
        "trades": r.trade_count,
        "realized_pnl": r.realized_pnl,
        "open_pnl": r.open_pnl,
        "total_pnl": r.total_pnl_points,
        "total_pnl_norm": r.total_pnl_norm,
    }
    return [_write(args, "trades", TRADE_COLUMNS, trade_rows(r)), _write_doc(args, "backtest", summary)]


def cmd_sweep(args):
    s = _series(args)
    spec = SweepSpec(tuple(args.mult), tuple(args.window), args.gate, args.gate_mode)
    points = sweep_multiplier(s, spec, _volsys(args, spec.multipliers[0]), args.ma_window)
    return [_write(args, "sweep", SWEEP_COLUMNS, [asdict(p) for p in points])]


def cmd_ma_sweep(args):
    s = _series(args)
    points = sweep_ma_range(s, args.ranges, _volsys(args, _single_mult(args)))
    cols = ("range", "r_signal", "r_noise", "flags", "first_defined")
    return [_write(args, "ma_sweep", cols, [asdict(p) for p in points])]


def cmd_universe(args):
    if args.dir is not None:
        if not args.dir.is_dir():
            raise DataError(f"no such directory: {args.dir}")
        series, failures = load_dir(args.dir)
    else:
        series, failures = [_series(args)], []
    spec = SweepSpec((_single_mult(args),), tuple(args.window), args.gate, args.gate_mode)
    result = run_universe(series, spec, _volsys(args, _single_mult(args)), failures,
                          workers=args.workers, snapshot=args.snapshot)
    written = [
        _write(args, f"universe_w{w}", UNIVERSE_COLUMNS, [asdict(r) for r in rows])
        for w, rows in sorted(result.rows.items())
    ]
    excl = [{"symbol": s, "window": w, "reason": why} for s, w, why in result.exclusions]
    written.append(_write(args, "exclusions", ("symbol", "window", "reason"), excl))
    return written


def _read_columns(path: Path, x: str, y: str):
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        records = doc["rows"] if isinstance(doc, dict) else doc
    else:
        lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
        records = list(csv.DictReader(lines))
    if records and (x not in records[0] or y not in records[0]):
        raise UsageError(f"columns {x!r}/{y!r} not in {path}")

    def num(v):
        if v is None or v == "":
            return math.nan
        try:
            return float(v)
        except ValueError:
            raise DataError(f"{path}: non-numeric value {v!r}") from None

    keep = [r for r in records if str(r.get("excluded", "false")).lower() not in ("true", "1")]
    return np.array([num(r[x]) for r in keep]), np.array([num(r[y]) for r in keep])


def cmd_regress(args):
    xs, ys = _read_columns(args.input, args.x, args.y)
    res = ols(xs, ys)
    doc = {"x": args.x, "y": args.y, **res.to_dict()}
    if args.format == "csv":
        cols = ("x", "y", "slope", "intercept", "r_squared", "n", "dropped")
        return [_write(args, "regress", cols, [doc])]
    return [_write_doc(args, "regress", doc)]


COMMANDS = {
    "indicators": cmd_indicators,
    "power": cmd_power,
    "backtest": cmd_backtest,
    "sweep": cmd_sweep,
    "ma-sweep": cmd_ma_sweep,
    "universe": cmd_universe,
    "regress": cmd_regress,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for path in COMMANDS[args.command](args):
            print(path)
    except UsageError as exc:
        print(f"powertrend: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateError as exc:
        print(f"powertrend: degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (PowerTrendError, OSError) as exc:
        print(f"powertrend: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:  # parameter validation
        print(f"powertrend: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
