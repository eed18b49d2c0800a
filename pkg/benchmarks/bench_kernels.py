"""Time each kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--bars 5000] [--repeat 5]

Numba timings exclude the first (compiling) call.
"""
import argparse
import timeit

import numpy as np

from powertrend.kernels import numba_backend, numpy_backend
from powertrend.market_data import SyntheticSpec, generate


def cases(series, window, ma_window):
    h, l, c = series.high, series.low, series.close
    tr = numpy_backend.true_range(h, l, c)
    atr = numpy_backend.wilder_smooth(tr, 14, 1)
    ma = numpy_backend.rolling_mean(c, ma_window)
    gate = np.ones(len(c), dtype=np.bool_)
    return {
        "true_range": lambda k: k.true_range(h, l, c),
        "directional_movement": lambda k: k.directional_movement(h, l),
        "wilder_smooth": lambda k: k.wilder_smooth(tr, 14, 1),
        "rolling_mean": lambda k: k.rolling_mean(c, ma_window),
        "window_power": lambda k: k.window_power(ma, c, window),
        "window_excess": lambda k: k.window_excess(c, ma_window, window),
        "volsys_run": lambda k: k.volsys_run(c, atr, 3.0, 0, gate),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bars", type=int, default=5000)
    ap.add_argument("--window", type=int, default=50)
    ap.add_argument("--ma-window", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    series = generate(SyntheticSpec("random-walk", args.bars, noise=0.01, seed=1))
    backends = {"numpy": numpy_backend}
    if numba_backend is not None:
        backends["numba"] = numba_backend
    print(f"{args.bars} bars, window {args.window}, MA {args.ma_window}; best of {args.repeat}, ms")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases(series, args.window, args.ma_window).items():
        times = {}
        for label, backend in backends.items():
            fn(backend)  # compile / warm caches
            times[label] = min(timeit.repeat(lambda: fn(backend), number=1, repeat=args.repeat)) * 1e3
        speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        print(f"{name:<22}" + "".join(f"{times[b]:>12.3f}" for b in backends) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
