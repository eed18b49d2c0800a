import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_walk
from powertrend.errors import WarmupError
from powertrend.market_data import BarSeries, SyntheticSpec, generate, wire_graph_spec
from powertrend.volsys import Trade, VolSysParams, run, sic_series, trades_csv
from powertrend.wilder import WilderParams

WIRE_TOTALS = {1: -8, 2: -2, 3: 0, 4: 4}


def wire_run(m, step=1.0, direction="short"):
    s = generate(wire_graph_spec(m, step=step, warmup=14))
    return s, run(s, VolSysParams(1.0, WilderParams(14), direction))


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("step", [1.0, 2.0, 0.25])
def test_wire_graph_totals(m, step):
    _, r = wire_run(m, step)
    assert r.total_pnl_points == pytest.approx(WIRE_TOTALS[m] * step, abs=1e-9 * step)


def test_wire_graph_auto_starts_short():
    for m in WIRE_TOTALS:
        _, r = wire_run(m, direction="auto")
        assert r.all_trades[0].direction == "short"
        assert r.total_pnl_points == WIRE_TOTALS[m]


def test_four_step_swing_segments():
    # stopped out of the sell, the buy two steps higher, then short to the finish
    _, r = wire_run(4)
    assert [t.pnl_points for t in r.all_trades] == [-1.0, 2.0, 3.0]
    assert r.realized_pnl == 1.0 and r.open_pnl == 3.0


def test_one_step_swing_loses_every_step():
    _, r = wire_run(1)
    assert [t.pnl_points for t in r.trades] == [-1.0] * 8


def test_two_step_swing_sic_hand_replay():
    s, r = wire_run(2)
    assert np.isnan(sic_series(r)[:14]).all()
    assert sic_series(r)[14:].tolist() == [100, 101, 100, 99, 100, 101, 100, 99, 100]
    assert [t.direction for t in r.all_trades] == ["short", "long", "short", "long", "short", "long"]


def test_rising_series_single_long():
    s = generate(SyntheticSpec("linear", 60, level=100, slope=1))
    for mult in (0.1, 1.0, 3.0, 8.0):
        r = run(s, VolSysParams(mult))
        assert r.trades == ()
        assert r.open_trade.direction == "long"
        assert r.total_pnl_points == s.close[-1] - r.open_trade.entry_price


def test_rising_sic_is_close():
    s = generate(SyntheticSpec("linear", 40, level=100, slope=1))
    r = run(s, VolSysParams(2.0, WilderParams(5)))
    np.testing.assert_array_equal(r.sic[5:], s.close[5:])


def test_constant_series_holds():
    s = generate(SyntheticSpec("constant", 50))
    r = run(s)
    assert r.trade_count == 1
    assert (r.sic[14:] == 100).all()
    assert r.total_pnl_points == 0


def test_explicit_directions():
    s = generate(SyntheticSpec("linear", 40, level=100, slope=1))
    r = run(s, VolSysParams(1.0, WilderParams(5), "short"))
    assert r.trades[0].direction == "short"
    assert r.open_trade.direction == "long"


def test_warmup_and_params():
    with pytest.raises(WarmupError):
        run(generate(SyntheticSpec("constant", 14)))
    with pytest.raises(ValueError):
        VolSysParams(0.0)
    with pytest.raises(ValueError):
        VolSysParams(1.0, initial_direction="up")


def test_gate_all_false_no_trades():
    s = random_walk(1)
    r = run(s, VolSysParams(2.0), np.zeros(len(s), dtype=bool))
    assert r.trade_count == 0 and r.total_pnl_points == 0 and r.total_pnl_norm == 0
    assert (r.position == 0).all()


def test_gate_blocks_entries_only():
    s = random_walk(2, bars=300)
    gate = np.zeros(len(s), dtype=bool)
    gate[100:150] = True
    r = run(s, VolSysParams(1.0), gate)
    for t in r.all_trades:
        assert gate[t.entry_index]
    # a position opened inside the window may run past it
    assert any(t.exit_index >= 150 for t in r.all_trades)


def test_blocked_flip_reenters_reversed():
    s = random_walk(3, bars=300)
    ungated = run(s, VolSysParams(1.0))
    first = ungated.trades[0]
    gate = np.ones(len(s), dtype=bool)
    gate[first.exit_index] = False
    r = run(s, VolSysParams(1.0), gate)
    assert r.trades[0] == first
    second = r.all_trades[1]
    assert second.entry_index == first.exit_index + 1
    assert second.direction != first.direction


def test_gate_shape_checked():
    s = random_walk(0)
    with pytest.raises(ValueError):
        run(s, VolSysParams(), [True, False])


def replay_checks(s, r, mult):
    """Flip correctness and SIC monotonicity from first principles."""
    close, atr = s.close, r.atr
    for t in r.all_trades:
        closed = t in r.trades
        end = t.exit_index
        sign = 1 if t.direction == "long" else -1
        extreme = close[t.entry_index]
        for u in range(t.entry_index + 1, end + 1):
            extreme = max(extreme, close[u]) if sign > 0 else min(extreme, close[u])
            stop = extreme - sign * mult * atr[u]
            breached = (close[u] <= stop) if sign > 0 else (close[u] >= stop)
            if u < end or not closed:
                assert not breached, (t, u)
                assert r.sic[u] == extreme
            else:
                assert breached, (t, u)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("mult", [0.5, 2.0, 4.0])
def test_flip_correctness(seed, mult):
    s = random_walk(seed, bars=250)
    r = run(s, VolSysParams(mult))
    replay_checks(s, r, mult)
    # trades chain: each reversal enters on the previous exit bar
    trades = r.all_trades
    for a, b in zip(trades, trades[1:]):
        assert b.entry_index == a.exit_index
        assert b.entry_price == a.exit_price
        assert b.direction != a.direction


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.01, 0.5, 1000.0]), st.floats(0.3, 6.0))
def test_scale_equivariance(seed, k, mult):
    s = random_walk(seed, bars=150)
    a = run(s, VolSysParams(mult))
    b = run(s.scaled(k), VolSysParams(mult))
    assert [(t.entry_index, t.exit_index) for t in a.all_trades] == [
        (t.entry_index, t.exit_index) for t in b.all_trades
    ]
    for ta, tb in zip(a.all_trades, b.all_trades):
        assert tb.pnl_points == pytest.approx(k * ta.pnl_points, rel=1e-12, abs=1e-12 * k)


def test_trade_pnl_sign():
    assert Trade("long", 0, 1, 10.0, 12.0).pnl_points == 2.0
    assert Trade("short", 0, 1, 10.0, 12.0).pnl_points == -2.0


def test_trades_csv():
    _, r = wire_run(4)
    lines = trades_csv(r).splitlines()
    assert lines[0] == "direction,entry_index,entry_price,exit_index,exit_price,pnl_points"
    assert lines[1] == "short,14,100.0,15,101.0,-1.0"
    assert len(lines) == 4


def test_position_series():
    s = BarSeries.wire("W", [100.0, 101.0, 102.0, 103.0, 104.0])
    r = run(s, VolSysParams(1.0, WilderParams(1)))
    assert r.position.tolist() == [0, 1, 1, 1, 1]


@pytest.mark.parametrize("seed", range(6))
def test_gated_trades_are_late_copies(seed):
    s = random_walk(seed, bars=300)
    rng = np.random.default_rng(seed)
    gate = rng.random(len(s)) < 0.2
    full = run(s, VolSysParams(1.5))
    gated = run(s, VolSysParams(1.5), gate)
    spans = {(t.direction, t.exit_index): t for t in full.trades}
    for t in gated.trades:
        u = spans[(t.direction, t.exit_index)]
        assert u.entry_index <= t.entry_index and gate[t.entry_index]
    assert gated.trade_count <= full.trade_count
