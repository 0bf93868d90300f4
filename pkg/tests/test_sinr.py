import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavloc.channel import LinkState
from uavloc.errors import ConfigError
from uavloc.sinr import (
    ActivityDraw,
    RadioParams,
    critical_sinr_db,
    draw_activity,
    noise_power,
    rank_by_mean_power,
    sinr_for_target,
)

RADIO = RadioParams(tx_power_dbm=0.0, bandwidth_hz=10e6, noise_figure_db=9.0)  # noise -95 dBm


def snapshot_from_rx(rx_dbm, radio=RADIO):
    """Links whose received power (tx - loss) equals ``rx_dbm``; no shadowing."""
    links = [LinkState(1.0, 1.0, True, radio.tx_power_dbm - r, 0.0) for r in rx_dbm]
    return rank_by_mean_power(links, radio)


def test_noise_power():
    assert noise_power(10e6, 9.0) == pytest.approx(-95.0)
    assert noise_power(1.0, 0.0) == pytest.approx(-174.0)
    assert noise_power(10e6, 0.0) == pytest.approx(-104.0)
    assert RADIO.noise_power_dbm == pytest.approx(-95.0)
    with pytest.raises(ConfigError):
        noise_power(0.0, 9.0)


def test_rank_ties_keep_index_order():
    snap = snapshot_from_rx([-90.0] * 5)
    np.testing.assert_array_equal(snap.order, range(5))


def test_rank_by_loss():
    links = [LinkState(1, 1, True, loss, 0.0) for loss in (100.0, 90.0, 95.0)]
    np.testing.assert_array_equal(rank_by_mean_power(links, RADIO).order, [1, 2, 0])


def test_rank_ignores_shadowing():
    links = [LinkState(1, 1, True, 100.0, 20.0), LinkState(1, 1, True, 90.0, -20.0)]
    np.testing.assert_array_equal(rank_by_mean_power(links, RADIO).order, [1, 0])


def test_activity_extremes():
    rng = np.random.default_rng(0)
    assert not draw_activity(4, 19, 0.0, 1.0, rng).r.any()
    act = draw_activity(4, 19, 1.0, 1.0, rng)
    assert act.r.all() and act.s.all()
    assert len(act.r) == 4 and len(act.s) == 15


def test_activity_frequency():
    rng = np.random.default_rng(1)
    r = np.array([draw_activity(3, 5, 0.5, 0.2, rng).r for _ in range(100_000)])
    assert np.all((r.mean(axis=0) > 0.495) & (r.mean(axis=0) < 0.505))


@pytest.mark.parametrize("b, t, p, q", [(0, 5, 0.5, 0.5), (6, 5, 0.5, 0.5), (2, 5, 1.5, 0.5), (2, 5, 0.5, -0.1)])
def test_activity_validation(b, t, p, q):
    with pytest.raises(ConfigError):
        draw_activity(b, t, p, q, np.random.default_rng(0))


def test_interference_free_sinr():
    snap = snapshot_from_rx([-80.0, -85.0])
    act = ActivityDraw(r=np.array([True]), s=np.array([False]))
    assert 10 * math.log10(sinr_for_target(1, 1, snap, act, RADIO)) == pytest.approx(15.0)


def test_full_participation_has_no_outside_interference():
    snap = snapshot_from_rx([-80.0, -85.0, -90.0])
    act = ActivityDraw(r=np.zeros(3, bool), s=np.zeros(0, bool))
    assert sinr_for_target(2, 3, snap, act, RADIO) == pytest.approx(10 ** (-8.5) / 10 ** (-9.5))


def test_three_bs_toy():
    snap = snapshot_from_rx([-80.0, -85.0, -90.0])
    act = ActivityDraw(r=np.ones(2, bool), s=np.ones(1, bool))
    # 1e-8 / (10^-8.5 + 1e-9 + 10^-9.5)
    assert sinr_for_target(1, 2, snap, act, RADIO) == pytest.approx(2.2328877713380336, rel=1e-12)


def test_target_rank_range():
    snap = snapshot_from_rx([-80.0, -85.0, -90.0])
    act = ActivityDraw(r=np.ones(2, bool), s=np.ones(1, bool))
    with pytest.raises(ValueError):
        sinr_for_target(3, 2, snap, act, RADIO)


rx_lists = st.lists(st.floats(-130.0, -60.0), min_size=2, max_size=7)


@given(rx=rx_lists, data=st.data())
def test_activating_interferer_lowers_sinr(rx, data):
    snap = snapshot_from_rx(rx)
    t = len(rx)
    b = data.draw(st.integers(1, t))
    i = data.draw(st.integers(1, b))
    flags = np.array(data.draw(st.lists(st.booleans(), min_size=t, max_size=t)))
    others = [k for k in range(t) if k != i - 1 and not flags[k]]
    if not others:
        return
    k = data.draw(st.sampled_from(others))
    before = sinr_for_target(i, b, snap, ActivityDraw(flags[:b], flags[b:]), RADIO)
    flags[k] = True
    after = sinr_for_target(i, b, snap, ActivityDraw(flags[:b], flags[b:]), RADIO)
    assert after < before
    assert before <= 10 ** (sorted(rx, reverse=True)[i - 1] / 10) / RADIO.noise_power_mw * (1 + 1e-12)


@given(rx=rx_lists, data=st.data())
def test_partition_invariance(rx, data):
    # for fixed on/off flags only which BSs transmit matters, not the I1/I2 split
    snap = snapshot_from_rx(rx)
    t = len(rx)
    flags = np.array(data.draw(st.lists(st.booleans(), min_size=t, max_size=t)))
    values = [
        sinr_for_target(1, b, snap, ActivityDraw(flags[:b], flags[b:]), RADIO) for b in range(1, t + 1)
    ]
    assert values == pytest.approx([values[0]] * t, rel=1e-12)


@given(rx=rx_lists, data=st.data())
def test_db_round_trip(rx, data):
    snap = snapshot_from_rx(rx)
    t = len(rx)
    b = data.draw(st.integers(1, t))
    flags = np.ones(t, bool)
    lin = sinr_for_target(1, b, snap, ActivityDraw(flags[:b], flags[b:]), RADIO)
    ordered = sorted(rx, reverse=True)
    denom_dbm = 10 * math.log10(sum(10 ** (r / 10) for r in ordered[1:]) + RADIO.noise_power_mw)
    via_db = 10 ** ((ordered[0] - denom_dbm) / 10)
    assert via_db == pytest.approx(lin, rel=1e-9)


@settings(max_examples=30)
@given(rx=rx_lists, p=st.floats(0, 1), q=st.floats(0, 1), seed=st.integers(0, 2**32))
def test_batched_critical_matches_scalar(rx, p, q, seed):
    snap = snapshot_from_rx(rx)
    t = len(rx)
    rx_sorted = snap.rx_power_mw(RADIO)[None, :]
    crit = critical_sinr_db(rx_sorted, RADIO.noise_power_mw, p, q, np.random.default_rng(seed))
    rng = np.random.default_rng(seed)
    deterministic = p in (0.0, 1.0) and q in (0.0, 1.0)
    for b in range(1, t + 1):
        worst = math.inf
        for i in range(1, b + 1):
            if deterministic:
                act = ActivityDraw(np.full(b, p == 1.0), np.full(t - b, q == 1.0))
            else:
                act = draw_activity(b, t, p, q, rng)
            worst = min(worst, sinr_for_target(i, b, snap, act, RADIO))
        assert crit[0, b - 1] == pytest.approx(10 * math.log10(worst), abs=1e-9)
