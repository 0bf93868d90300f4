import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavloc.channel import (
    ChannelParams,
    los_breakpoint,
    los_probability,
    path_loss_los,
    path_loss_nlos,
    sample_link,
    shadowing_std,
)
from uavloc.errors import DomainError

# expected values evaluated independently with mpmath at 30 digits
P_LOS_500_120 = 0.9548474921375038
L_LOS_500_2 = 93.39794000867204
L_NLOS_500_100_2 = 107.3294122380809
L_NLOS_500_30_2 = 117.2080505839963
STD_LOS_30 = 3.8065161185595356
STD_LOS_120 = 2.1016323792832146


def test_los_short_link_is_los():
    assert los_probability(10.0, 30.0) == 1.0
    assert los_breakpoint(30.0) == 18.0
    assert los_probability(18.0, 30.0) == 1.0
    assert los_probability(0.0, 60.0) == 1.0


def test_los_probability_value():
    assert los_probability(500.0, 120.0) == pytest.approx(P_LOS_500_120, rel=1e-12)


def test_los_probability_vectorised():
    d = np.array([10.0, 500.0])
    np.testing.assert_allclose(los_probability(d, 120.0), [1.0, P_LOS_500_120])


@pytest.mark.parametrize("d, h", [(math.nan, 30.0), (100.0, math.inf), (-1.0, 30.0), (100.0, 0.0)])
def test_los_domain(d, h):
    with pytest.raises(DomainError):
        los_probability(d, h)


def test_los_monotone_in_distance():
    d = np.linspace(1, 1500, 3000)
    for h in (30, 60, 90, 120):
        assert np.all(np.diff(los_probability(d, h)) <= 1e-15)


def test_los_monotone_in_altitude():
    h = np.linspace(30, 120, 500)
    for d in (20, 100, 300, 600, 1000, 1500):
        p = los_probability(np.full_like(h, d), h)
        assert np.all(np.diff(p) >= -1e-15)


def test_path_loss_los_values():
    assert path_loss_los(1.0, 1.0) == pytest.approx(28.0)
    assert path_loss_los(500.0, 2.0) == pytest.approx(L_LOS_500_2, abs=1e-9)
    slope = path_loss_los(1000.0, 2.0) - path_loss_los(500.0, 2.0)
    assert slope == pytest.approx(22 * math.log10(2))


def test_path_loss_nlos_values():
    assert path_loss_nlos(1.0, 10.0, 3.0 / (40 * math.pi)) == pytest.approx(-17.5)
    assert path_loss_nlos(500.0, 100.0, 2.0) == pytest.approx(L_NLOS_500_100_2, abs=1e-9)
    assert path_loss_nlos(500.0, 30.0, 2.0) == pytest.approx(L_NLOS_500_30_2, abs=1e-9)


@pytest.mark.parametrize("fn, args", [
    (path_loss_los, (0.5, 2.0)),
    (path_loss_los, (100.0, 0.0)),
    (path_loss_nlos, (0.5, 30.0, 2.0)),
    (path_loss_nlos, (100.0, 1.0, 2.0)),
    (path_loss_nlos, (math.nan, 30.0, 2.0)),
])
def test_path_loss_domain(fn, args):
    with pytest.raises(DomainError):
        fn(*args)


def test_path_loss_increasing():
    d = np.linspace(1, 2000, 4000)
    assert np.all(np.diff(path_loss_los(d, 2.0)) > 0)
    for h in (30, 120):
        assert np.all(np.diff(path_loss_nlos(d, h, 2.0)) > 0)


def test_path_loss_positive():
    d = np.linspace(1, 2000, 100)
    assert np.all(path_loss_los(d, 2.0) > 0)
    assert np.all(path_loss_nlos(d, 30.0, 2.0) > 0)


def test_nlos_exceeds_los_on_grid():
    d, h = np.meshgrid(np.linspace(30, 1200, 200), np.linspace(30, 100, 30))
    assert np.all(path_loss_nlos(d, h, 2.0) >= path_loss_los(d, 2.0))


def test_shadowing_std():
    assert shadowing_std(30.0, True) == pytest.approx(STD_LOS_30, rel=1e-12)
    assert shadowing_std(120.0, True) == pytest.approx(STD_LOS_120, rel=1e-12)
    assert shadowing_std(55.0, False) == 6.0


def test_channel_params_validation():
    with pytest.raises(DomainError):
        ChannelParams(fc_ghz=0.0)
    with pytest.raises(DomainError):
        ChannelParams(nlos_shadow_std_db=-1.0)


def test_sample_link_close_range_always_los():
    rng = np.random.default_rng(0)
    for _ in range(200):
        link = sample_link(15.0, 20.0, 30.0, ChannelParams(), rng)
        assert link.los
        assert link.path_loss_db == pytest.approx(path_loss_los(20.0, 2.0))


def test_sample_link_los_fraction():
    rng = np.random.default_rng(1)
    d3 = math.hypot(500, 95)
    los = [sample_link(500.0, d3, 120.0, ChannelParams(), rng).los for _ in range(100_000)]
    assert np.mean(los) == pytest.approx(P_LOS_500_120, abs=0.01)


def test_sample_link_shadow_std():
    rng = np.random.default_rng(2)
    s = np.array([sample_link(10.0, 12.0, 30.0, ChannelParams(), rng).shadowing_db for _ in range(100_000)])
    assert s.std() == pytest.approx(STD_LOS_30, rel=0.02)


def test_shadow_zero_mean():
    rng = np.random.default_rng(5)
    s = rng.standard_normal(1_000_000) * shadowing_std(60.0, rng.random(1_000_000) < 0.5)
    assert abs(s.mean()) < 0.05


@given(d=st.floats(1.0, 5000.0), h=st.floats(1.5, 500.0))
def test_los_probability_is_probability(d, h):
    assert 0.0 <= los_probability(d, h) <= 1.0
