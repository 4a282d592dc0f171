import numpy as np
import pytest

from formsync.delay import WaveChannel, channel_receive, channel_transmit
from formsync.errors import NonMonotoneTimeError

K2 = np.array([100.0, 50.0, 25.0])


def test_gain_factorization():
    ch = WaveChannel.from_gain(K2, delay=0.2)
    assert np.allclose(ch.G @ ch.G.T, np.diag(K2))


def test_zero_delay_equals_direct_coupling():
    ch = WaveChannel.from_gain(K2, k_wave=2.0)
    si, sj = np.array([0.1, 0.2, 0.3]), np.array([-0.3, 0.0, 0.5])
    out = ch.receive(si, 1.0, s_remote_now=sj)
    assert np.allclose(out, K2 * (sj - si) / 2.0)


def test_delayed_zero_order_hold():
    ch = WaveChannel.from_gain(K2, delay=0.5)
    for k in range(11):
        channel_transmit(ch, np.full(3, float(k)), 0.1 * k)
    # at t = 0.93 the remote value sent at t = 0.43 -> held sample from t = 0.4
    assert np.allclose(ch.delayed_wave(0.93), ch.encode(np.full(3, 4.0)))
    # exactly on a grid point after the delay
    assert np.allclose(ch.delayed_wave(0.8), ch.encode(np.full(3, 3.0)))
    # before any sample has arrived: initial wave
    assert np.allclose(ch.delayed_wave(0.3), 0.0)
    out = channel_receive(ch, np.zeros(3), 0.93)
    assert np.allclose(out, K2 * 4.0)


def test_linear_interpolation():
    ch = WaveChannel.from_gain(K2, delay=0.5, interpolation="linear")
    for k in range(11):
        ch.transmit(np.full(3, float(k)), 0.1 * k)
    assert np.allclose(ch.delayed_wave(0.93), ch.encode(np.full(3, 4.3)))


def test_prune_keeps_needed_history():
    ch = WaveChannel.from_gain(K2, delay=0.5)
    for k in range(101):
        ch.transmit(np.full(3, float(k)), 0.01 * k)
    before = ch.delayed_wave(1.0)
    ch.prune(1.0)
    assert len(ch) < 101
    assert np.allclose(ch.delayed_wave(1.0), before)


def test_time_must_increase():
    ch = WaveChannel.from_gain(K2, delay=0.1)
    ch.transmit(np.zeros(3), 1.0)
    with pytest.raises(NonMonotoneTimeError):
        ch.transmit(np.zeros(3), 1.0)


def test_validation():
    with pytest.raises(ValueError):
        WaveChannel.from_gain(K2, delay=-1.0)
    with pytest.raises(ValueError):
        WaveChannel.from_gain(K2, k_wave=0.0)
    with pytest.raises(ValueError):
        WaveChannel.from_gain(K2, interpolation="cubic")


def test_empty_history_gives_local_damping_only():
    ch = WaveChannel.from_gain(K2, delay=0.3)
    ch.transmit(np.ones(3), 0.0)
    s_local = np.array([0.2, -0.1, 0.4])
    assert np.allclose(ch.receive(s_local, 0.1), -K2 * s_local)


def test_step_arrives_after_delay():
    dt, delay = 0.01, 0.25
    ch = WaveChannel.from_gain(K2, delay=delay)
    arrival = None
    for k in range(100):
        t = k * dt
        ch.transmit(np.ones(3) if t >= 0.1 else np.zeros(3), t)
        if arrival is None and np.any(ch.receive(np.zeros(3), t) != 0.0):
            arrival = t
    assert arrival == pytest.approx(0.1 + delay, abs=dt)
