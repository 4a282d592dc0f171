import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from formsync.errors import InsufficientDecayError
from formsync.sim.metrics import fit_decay_rate, time_to_fraction


@given(st.floats(0.01, 5.0), st.floats(0.1, 100.0))
def test_rate_of_exact_exponential(rate, amp):
    t = np.linspace(0.0, 10.0 / rate, 2001)
    assert fit_decay_rate(t, amp * np.exp(-rate * t)) == pytest.approx(rate, rel=1e-9)


def test_rate_ignores_initial_rise():
    t = np.linspace(0, 20, 4001)
    y = np.where(t < 1, t, np.exp(-(t - 1)))
    assert fit_decay_rate(t, y) == pytest.approx(1.0, rel=1e-6)


def test_rate_errors():
    t = np.linspace(0, 1, 10)
    with pytest.raises(InsufficientDecayError):
        fit_decay_rate(t, np.ones(10))
    with pytest.raises(InsufficientDecayError):
        fit_decay_rate(t, np.zeros(10))
    with pytest.raises(InsufficientDecayError):
        fit_decay_rate(t[:1], np.ones(1))


def test_time_to_fraction():
    t = np.arange(6.0)
    y = np.array([1.0, 0.5, 0.01, 0.2, 0.01, 0.0])
    assert time_to_fraction(t, y, 0.05, settle=False) == 2.0
    assert time_to_fraction(t, y, 0.05, settle=True) == 4.0
    assert time_to_fraction(t, np.ones(6), 0.05) is None
