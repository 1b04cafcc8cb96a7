import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kswave.errors import ConfigError, NonFiniteState, StepLimitExceeded
from kswave.integrate import EventSpec, IntegratorConfig, integrate

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def decay(t, y):
    return -y


def test_exponential_decay_endpoint():
    tr = integrate(decay, [1.0], (0.0, 1.0), TIGHT)
    assert tr.termination.kind == "TimeLimit"
    assert tr.times[-1] == 1.0
    assert abs(tr.final_state[0] - math.exp(-1)) < 1e-10


def test_event_locates_half_level():
    ev = EventSpec(lambda t, y: y[0] - 0.5, direction="down", terminal=True)
    tr = integrate(decay, [1.0], (0.0, 5.0), TIGHT, events=[ev])
    assert tr.termination.kind == "Event"
    assert tr.termination.index == 0
    assert abs(tr.termination.xi - math.log(2)) < 1e-10


def test_harmonic_oscillator_period():
    tr = integrate(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0.0, 2 * math.pi), TIGHT)
    assert np.allclose(tr.final_state, [1.0, 0.0], atol=1e-9)


def test_dense_output_between_steps():
    tr = integrate(decay, [1.0], (0.0, 3.0), TIGHT)
    ts = np.linspace(0.0, 3.0, 301)
    assert np.max(np.abs(tr.sol(ts)[:, 0] - np.exp(-ts))) < 1e-9


def test_dense_output_hits_grid_nodes():
    tr = integrate(decay, [1.0], (0.0, 2.0))
    assert np.allclose(tr.sol(tr.times), tr.states, rtol=1e-12, atol=1e-15)


def test_times_are_increasing():
    tr = integrate(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], (0.0, 20.0))
    assert np.all(np.diff(tr.times) > 0)


@given(k=st.floats(0.1, 3.0), rtol=st.sampled_from([1e-9, 1e-10, 1e-11]))
def test_halving_tolerance_does_not_increase_error(k, rtol):
    # error at rel_tol/2 stays within 10% of error at rel_tol (plus a floor at round-off)
    def rhs(t, y):
        return -k * y

    exact = math.exp(-2 * k)
    e1 = abs(integrate(rhs, [1.0], (0, 2), IntegratorConfig(rtol, 1e-300)).final_state[0] - exact)
    e2 = abs(integrate(rhs, [1.0], (0, 2), IntegratorConfig(rtol / 2, 1e-300)).final_state[0] - exact)
    assert e2 <= 1.1 * e1 + 1e-15


def test_non_terminal_events_are_recorded_in_order():
    evs = [EventSpec(lambda t, y: y[0] - 0.25), EventSpec(lambda t, y: y[0] - 0.5)]
    tr = integrate(decay, [1.0], (0.0, 3.0), TIGHT, events=evs)
    assert tr.termination.kind == "TimeLimit"
    assert [i for i, _, _ in tr.events] == [1, 0]
    assert tr.events[0][1] == pytest.approx(math.log(2), abs=1e-10)
    assert tr.events[1][1] == pytest.approx(math.log(4), abs=1e-10)


def test_earliest_terminal_event_wins():
    evs = [EventSpec(lambda t, y: y[0] - 0.25, terminal=True),
           EventSpec(lambda t, y: y[0] - 0.5, terminal=True)]
    tr = integrate(decay, [1.0], (0.0, 3.0), TIGHT, events=evs)
    assert tr.termination.index == 1


def test_event_direction_filter():
    # y = sin(t - 0.1) crosses zero going down at pi + 0.1 and up at 2 pi + 0.1
    up = EventSpec(lambda t, y: y[0], direction="up", terminal=True)
    tr = integrate(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], (0.1, 10.0), TIGHT,
                   events=[up])
    assert tr.termination.xi == pytest.approx(2 * math.pi + 0.1, abs=1e-9)


def test_bad_direction_rejected():
    with pytest.raises(ConfigError):
        EventSpec(lambda t, y: 0.0, direction="sideways")


def test_decreasing_span_rejected():
    with pytest.raises(ConfigError):
        integrate(decay, [1.0], (1.0, 0.0))


def test_nonfinite_initial_state_rejected():
    with pytest.raises(ConfigError):
        integrate(decay, [math.nan], (0.0, 1.0))


def test_nonpositive_tolerances_rejected():
    with pytest.raises(ConfigError):
        IntegratorConfig(rel_tol=0.0)


def test_step_limit_carries_partial_trajectory():
    with pytest.raises(StepLimitExceeded) as info:
        integrate(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0.0, 1000.0),
                  IntegratorConfig(max_steps=5))
    assert len(info.value.trajectory.times) >= 1


def test_blowup_raises_nonfinite():
    # y' = y^2 blows up at t = 1
    with pytest.raises(NonFiniteState) as info:
        integrate(lambda t, y: y * y, [1.0], (0.0, 2.0))
    assert np.all(np.isfinite(info.value.last_finite))
    assert info.value.t < 1.0 + 1e-6
