import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tclpulse.model import (PhysicalParams, PulseSchedule, SpectralDensity, counters, decompose,
                            make_bb, make_bp, params_from_tau, signs, thermal_weight)


def test_bb_times():
    assert make_bb(1.0, 3.5).events == ((1.0, "X"), (2.0, "X"), (3.0, "X"))


def test_bb_empty_when_dt_exceeds_range():
    assert len(make_bb(10.0, 5.0)) == 0


def test_bb_counter_is_integer_part():
    assert counters(make_bb(1.0, 10.0), 2.5) == (2, 0)


def test_bp_times():
    s = make_bp(1.0, 4.0)
    assert s.events == ((1.0, "X"), (2.0, "Z"), (3.0, "X"), (4.0, "Z"))


@pytest.mark.parametrize("frac, expected", [(2.5, (1, 1)), (0.5, (0, 0))])
def test_bp_counters(frac, expected):
    dt = 0.3
    assert counters(make_bp(dt, 10.0), frac * dt) == expected


def test_counters_right_continuous():
    assert counters(PulseSchedule(), 7.0) == (0, 0)
    assert counters(make_bb(1.0, 5.0), 3.0) == (3, 0)


def test_counters_custom():
    s = PulseSchedule(((1, "X"), (1.5, "Z"), (2, "X")))
    assert counters(s, 1.7) == (1, 1)


def test_signs():
    assert signs(PulseSchedule(), 3.0) == (1, 1)
    assert signs(make_bb(1.0, 5.0), 1.5) == (-1, 1)
    assert signs(make_bp(1.0, 5.0), 3.5) == (1, -1)


def test_decompose_examples():
    d = decompose(PulseSchedule(), 5.0)
    assert d.boundaries.tolist() == [0.0, 5.0]
    assert d.sx_parity.tolist() == [1] and d.sz_parity.tolist() == [1]

    d = decompose(make_bb(1.0, 5.0), 2.5)
    assert d.boundaries.tolist() == [0.0, 1.0, 2.0, 2.5]
    assert d.sx_parity.tolist() == [1, -1, 1]

    d = decompose(make_bp(1.0, 5.0), 2.5)
    assert d.sx_parity.tolist() == [1, -1, -1]
    assert d.sz_parity.tolist() == [1, 1, -1]


def test_decompose_at_pulse_time_excludes_zero_length_tail():
    d = decompose(make_bb(1.0, 5.0), 2.0)
    assert d.boundaries.tolist() == [0.0, 1.0, 2.0]


def test_schedule_validation():
    with pytest.raises(ValueError):
        PulseSchedule(((1.0, "X"), (1.0, "Z")))
    with pytest.raises(ValueError):
        PulseSchedule(((0.0, "X"),))
    with pytest.raises(ValueError):
        PulseSchedule(((1.0, "Y"),))
    with pytest.raises(ValueError):
        make_bb(0.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.0, 40.0))
def test_bb_counter_matches_floor(dt, u):
    sched = make_bb(dt, 50.0)
    # stay clear of the grid points, where rounding decides the floor
    frac = u / dt - math.floor(u / dt)
    if min(frac, 1 - frac) < 1e-9:
        return
    assert counters(sched, u) == (math.floor(u / dt), 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.0, 40.0))
def test_bp_counters_match_floor(dt, u):
    sched = make_bp(dt, 50.0)
    x = u / dt
    frac = x - math.floor(x)
    if min(frac, 1 - frac) < 1e-9:
        return
    assert counters(sched, u) == (math.floor((x + 1) / 2), math.floor(x / 2))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 20.0), st.sampled_from("XZ")), max_size=8),
       st.floats(0.01, 25.0))
def test_decompose_consistent_with_signs(raw, t):
    times = sorted({round(a, 6) for a, _ in raw})
    axes = [ax for _, ax in raw][: len(times)]
    sched = PulseSchedule(tuple(zip(times, axes)))
    d = decompose(sched, t)
    assert d.boundaries[0] == 0 and d.boundaries[-1] == t
    assert np.all(np.diff(d.boundaries) > 0)
    for a, b, sx, sz in zip(d.starts, d.ends, d.sx_parity, d.sz_parity):
        assert signs(sched, 0.5 * (a + b)) == (sx, sz)


def test_params_from_tau_ratio_two_gives_equal_couplings():
    p = params_from_tau(0.4 * 2 * math.pi, 2.0)
    assert p.g_theta == pytest.approx(p.g_lambda, rel=0, abs=1e-17)
    expected = 1 / (2 * (0.4 * 2 * math.pi) ** 2 * 1.25)
    assert p.g_theta == pytest.approx(expected, rel=1e-14)
    assert p.g_theta == pytest.approx(0.06333, rel=1e-3)


@pytest.mark.parametrize("ratio", [2.0, 5.0, 50.0, 0.7])
def test_params_from_tau_round_trip(ratio):
    tc = 1.9
    p = params_from_tau(tc, ratio)
    assert p.tau_c == pytest.approx(tc, rel=1e-14)
    assert p.tau_lambda / p.tau_theta == pytest.approx(ratio, rel=1e-14)


def test_pure_dephasing_limit():
    p = params_from_tau(2.0, math.inf)
    assert p.g_lambda == 0 and p.tau_theta == pytest.approx(2.0, rel=1e-14)
    assert params_from_tau(2.0, 1e6).tau_theta == pytest.approx(2.0, rel=1e-10)


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(omega0=0.0)
    with pytest.raises(ValueError):
        PhysicalParams(g_theta=-1.0)
    with pytest.raises(ValueError):
        params_from_tau(-1.0, 2.0)


def test_thermal_weight_examples():
    spec = SpectralDensity(1.0)
    assert thermal_weight(spec, 1000.0, 0.0) == pytest.approx(2 / 1000.0, rel=1e-15)
    assert thermal_weight(spec, 1e9, 1.0) == pytest.approx(math.exp(-1), rel=1e-14)
    assert thermal_weight(spec, 1000.0, 0.1) == pytest.approx(0.1 * math.exp(-0.1), rel=1e-12)
    assert thermal_weight(spec, 1000.0, 0.1) == pytest.approx(0.090484, abs=5e-7)


def test_thermal_weight_continuous_across_series_switch():
    spec = SpectralDensity(0.3)
    beta = 50.0
    w = np.array([1e-4 * (1 - 1e-9), 1e-4 * (1 + 1e-9)]) / beta
    lo, hi = thermal_weight(spec, beta, w)
    assert abs(lo - hi) / hi < 1e-9


def test_thermal_weight_rejects_negative_frequency():
    with pytest.raises(ValueError):
        thermal_weight(SpectralDensity(1.0), 10.0, -0.1)
