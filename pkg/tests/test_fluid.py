"""Closed-form fluid trajectory, RK4 cross-check, and absorption time."""

import math

import numpy as np
import pytest

from rumorlab.asymptotics import f_eval, x_infinity
from rumorlab.fluid import (
    closed_form,
    csv_lines,
    fluid_trajectory,
    integrate_numeric,
    sample_closed_form,
    tau_infinity,
)
from rumorlab.model import DensityState, InitialConfiguration, drift

CONFIGS = [
    InitialConfiguration.standard(1),
    InitialConfiguration.standard(2),
    InitialConfiguration.standard(3),
    InitialConfiguration(x0=0.8, yi0=(0.1,), y0=0.05),
    InitialConfiguration(x0=0.7, yi0=(0.1, 0.05), y0=0.1),
]


def test_closed_form_components():
    init = InitialConfiguration(x0=0.8, yi0=(0.1, 0.05), y0=0.02)
    for t in (0.0, 0.3, 1.1):
        d = closed_form(t, init)
        x = init.x0 * math.exp(-t)
        assert d.x == pytest.approx(x, rel=1e-14)
        assert d.y == pytest.approx(f_eval(x, init), abs=1e-13)
        # y_i(t) = e^{-t} sum_{r<=i} y_{i-r,0} t^r / r!  with y_{0,0} = x0
        y00 = (init.x0, *init.yi0)
        for i in range(1, init.k):
            want = math.exp(-t) * sum(
                y00[i - r] * t**r / math.factorial(r) for r in range(i + 1)
            )
            assert d.yi[i - 1] == pytest.approx(want, rel=1e-13)


def test_closed_form_at_zero_is_initial():
    for init in CONFIGS:
        d = closed_form(0.0, init)
        assert d.x == pytest.approx(init.x0)
        assert d.yi == tuple(pytest.approx(v) for v in init.yi0)
        assert d.y == pytest.approx(init.y0, abs=1e-14)


@pytest.mark.parametrize("init", CONFIGS)
def test_closed_form_satisfies_the_ode(init):
    h = 1e-6
    for t in (0.1, 0.5, 1.3):
        fwd = closed_form(t + h, init).as_array()
        bwd = closed_form(t - h, init).as_array()
        dv = (fwd - bwd) / (2 * h)
        rhs = drift(closed_form(t, init))
        assert np.allclose(dv, rhs, atol=1e-9)


@pytest.mark.parametrize("init", CONFIGS)
def test_rk4_matches_closed_form(init):
    t_end = 2.0
    traj = integrate_numeric(init, t_end=t_end, step=1e-3)
    exact = sample_closed_form(traj.times, init)
    assert np.max(np.abs(traj.states - exact)) <= 1e-8
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(t_end, abs=1e-12)


def test_rk4_partial_last_step():
    init = InitialConfiguration.standard(1)
    traj = integrate_numeric(init, t_end=0.25, step=0.1)
    # 0.0, 0.1, 0.2, then the 0.05 remainder
    assert np.allclose(traj.times, [0.0, 0.1, 0.2, 0.25])


def test_rk4_validation():
    init = InitialConfiguration.standard(1)
    with pytest.raises(ValueError):
        integrate_numeric(init, t_end=-1.0, step=0.1)
    with pytest.raises(ValueError):
        integrate_numeric(init, t_end=1.0, step=0.0)


def test_tau_infinity_golden():
    assert tau_infinity(InitialConfiguration.standard(2)) == pytest.approx(
        2.1491257999, abs=1e-8
    )


@pytest.mark.parametrize("init", CONFIGS)
def test_tau_infinity_is_first_spreader_zero(init):
    tau = tau_infinity(init)
    assert tau > 0.0
    assert abs(closed_form(tau, init).y) <= 1e-9
    # strictly spreading in the interior
    for t in np.linspace(tau * 1e-3, tau * (1 - 1e-6), 25):
        assert closed_form(float(t), init).y > 0.0


@pytest.mark.parametrize("init", CONFIGS)
def test_tau_infinity_matches_final_size(init):
    # same quantity through the root of f: tau = ln(x0 / x_inf)
    assert tau_infinity(init) == pytest.approx(
        math.log(init.x0 / x_infinity(init)), abs=1e-9
    )


def test_tau_infinity_degenerate_is_zero():
    init = InitialConfiguration(x0=0.6, yi0=(0.0,), y0=0.0)
    assert tau_infinity(init) == 0.0


def test_fluid_trajectory_wrapper():
    init = InitialConfiguration.standard(2)
    traj = fluid_trajectory(init)
    assert traj.tau_inf == pytest.approx(2.1491258, abs=1e-6)
    d = traj.at(1.0)
    assert isinstance(d, DensityState)
    assert d.x == pytest.approx(math.exp(-1.0))


def test_csv_lines_shape():
    init = InitialConfiguration.standard(2)
    times = np.array([0.0, 0.5, 1.0])
    states = sample_closed_form(times, init)
    lines = list(csv_lines(times, states, init.k))
    assert lines[0] == "t,x,y_1,y"
    assert len(lines) == 4
    assert lines[1].startswith("0,1,0,")
