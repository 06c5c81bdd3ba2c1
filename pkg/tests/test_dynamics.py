import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from memcaprc.device import DuMemristor, MemcapacitorState, memcap_derivatives
from memcaprc.dynamics import (
    IntegratorConfig, initial_state, integrate, potential_steps, pull_in_voltage,
    quintic_coefficients, settle_time, simulate, steady_state, step_halving_error,
)
from memcaprc.encode import Waveform
from memcaprc.errors import DomainError, IntegrationError, SolverError


def stationary_oracle(p, v):
    """Root of the force balance near W0, found by bracketing instead of a polynomial."""
    K = p.dielectric

    def R_of(W):
        return K * v * v / (2 * p.k_ew * W) + p.R0

    def g(W):
        return -K * math.pi * R_of(W) ** 2 * v * v / (2 * W * W) + p.k_ec * (p.W0 - W)

    # the stable branch: scan down from W0 to the first sign change
    grid = np.linspace(p.W0, 0.05 * p.W0, 2000)
    vals = [g(w) for w in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            return a, R_of(a)
        if fa * fb < 0:
            W = brentq(g, b, a, xtol=1e-22, rtol=1e-14)
            return W, R_of(W)
    raise AssertionError("no bracket")


@pytest.mark.parametrize("v", [0.01, 0.05, 0.15, -0.2, 0.3])
def test_steady_state_matches_bracketing_oracle(ledger, v):
    p = ledger.memcapacitor("0-0").params
    ss = steady_state(p, v)
    W, R = stationary_oracle(p, v)
    assert ss.W_inf == pytest.approx(W, rel=1e-10)
    assert ss.R_inf == pytest.approx(R, rel=1e-10)
    assert ss.C_inf == pytest.approx(p.eps * p.eps0 * p.a * math.pi * R * R / W, rel=1e-9)


def test_steady_state_zero_and_stationarity(ledger):
    p = ledger.memcapacitor("100-100").params
    ss = steady_state(p, 0.0)
    assert (ss.W_inf, ss.R_inf) == (p.W0, p.R0)
    ss = steady_state(p, 0.12)
    dR, dW = memcap_derivatives(MemcapacitorState(ss.R_inf, ss.W_inf), 0.12 - p.v_phi, p)
    assert abs(dR) * p.zeta_ew_law(0.0) < 1e-9 * p.k_ew * p.R0
    assert abs(dW) * p.zeta_ec_law(0.0) < 1e-9 * p.k_ec * p.W0


def test_quintic_root_is_stationary(ledger):
    p = ledger.memcapacitor("0-0").params
    v = 0.15
    coeffs = quintic_coefficients(p, v)
    W = steady_state(p, v).W_inf
    scale = np.abs(coeffs) * np.array([W ** k for k in range(5, -1, -1)])
    assert abs(np.polyval(coeffs, W)) < 1e-10 * scale.max()


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.45))
def test_steady_state_even_in_potential(v):
    from memcaprc.device import load_ledger
    p = load_ledger().memcapacitor("0-0").params
    assert steady_state(p, v) == steady_state(p, -v)


def test_capacitance_rises_with_potential(ledger):
    p = ledger.memcapacitor("0-0").params
    c = [steady_state(p, v).C_inf for v in np.linspace(0, 0.45, 20)]
    assert np.all(np.diff(c) > 0)


def test_pull_in_raises_with_roots(ledger):
    p = ledger.memcapacitor("0-0").params
    v_pi = pull_in_voltage(p)
    assert 0.3 < v_pi < 0.8
    steady_state(p, 0.99 * v_pi)
    with pytest.raises(SolverError) as info:
        steady_state(p, 1.05 * v_pi)
    assert isinstance(info.value.roots, tuple)
    with pytest.raises(DomainError):
        steady_state(p, math.nan)


def test_integration_converges_to_steady_state(ledger):
    dev = ledger.memcapacitor("100-0")
    p = dev.params
    v_app = 0.1
    T = settle_time(p, v_app)
    wf = Waveform([0.0], [T], [v_app], bias=0.0)
    C = integrate(dev, wf, [T], "capacitance", IntegratorConfig(1e-3))[0]
    assert C == pytest.approx(steady_state(p, v_app + p.v_phi).C_inf, rel=1e-4)


def test_integration_matches_scipy(ledger):
    dev = ledger.memcapacitor("0-60")
    p = dev.params
    levels = [0.12, -0.05, 0.2, 0.0]
    wf = Waveform.from_durations([0.3, 0.2, 0.4, 0.3], levels, bias=0.0)
    times = np.array([0.1, 0.3, 0.45, 0.9, 1.2])
    got = simulate(dev, wf, times, IntegratorConfig(2e-4), start="equilibrium").states
    s0 = initial_state(dev, 0.0)
    dv = potential_steps(np.array(levels) + p.v_phi, p.v_phi)
    y, expect = [s0.R, s0.W], []
    for (start, end, lvl), step in zip(wf.segments, dv):
        def rhs(t, s, lvl=lvl, step=step):
            return memcap_derivatives(MemcapacitorState(*s), lvl, p, dv_m=step)
        inside = times[(times > start) & (times < end)]
        sol = solve_ivp(rhs, (start, end), y, method="DOP853", t_eval=np.append(inside, end),
                        rtol=1e-12, atol=[1e-20, 1e-22])
        expect += list(zip(sol.y[0][:-1], sol.y[1][:-1]))
        if np.any(np.isclose(times, end)):
            expect.append((sol.y[0][-1], sol.y[1][-1]))
        y = sol.y[:, -1]
    expect = np.array(expect)
    np.testing.assert_allclose(got["R"], expect[:, 0], rtol=1e-9)
    np.testing.assert_allclose(got["W"], expect[:, 1], rtol=1e-9)


def test_step_halving_error_small(ledger):
    dev = ledger.memcapacitor("0-80")
    wf = Waveform.from_durations([0.05] * 6, [0.15, 0, -0.1, 0, 0.2, 0])
    assert step_halving_error(dev, wf, wf.ends, "capacitance") < 1e-3


def test_splitting_a_segment_changes_nothing(ledger):
    dev = ledger.memcapacitor("0-40")
    a = Waveform.from_durations([0.2, 0.2], [0.1, -0.1])
    b = Waveform.from_durations([0.07, 0.13, 0.2], [0.1, 0.1, -0.1])
    t = [0.05, 0.2, 0.33, 0.4]
    np.testing.assert_allclose(integrate(dev, a, t), integrate(dev, b, t), rtol=1e-10)


def test_potential_steps_forward_fill():
    got = potential_steps(np.array([0.1, 0.1, 0.3, 0.3, 0.0]), 0.0)
    np.testing.assert_allclose(got, [0.1, 0.1, 0.2, 0.2, -0.3])
    assert potential_steps(np.array([0.0, 0.0]), 0.0).tolist() == [0.0, 0.0]


def test_boundary_sample_reads_left_limit(ledger):
    dev = ledger.memcapacitor("0-0")
    wf = Waveform.from_durations([0.1, 0.1], [0.15, 0.0])
    traj = simulate(dev, wf, [0.1, 0.1 + 1e-12, 0.2])
    assert traj.levels.tolist() == [0.15, 0.15, 0.0]


def test_schedule_validation(ledger):
    dev = ledger.memcapacitor("0-0")
    wf = Waveform.from_durations([0.1], [0.1])
    for bad in ([], [0.05, 0.05], [0.2], [math.nan], [-0.1]):
        with pytest.raises(DomainError):
            integrate(dev, wf, bad)
    with pytest.raises(DomainError):
        integrate(dev, wf, [0.1], "voltage")
    with pytest.raises(DomainError):
        simulate(dev, wf, [0.1], start="later")


def test_pull_in_drive_reports_time(ledger):
    dev = ledger.memcapacitor("0-0")
    wf = Waveform.from_durations([0.1, 5.0], [0.0, 1.5])
    with pytest.raises(IntegrationError) as info:
        integrate(dev, wf, [5.1])
    assert 0.1 <= info.value.time <= 5.1


def test_du_integration_closed_form(memristor_params):
    du_p, _ = memristor_params
    dev = DuMemristor(du_p, w=0.3)
    wf = Waveform.from_durations([0.02], [0.0])
    t = np.array([0.005, 0.02])
    w = simulate(dev, wf, t, IntegratorConfig(5e-5), start="device").states["w"]
    np.testing.assert_allclose(w, 0.3 * np.exp(-t / du_p.tau), rtol=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-0.15, 0.15), min_size=1, max_size=6))
def test_mirror_devices_are_exact_mirrors(levels):
    from memcaprc.device import load_ledger
    ledger = load_ledger()
    a, b = ledger.memcapacitor("0-60"), ledger.memcapacitor("60-0")
    wf = Waveform.from_durations([0.05] * len(levels), levels)
    mirror = Waveform.from_durations([0.05] * len(levels), [-x for x in levels])
    np.testing.assert_array_equal(integrate(a, wf, wf.ends), integrate(b, mirror, mirror.ends))
