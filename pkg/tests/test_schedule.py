import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcpm.schedule import AdiabaticSchedule, c_e, eta_choice, fourier_truncation, g, mu_grid


def _sched(**kw):
    base = dict(mu_f=0.25, gamma=0.25, delta=0.2, R1=4.0, nbar=4)
    base.update(kw)
    return AdiabaticSchedule(**base)


def test_g_endpoints_and_midpoint():
    assert g(0.0) == 0.0 and g(1.0) == 1.0 and g(0.5) == 0.5


def test_c_e_against_trapezoid():
    t = np.linspace(0.0, 1.0, 200_001)[1:-1]
    ref = np.trapezoid(np.exp(-1.0 / (t * (1 - t))), t)
    assert c_e() == pytest.approx(ref, rel=1e-8)


@given(st.floats(0.0, 1.0))
def test_g_symmetry(t):
    assert g(t) + g(1.0 - t) == pytest.approx(1.0, abs=1e-12)


def test_g_monotone():
    vals = [g(t) for t in np.linspace(0, 1, 101)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_g_domain():
    with pytest.raises(ValueError):
        g(1.5)


def test_mu_endpoints_and_monotone():
    s = _sched()
    assert s.mu(0.0) == 1.0 and s.mu(1.0) == 0.25
    mus = mu_grid(s, np.linspace(0, 1, 50))
    assert np.all(np.diff(mus) <= 0)


def test_algorithm1_h_values():
    s = _sched()
    denom = 2 * 4.0 * (1.0 + 0.75 * math.log(10.0))
    assert s.h(0.0) == pytest.approx(0.0625 / denom, rel=1e-14)
    assert s.theta(1.0) == pytest.approx(s.h(1.0) / 0.25)


def test_proposition2_h_uses_m_plus_n():
    s = _sched(h_mode="proposition2")
    assert s.h_at_mu(0.5) == pytest.approx(0.25 / (math.sqrt(4.0) * 4.0))


def test_h_scales_with_mu_squared():
    s = _sched()
    assert s.h_at_mu(0.5) / s.h_at_mu(1.0) == pytest.approx(0.25)


def test_eta_choice():
    assert eta_choice(0.2) == pytest.approx(1 / math.log(40.0))
    with pytest.raises(ValueError):
        eta_choice(0.5, C_adiabatic=0.01)


def test_fourier_truncation_examples():
    r = 0.25
    n = fourier_truncation(2 * r, r)
    assert 2 * r ** (n / 2 + 1) <= 2 * r
    assert fourier_truncation(0.9, 0.1) == 0
    with pytest.raises(ValueError):
        fourier_truncation(0.1, 0.6)


@given(st.floats(0.01, 0.49), st.floats(1e-9, 0.99))
def test_fourier_truncation_bound(r, target):
    n = fourier_truncation(target, r)
    assert 2 * r ** (n / 2 + 1) <= target * (1 + 1e-12)


@pytest.mark.parametrize("kw", [dict(mu_f=0.0), dict(gamma=1.0), dict(delta=1.2), dict(R1=-1.0),
                                dict(h_mode="other")])
def test_schedule_validation(kw):
    with pytest.raises(ValueError):
        _sched(**kw)


def test_header_echo():
    head = _sched().header()
    assert head["h_mode"] == "algorithm1" and "natural" in head["log_base"]
