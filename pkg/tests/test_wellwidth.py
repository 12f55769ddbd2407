import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenwell._bisect import BracketError
from degenwell.potentials import make_builtin, zoo
from degenwell.wellwidth import (
    RESIDUAL_TOL,
    NonMonotoneError,
    WellWidths,
    asymptotic_delta,
    solve_delta_pm,
    solve_even_delta,
    solve_radial_delta,
)

from .oracles import exp_flat_even_delta, exp_flat_radial_delta

ZOO = zoo()
POINT_WELLS = [n for n, p in ZOO.items() if p.point_well and p.monotone]


def solve(p, h):
    return solve_even_delta(p, h) if p.even else solve_delta_pm(p, h)


def test_harmonic_even_width():
    w = solve_even_delta(ZOO["power2"], 0.02)
    assert w.delta_plus == pytest.approx(0.1, rel=1e-12)
    assert w.delta_minus == -w.delta_plus


@pytest.mark.parametrize("h", [1e-3, 1e-6, 1e-12])
def test_exp_flat_even_width_matches_128bit_oracle(h):
    ref = float(exp_flat_even_delta(h))
    assert solve_even_delta(ZOO["exp_flat1"], h).delta_plus == pytest.approx(ref, rel=1e-12)


def test_exp_flat_even_width_value():
    # oracle value for h = 1e-6 (2 ln(2 delta) - 1/delta = ln 1e-12)
    assert solve_even_delta(ZOO["exp_flat1"], 1e-6).delta_plus == pytest.approx(
        float(exp_flat_even_delta(1e-6)), rel=1e-13)


def test_exp_flat_width_law():
    hs = 10.0 ** -np.arange(4, 300, 20)
    ratio = np.array([solve_even_delta(ZOO["exp_flat1"], h).delta_plus * 2 * abs(math.log(h))
                      for h in hs])
    dev = np.abs(ratio - 1.0)
    assert np.all(np.diff(dev) < 0)
    assert dev[-1] < 0.02


@given(st.floats(min_value=-25.0, max_value=-2.5))
def test_pm_agrees_with_even_solver(logh):
    h = math.exp(logh)
    p = ZOO["exp_flat1"]
    a, b = solve_even_delta(p, h), solve_delta_pm(p, h)
    assert b.delta_plus == pytest.approx(a.delta_plus, rel=1e-9)
    assert b.delta_minus == pytest.approx(-b.delta_plus, rel=1e-9)


def test_asymmetric_widths():
    hs = [1e-3, 1e-5, 1e-7, 1e-9]
    ws = [solve_delta_pm(ZOO["asym_mixed"], h) for h in hs]
    # with delta_plus negligible, |delta_minus|**3 = h**2 holds to roundoff
    dev = [abs(abs(w.delta_minus) * h ** (-2 / 3) - 1) for w, h in zip(ws, hs)]
    assert max(dev) < 1e-12
    for w, h in zip(ws, hs):
        assert w.log_plus <= 10 * math.log(h)
    # delta_plus = exp(-h**(-2/3)) is far below the smallest double
    deep = solve_delta_pm(ZOO["asym_mixed"], 1e-10)
    assert deep.delta_plus == 0.0 and deep.log_plus < -1e6
    assert deep.residual <= RESIDUAL_TOL


def test_log_power_width_law():
    hs = 10.0 ** -np.array([4, 8, 16, 32, 64])
    r = [2 * solve_even_delta(ZOO["log_power2"], h).delta_plus / (h * abs(math.log(h)))
         for h in hs]
    dev = np.abs(np.array(r) - 1.0)
    assert np.all(np.diff(dev) < 0)


def test_radial_widths():
    assert solve_radial_delta(ZOO["power2"], 0.01) == pytest.approx(0.1, rel=1e-12)
    ref = float(exp_flat_radial_delta(1e-8))
    assert solve_radial_delta(ZOO["exp_flat1"], 1e-8) == pytest.approx(ref, rel=1e-12)


@given(st.floats(min_value=-30.0, max_value=-3.0))
def test_radial_width_is_even_width_at_twice_h(logh):
    h = math.exp(logh)
    p = ZOO["exp_flat1"]
    assert solve_radial_delta(p, h) == pytest.approx(solve_even_delta(p, 2 * h).delta_plus, rel=1e-10)


def test_asymptotic_delta_values():
    assert asymptotic_delta("exp_flat", {"alpha": 2}, 1e-10) == pytest.approx(0.14736, abs=5e-6)
    closed = math.exp(1 - math.sqrt(1 + 2 * abs(math.log(0.01))))
    assert asymptotic_delta("log_squared", {}, 0.02) == pytest.approx(closed, rel=1e-15)
    for h in (1e-2, 1e-5):
        assert asymptotic_delta("power", {"exponent": 2}, h) == pytest.approx(math.sqrt(h / 2))
    with pytest.raises(ValueError):
        asymptotic_delta("oscillatory", {}, 1e-3)


def test_log_squared_closed_form_is_exact():
    w = solve_even_delta(ZOO["log_squared"], 0.02)
    assert w.delta_plus == pytest.approx(asymptotic_delta("log_squared", {}, 0.02), rel=1e-10)


@pytest.mark.parametrize("name", POINT_WELLS)
def test_residual_certificate_and_nondegeneracy(name):
    p = ZOO[name]
    for h in (1e-2, 1e-5, 1e-9):
        w = solve(p, h)
        assert w.delta_minus < 0 < w.delta_plus or w.log_plus < -700
        lvp = p.log_eval_side(1, np.array([w.log_plus]))[0]
        lvm = p.log_eval_side(-1, np.array([w.log_abs_minus]))[0]
        g = lvp - w.log_level

        assert abs(g) <= RESIDUAL_TOL
        assert abs(lvm - lvp) <= RESIDUAL_TOL
        # moving delta_plus by 1% breaks the defining equation
        bumped = WellWidths(h, w.log_abs_minus, w.log_plus + math.log(1.01), 0.0, 0)
        lvb = p.log_eval_side(1, np.array([bumped.log_plus]))[0]
        assert abs(lvb - bumped.log_level) > RESIDUAL_TOL
        assert not w.degenerate


@pytest.mark.parametrize("name", POINT_WELLS)
def test_widths_nondecreasing_in_h(name):
    hs = np.geomspace(1e-12, 1e-2, 25)
    ws = [solve(ZOO[name], h) for h in hs]
    lp = np.array([w.log_plus for w in ws])
    lm = np.array([w.log_abs_minus for w in ws])
    assert np.all(np.diff(lp) >= 0) and np.all(np.diff(lm) >= 0)


@pytest.mark.parametrize("name,alpha", [("exp_flat1", 0.5), ("log_squared", 0.5), ("exp_flat2", 0.1)])
def test_flat_widths_beat_every_power(name, alpha):
    hs = 10.0 ** -np.arange(5, 300, 15)
    r = [solve_even_delta(ZOO[name], h).log_plus - alpha * math.log(h) for h in hs]
    assert np.all(np.diff(r) > 0)


def test_errors():
    with pytest.raises(BracketError):
        solve_even_delta(ZOO["exp_flat1"], 10.0)
    with pytest.raises(NonMonotoneError):
        solve_even_delta(ZOO["oscillatory"], 1e-3)
    with pytest.raises(NonMonotoneError):
        solve_delta_pm(ZOO["plateau"], 1e-3)
    with pytest.raises(ValueError):
        solve_even_delta(ZOO["asym_mixed"], 1e-3)


def test_theta_scaled_sides():
    p = make_builtin("exp_flat", {"alpha": 1, "theta_minus": 2.0, "theta_plus": 0.5})
    w = solve_delta_pm(p, 1e-6)
    # V(delta_minus) = V(delta_plus) means the scaled arguments coincide
    assert 2.0 * abs(w.delta_minus) == pytest.approx(0.5 * w.delta_plus, rel=1e-9)


def test_json_fields():
    rec = solve_even_delta(ZOO["exp_flat1"], 1e-6).to_json()
    assert {"h", "delta_minus", "delta_plus", "residual", "iterations"} <= set(rec)
