import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenwell.potentials import (
    FAMILIES,
    Potential,
    check_hypotheses,
    dyadic_grid,
    make_builtin,
    parse_potential,
    uniform_grid,
    zoo,
)

ZOO = zoo()


def test_eval_examples():
    assert make_builtin("power", {"exponent": 2}).eval(3.0) == 9.0
    flat = make_builtin("exp_flat", {"alpha": 1})
    assert flat.eval(0.0) == 0.0
    assert flat.eval(0.05) == pytest.approx(math.exp(-20.0), rel=1e-14)
    assert flat.eval(0.05) == pytest.approx(2.061e-9, rel=1e-3)


def test_log_eval_examples():
    assert ZOO["exp_flat1"].log_eval(0.01) == pytest.approx(-100.0, rel=1e-15)
    assert ZOO["log_power2"].log_eval(math.exp(-10.0)) == pytest.approx(-2 * math.log(10.0), rel=1e-14)
    assert ZOO["power4"].log_eval(0.1) == pytest.approx(4 * math.log(0.1), rel=1e-14)
    assert ZOO["exp_flat1"].log_eval(0.0) == -math.inf


def test_log_eval_far_below_underflow():
    # V(1e-4) = exp(-1e4), not representable; the log form is exact
    assert ZOO["exp_flat1"].eval(1e-4) == 0.0
    assert ZOO["exp_flat1"].log_eval(1e-4) == pytest.approx(-1e4, rel=1e-14)
    assert ZOO["exp_flat1"].log_eval_side(1, np.array([-50.0]))[0] == pytest.approx(-math.exp(50.0))


@given(st.floats(min_value=1e-3, max_value=0.999), st.sampled_from([-1.0, 1.0]))
def test_exp_flat_core_formula(x, side):
    assert ZOO["exp_flat1"].log_eval(side * x) == pytest.approx(-1.0 / x, rel=1e-13)


def test_plateau_exact_zeros_and_rise():
    p = make_builtin("plateau", {"a": 0.1})
    xs = np.linspace(-0.1, 0.1, 201)
    assert np.all(p.eval(xs) == 0.0)
    assert p.eval(0.2) == 1.0 and p.eval(-5.0) == 1.0
    rise = p.eval(np.linspace(0.1, 0.2, 101))
    assert np.all(np.diff(rise) >= 0) and 0 < rise[50] < 1
    assert not p.point_well


def test_asym_mixed_sides():
    p = ZOO["asym_mixed"]
    for x in (1e-3, 0.1, 0.5):
        assert p.eval(-x) == pytest.approx(x, rel=1e-14)
    for x in (1e-8, 1e-3, 0.1):
        assert p.eval(x) == pytest.approx(1.0 / abs(math.log(x)), rel=1e-14)
    assert not p.even
    # ln|ln x| form keeps the right side finite for |x| = exp(-1e6)
    assert p.log_eval_side(1, np.array([-1e6]))[0] == pytest.approx(-math.log(1e6))


@pytest.mark.parametrize("name", sorted(ZOO))
def test_log_and_direct_evaluators_agree(name):
    p = ZOO[name]
    x = np.concatenate([-np.geomspace(1e-3, 3.0, 400), np.geomspace(1e-3, 3.0, 400)])
    v = p.eval(x)
    lv = p.log_eval(x)
    ok = v > 1e-300
    assert np.all(np.abs(v[ok] - np.exp(lv[ok])) <= 1e-12 * v[ok])


@pytest.mark.parametrize("name", sorted(ZOO))
@given(x=st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_nonnegative(name, x):
    assert ZOO[name].eval(x) >= 0.0


@pytest.mark.parametrize("name", [n for n, p in ZOO.items() if p.point_well])
def test_point_wells_vanish_at_origin(name):
    assert ZOO[name].eval(0.0) == 0.0


@pytest.mark.parametrize("name", sorted(ZOO))
def test_clamp_is_continuous_and_reaches_floor(name):
    p = ZOO[name]
    for side in (-1, 1):
        c = p.edge(side)
        if math.isinf(c):
            continue
        eps = 1e-9
        for pt in (c, 2 * c):
            assert p.eval(side * (pt - eps)) == pytest.approx(p.eval(side * (pt + eps)), abs=1e-6)
        assert p.eval(side * 2.5 * c) == 1.0


def test_power_is_not_clamped():
    assert ZOO["power2"].eval(10.0) == 100.0


def test_make_builtin_errors():
    with pytest.raises(ValueError, match="unknown potential family"):
        make_builtin("nope", {})
    with pytest.raises(ValueError):
        make_builtin("exp_flat", {"alpha": 0.0})
    with pytest.raises(ValueError):
        make_builtin("exp_flat", {"alpha": -1.0})
    with pytest.raises(ValueError):
        make_builtin("plateau", {"a": -0.1})
    with pytest.raises(ValueError):
        make_builtin("power", {"exponent": 2, "bogus": 1})
    with pytest.raises(ValueError):
        make_builtin("exp_flat", {})


def test_check_hypotheses_flat_families():
    grid = dyadic_grid(1000)
    for name in ("exp_flat1", "log_squared"):
        rep = check_hypotheses(ZOO[name], 20, grid)
        assert rep.monotonicity_ok and rep.flat_ok, (name, rep.failures)
        assert list(rep.sampled_n_range) == list(range(1, 21))


@pytest.mark.parametrize("q", [2, 4])
def test_check_hypotheses_power_fails_at_exponent_plus_one(q):
    rep = check_hypotheses(make_builtin("power", {"exponent": q}), q + 1, dyadic_grid(1000))
    assert all(rep.flatness_ok[n] for n in range(1, q + 1))
    assert not rep.flatness_ok[q + 1]
    lo, hi = rep.failures[f"flat+1_n{q + 1}"]
    assert 0 < lo < hi


def test_check_hypotheses_oscillatory_not_monotone():
    rep = check_hypotheses(ZOO["oscillatory"], 1, uniform_grid(1000))
    assert not rep.monotonicity_ok
    assert any(k.startswith("monotone") for k in rep.failures)


def test_check_hypotheses_deterministic():
    a = check_hypotheses(ZOO["log_power2"], 5, dyadic_grid(200))
    b = check_hypotheses(ZOO["log_power2"], 5, dyadic_grid(200))
    assert a == b


def test_check_hypotheses_rejects_bad_grid():
    with pytest.raises(ValueError):
        check_hypotheses(ZOO["exp_flat1"], 3, [0.5, 0.2])
    with pytest.raises(ValueError):
        check_hypotheses(ZOO["exp_flat1"], 0, [0.1, 0.2])


def test_json_round_trip_and_parsing(tmp_path):
    for p in ZOO.values():
        assert Potential.from_json(json.loads(json.dumps(p.to_json()))) == p
    assert parse_potential("exp_flat1") == ZOO["exp_flat1"]
    inline = parse_potential('{"family": "exp_flat", "params": {"alpha": 1}}')
    assert inline == ZOO["exp_flat1"]
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"family": "power", "params": {"exponent": 2}}))
    assert parse_potential(str(f)) == ZOO["power2"]
    with pytest.raises(ValueError):
        parse_potential("not-a-potential")


def test_family_metadata():
    assert FAMILIES["exp_flat"].flat and not FAMILIES["power"].flat
    assert not FAMILIES["oscillatory"].monotone
    assert ZOO["asym_mixed"].edge(1) == pytest.approx(math.exp(-2.0))
