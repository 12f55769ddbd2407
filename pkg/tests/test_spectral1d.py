import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degenwell.potentials import make_builtin, zoo
from degenwell.spectral1d import (
    GridSpec,
    TruncationError,
    build_rescaled_potential,
    dirichlet_interval_reference,
    eigensolve,
    eigs_tridiag,
    fd_eigenpairs,
    grid_nodes,
    quadrature_weights,
    square_well_reference,
)
from degenwell.wellwidth import solve_even_delta

from .oracles import exp_flat_even_delta

ZOO = zoo()
BRACKET_WELLS = [n for n, p in ZOO.items() if p.point_well and p.monotone]


def free(x):
    return np.zeros_like(x)


# -- rescaled potential ---------------------------------------------------------


@pytest.mark.parametrize("name", ["power2", "exp_flat1", "log_squared", "asym_mixed"])
def test_rescaled_potential_is_one_at_the_well_edges(name):
    p = ZOO[name]
    w = solve_even_delta(p, 1e-6) if p.even else None
    if w is None:
        from degenwell.wellwidth import solve_delta_pm
        w = solve_delta_pm(p, 1e-6)
    vals = build_rescaled_potential(p, w, np.array([0.0, 1.0]))
    assert vals == pytest.approx([1.0, 1.0], rel=1e-12)


def test_rescaled_exp_flat_midpoint_matches_oracle():
    h = 1e-6
    p = ZOO["exp_flat1"]
    w = solve_even_delta(p, h)
    d = float(exp_flat_even_delta(h))
    # y = 1/2 is x = 0, the bottom of the well; y = 3/4 is x = delta / 2
    mid, quarter = build_rescaled_potential(p, w, np.array([0.5, 0.75]))
    assert mid == 0.0
    assert quarter == pytest.approx(math.exp(-1.0 / d), rel=1e-9)
    assert quarter < 1e-9


def test_rescaled_potential_cap():
    p = ZOO["exp_flat1"]
    w = solve_even_delta(p, 1e-12)
    assert build_rescaled_potential(p, w, np.array([-50.0]))[0] == 1e12


# -- tridiagonal solver ---------------------------------------------------------


def test_eigs_tridiag_free_laplacian_closed_form():
    n = 1000
    dx = 1.0 / (n + 1)
    vals, _ = eigs_tridiag(np.full(n, 2.0 / dx**2), np.full(n - 1, -1.0 / dx**2), 3)
    exact = 4.0 / dx**2 * np.sin(np.pi * np.arange(1, 4) * dx / 2) ** 2
    # rounding the entries (~4e6) already perturbs lambda_1 (~10) by ~eps * 4e5
    np.testing.assert_allclose(vals, exact, rtol=1e-11)
    assert abs(vals[0] - math.pi**2) < 1e-5


def test_eigs_tridiag_diagonal():
    vals, vecs = eigs_tridiag(np.full(7, 3.5), np.zeros(6), 4, want_vectors=True)
    np.testing.assert_allclose(vals, 3.5)
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(4), atol=1e-12)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_eigs_tridiag_matches_dense(seed):
    rng = np.random.default_rng(seed)
    d, e = rng.normal(size=50), rng.normal(size=49)
    dense = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    vals, vecs = eigs_tridiag(d, e, 10, want_vectors=True)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(dense)[:10], atol=1e-10)
    np.testing.assert_allclose(dense @ vecs, vecs * vals, atol=1e-8)


def test_eigs_tridiag_errors():
    with pytest.raises(ValueError, match="out of range"):
        eigs_tridiag(np.ones(5), np.zeros(4), 6)
    with pytest.raises(ValueError, match="out of range"):
        eigs_tridiag(np.ones(5), np.zeros(4), 0)
    with pytest.raises(ValueError, match="offdiag"):
        eigs_tridiag(np.ones(5), np.zeros(5), 1)


# -- grids and the finite-volume scheme ---------------------------------------------


def test_grid_pin_is_a_node_at_both_levels():
    x, box = grid_nodes(-30.0, 31.0, 500, pin=0.37)
    assert np.any(x == 0.37)
    x2, _ = grid_nodes(*box, 1001, pin=0.37)
    assert np.any(x2 == 0.37)
    assert box[0] <= -30.0 + 1e-12 or box[1] >= 31.0 - 1e-12


def test_quadrature_weights_integrate_a_gaussian():
    errs = []
    for n in (1500, 3001):
        x, box = grid_nodes(-20.0, 21.0, n)
        total = np.sum(quadrature_weights(x, *box) * np.exp(-(x - 0.5) ** 2))
        errs.append(abs(total - math.sqrt(math.pi)))
    # second order in the stretched coordinate
    assert errs[1] < 1e-5
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_dirichlet_order_two():
    exact = math.pi**2 * np.arange(1, 6) ** 2
    errs = []
    for n in (512, 1024, 2048, 4096, 8192):
        _, vals, _, _, _ = fd_eigenpairs(free, 0.0, 1.0, n, 5, richardson=False)
        errs.append(np.abs(vals - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    # at n = 8192 the k = 1 error (~1e-7) nears the rounding floor eps * 4 n**2
    np.testing.assert_allclose(ratios, 4.0, rtol=0.02)


def test_dirichlet_richardson():
    _, vals, est, _, _ = fd_eigenpairs(free, 0.0, 1.0, 4096, 5)
    exact = np.array(dirichlet_interval_reference(5).eigenvalues)
    assert np.max(np.abs(vals / exact - 1)) <= 1e-8
    assert np.all(est > np.abs(vals - exact))


def test_eigenvectors_orthonormal():
    x, _, _, vecs, box = fd_eigenpairs(lambda y: 50 * (y - 0.5) ** 2, -1.0, 2.0, 2000, 5,
                                       want_vectors=True)
    wts = quadrature_weights(x, *box)
    gram = (vecs * wts) @ vecs.T
    assert np.max(np.abs(gram - np.eye(5))) <= 1e-8
    np.testing.assert_allclose(np.diag(gram), 1.0, atol=1e-12)


# -- full solves ------------------------------------------------------------------------


def test_harmonic_ladder():
    s = eigensolve(make_builtin("power", {"exponent": 2}), 1e-3, 3)
    np.testing.assert_allclose(s.eigenvalues / 1e-3, [1, 3, 5], rtol=1e-4)


def test_quartic_exact_scaling():
    p = make_builtin("power", {"exponent": 4})
    a = eigensolve(p, 1e-2, 3).eigenvalues / 1e-2 ** (4 / 3)
    b = eigensolve(p, 1e-3, 3).eigenvalues / 1e-3 ** (4 / 3)
    np.testing.assert_allclose(a, b, rtol=1e-6)


def test_exp_flat_first_level_in_window():
    s = eigensolve(ZOO["exp_flat1"], 1e-12, 1)
    assert 0.5 * math.pi**2 < s.q_eigenvalues[0] < math.pi**2
    assert s.eigenvalues[0] == pytest.approx(s.q_eigenvalues[0] * 1e-24 / s.widths.width**2,
                                             rel=1e-12)


def test_spectrum_vectors_unit_norm_and_sorted():
    s = eigensolve(ZOO["exp_flat1"], 1e-8, 5, want_vectors=True)
    norms = (s.eigenvectors**2 * s.weights).sum(axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)
    assert np.all(np.diff(s.eigenvalues) > s.error_estimates[1:] + s.error_estimates[:-1])


def test_box_independence():
    p = ZOO["exp_flat1"]
    a = eigensolve(p, 1e-10, 3, GridSpec(box=(-1.0, 2.0)))
    b = eigensolve(p, 1e-10, 3, GridSpec(box=(-2.0, 3.0)))
    diff = np.abs(a.q_eigenvalues - b.q_eigenvalues)
    assert np.all(diff <= np.maximum(a.error_estimates, b.error_estimates) / a.eigenvalues
                  * a.q_eigenvalues + 1e-12)


def test_truncation_strict_and_lenient():
    p = ZOO["power4"]
    with pytest.raises(TruncationError):
        eigensolve(p, 1e-3, 3, GridSpec(box=(-0.2, 1.2)))
    s = eigensolve(ZOO["log_power2"], 0.3, 3, strict=False)
    assert any(f.startswith("essential:") for f in s.flags)
    # a clipped level sits on the bottom of the essential spectrum
    assert s.q_eigenvalues[-1] == pytest.approx(s.q_eigenvalues[-2])


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(n_points=10)
    with pytest.raises(ValueError):
        GridSpec(box=(0.5, 2.0))
    with pytest.raises(ValueError):
        GridSpec(box=(-1.0, 0.9))


@settings(max_examples=25)
@given(st.sampled_from(BRACKET_WELLS), st.floats(min_value=-23.0, max_value=-4.6))
def test_form_monotonicity(name, logh):
    s = eigensolve(ZOO[name], math.exp(logh), 2, strict=False)
    lower = np.array(square_well_reference(1.0, 2).eigenvalues)
    upper = math.pi**2 * np.arange(1, 3) ** 2 + 1.0
    err = s.error_estimates / s.eigenvalues * s.q_eigenvalues
    assert np.all(s.q_eigenvalues + err >= lower)
    assert np.all(s.q_eigenvalues - err <= upper)


# -- references --------------------------------------------------------------------


def test_dirichlet_interval_reference():
    assert dirichlet_interval_reference(1)[1] == math.pi**2
    assert dirichlet_interval_reference(3)[3] == 9 * math.pi**2
    assert dirichlet_interval_reference(2, 0.5)[2] == pytest.approx(16 * math.pi**2, rel=1e-15)
    with pytest.raises(ValueError):
        dirichlet_interval_reference(0)


def test_square_well_shallow():
    ref = square_well_reference(1.0, 3)
    assert 0 < ref[1] < 1
    assert ref[2] == 1.0 and ref[3] == 1.0


def _count_bound_states(M, samples=20001):
    # sign changes of both matching functions below sqrt(M)
    s = np.linspace(1e-9, math.sqrt(M) * (1 - 1e-12), samples)
    kappa = np.sqrt(M - s * s)
    even = s * np.sin(s / 2) - kappa * np.cos(s / 2)
    odd = -s * np.cos(s / 2) - kappa * np.sin(s / 2)
    return int(np.sum(np.diff(np.sign(even)) != 0) + np.sum(np.diff(np.sign(odd)) != 0))


@pytest.mark.parametrize("M", [1.0, 20.0, 100.0, 1000.0])
def test_square_well_bound_state_count(M):
    n = _count_bound_states(M)
    ref = square_well_reference(M, n + 1)
    assert all(v < M for v in ref.eigenvalues[:n])
    assert ref[n + 1] == M


def test_square_well_matches_finite_differences():
    M = 100.0

    def step(y):
        out = np.where((y > 0) & (y < 1), 0.0, M)
        # the jump falls on nodes at both levels; use the mean value there
        return np.where((y == 0) | (y == 1), 0.5 * M, out)

    _, vals, _, _, _ = fd_eigenpairs(step, -1.0, 2.0, 5999, 2, pin=0.0)
    ref = square_well_reference(M, 2)
    np.testing.assert_allclose(vals, ref.eigenvalues, rtol=1e-6)


def test_square_well_large_coupling_trend():
    ms = [1e2, 1e4, 1e6, 1e8]
    gaps = np.array([math.pi**2 - square_well_reference(m, 1)[1] for m in ms])
    assert np.all(gaps > 0) and np.all(np.diff(gaps) < 0)
    np.testing.assert_allclose(gaps * np.sqrt(ms), 4 * math.pi**2, rtol=0.25)


def test_spectrum_json():
    s = eigensolve(ZOO["power2"], 1e-2, 2)
    out = s.to_json()
    assert set(out) >= {"h", "eigenvalues", "q_eigenvalues", "error_estimates", "widths", "box"}
