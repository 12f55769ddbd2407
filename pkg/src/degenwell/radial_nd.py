"""Wells in ``d`` dimensions of the form ``V(x) = V0(|x| theta(x/|x|))``.

With ``delta`` solving ``delta**2 V0(delta) = h**2`` the operator rescaled
by ``x = delta y`` tends to the Dirichlet Laplacian of the star-shaped
domain ``{|y| theta(y/|y|) < 1}``, so that
``lambda_k(P) ~ (h/delta)**2 lambda_k(-Delta_Omega^D)``.

Two routes are provided:

* ``theta = 1`` (radial wells) in any dimension ``d >= 2`` through the
  angular-momentum decomposition.  Each sector ``l`` is a half-line problem
  solved by cell-centred finite volumes, and the sectors are merged with the
  multiplicities of spherical harmonics.  The reference values are squared
  Bessel zeros.
* general ``theta`` in the plane through the five-point Laplacian on a
  square, with a Dirichlet mask for the reference domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from ._bisect import bisect_increasing
from .spectral1d import (
    W_CAP,
    ReferenceSpectrum,
    Spectrum,
    TruncationError,
    auto_extent,
    eigs_tridiag,
)
from .wellwidth import solve_radial_delta

__all__ = [
    "AngularFactor",
    "RadialGrid",
    "RadialWidth",
    "StarDomain",
    "StarGrid",
    "ball_dirichlet_reference",
    "bessel_zeros",
    "mult",
    "radial_eigensolve",
    "rescaled_radial_potential",
    "sided_width_ratios",
    "star_dirichlet_reference_2d",
    "star_domain_eigensolve_2d",
]

L_MAX_CAP = 64
EIGSH_SEED = 20240607


def mult(l, d):
    """Dimension of the space of degree-``l`` spherical harmonics in ``d`` dimensions."""
    if d < 2 or l < 0:
        raise ValueError("need d >= 2 and l >= 0")

    def c(n, r):
        return math.comb(n, r) if n >= r >= 0 else 0

    return c(l + d - 1, d - 1) - c(l + d - 3, d - 1)


# -- Bessel zeros -------------------------------------------------------------


def _bessel_reduced(nu, x):
    """``Gamma(nu+1) (2/x)**nu J_nu(x)`` by its ascending series.

    The series ``sum_m (-x**2/4)**m / (m! (nu+1)_m)`` alternates with terms
    as large as ``exp(x)``, so it is summed in decimal arithmetic with
    enough guard digits to absorb the cancellation.  The value has the sign
    of ``J_nu(x)`` for ``x > 0``.
    """
    digits = 30 + int(0.45 * x)
    with localcontext() as ctx:
        ctx.prec = digits
        q = -(Decimal(x) ** 2) / 4
        nu1 = Decimal(nu) + 1
        term = Decimal(1)
        total = term
        tiny = Decimal(10) ** (-digits)
        m = 0
        while True:
            m += 1
            term = term * q / (m * (nu1 + m - 1))
            total += term
            if m > x and abs(term) < tiny * abs(total):
                break
        return float(total)


def bessel_zeros(nu, count, step=0.25):
    """First ``count`` positive zeros of ``J_nu`` (``nu >= 0``).

    Zeros are bracketed by a sign scan with ``step`` (consecutive zeros are
    more than ``pi/2`` apart) and refined by bisection to full precision.
    """
    if nu < 0 or count < 1:
        raise ValueError("need nu >= 0 and count >= 1")
    zeros = []
    a = max(nu, step)  # j_{nu,1} > nu
    fa = _bessel_reduced(nu, a)
    while len(zeros) < count:
        b = a + step
        fb = _bessel_reduced(nu, b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0:
            sign = 1.0 if fb > 0 else -1.0
            x, _, _ = bisect_increasing(lambda t: sign * _bessel_reduced(nu, t), a, b)
            zeros.append(x)
        a, fa = b, fb
    return zeros


def _merge(levels, k):
    """Expand ``(value, l, mult)`` triples and keep the lowest ``k``."""
    out = []
    for value, l, m, err in sorted(levels, key=lambda t: (t[0], t[1])):
        out.extend([(value, l, err)] * m)
        if len(out) >= k:
            break
    return out[:k]


def ball_dirichlet_reference(d, k):
    """Lowest ``k`` Dirichlet eigenvalues of the unit ball in ``R**d``.

    The values are ``j_{nu,m}**2`` with ``nu = l + (d - 2)/2``, repeated
    ``mult(l, d)`` times.  Sectors are added until ``nu**2`` (a lower bound
    for the sector's first value) exceeds the ``k``-th collected value.
    """
    if d < 2:
        raise ValueError("the ball reference needs d >= 2")
    levels = []
    l = 0
    while True:
        nu = l + (d - 2) / 2.0
        merged = _merge(levels, k)
        if len(merged) >= k and nu * nu > merged[-1][0]:
            break
        for j in bessel_zeros(nu, k):
            levels.append((j * j, l, mult(l, d), 0.0))
        l += 1
    merged = _merge(levels, k)
    return ReferenceSpectrum(
        "dirichlet_ball",
        {"dimension": d, "sectors": [m[1] for m in merged]},
        tuple(m[0] for m in merged),
    )


# -- radial wells ---------------------------------------------------------------


@dataclass(frozen=True)
class RadialWidth:
    """Radial well width ``delta`` solving ``delta**2 V0(delta) = h**2``."""

    h: float
    delta: float
    dimension: int

    @property
    def log_level(self):
        return 2.0 * math.log(self.h) - 2.0 * math.log(self.delta)

    def to_json(self):
        return {"h": self.h, "delta": self.delta, "dimension": self.dimension}


@dataclass(frozen=True)
class RadialGrid:
    n_cells: int = 4096
    radius: float | None = None
    richardson: bool = True

    def __post_init__(self):
        if self.n_cells < 64:
            raise ValueError("n_cells must be >= 64")
        if self.radius is not None and not self.radius > 1.0:
            raise ValueError("radius must exceed 1")


def rescaled_radial_potential(v0, delta, rho):
    """``V0(delta rho) / V0(delta)`` as a log-domain ratio, capped at ``W_CAP``."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    pos = rho > 0
    ref = float(v0.log_eval_side(1, np.array([math.log(delta)]))[0])
    with np.errstate(over="ignore"):
        out[pos] = np.exp(v0.log_eval_side(1, np.log(delta * rho[pos])) - ref)
    return np.minimum(out, W_CAP)


def _sector_fv(wfun, d, l, n, radius, k):
    """Lowest ``k`` values of ``-Delta + W`` on the ``l``-th sector of the ball.

    Finite volumes on ``n`` cells of ``[0, radius]``: the radial flux is
    weighted by ``r**(d-1)`` on faces, cell volumes are exact, and the
    Dirichlet condition at ``radius`` is imposed through a mirrored ghost
    cell.  The flux vanishes at the origin for every ``l``, which is the
    regular solution.  The scheme is symmetrized to a tridiagonal matrix
    and is second order for every ``d`` and ``l``.
    """
    dr = radius / n
    rc = (np.arange(1, n + 1) - 0.5) * dr
    rf = np.arange(0, n + 1) * dr
    f = rf ** (d - 1)
    g = (rf[1:] ** d - rf[:-1] ** d) / (d * dr)
    diag = (f[1:] + f[:-1]) / (g * dr * dr) + l * (l + d - 2) / (rc * rc) + wfun(rc)
    diag[-1] += f[-1] / (g[-1] * dr * dr)
    off = -f[1:-1] / np.sqrt(g[:-1] * g[1:]) / (dr * dr)
    vals, _ = eigs_tridiag(diag, off, min(k, n))
    return vals


def _sector(wfun, d, l, grid, radius, k):
    a = _sector_fv(wfun, d, l, grid.n_cells, radius, k)
    if not grid.richardson:
        return a, np.zeros_like(a)
    b = _sector_fv(wfun, d, l, 2 * grid.n_cells, radius, k)
    ext = (4.0 * b - a) / 3.0
    return ext, np.abs(ext - b)


def radial_eigensolve(v0, h, d, k, grid=None):
    """Lowest ``k`` eigenvalues of ``-h**2 Delta + V0(|x|)`` in ``R**d``.

    The angular sectors ``l = 0, 1, ...`` are solved one after another;
    each sector's values increase with ``l``, so the loop stops once a
    sector's lowest value exceeds the ``k``-th merged value.  Values carry
    their multiplicity (``Spectrum.multiplicities``) and sector
    (``Spectrum.sectors``), and are repeated accordingly in
    ``Spectrum.eigenvalues``.
    """
    if d < 2:
        raise ValueError("radial decomposition needs d >= 2; use eigensolve in 1D")
    grid = grid or RadialGrid()
    delta = solve_radial_delta(v0, h)
    width = RadialWidth(h, delta, d)

    def wfun(r):
        return rescaled_radial_potential(v0, delta, r)

    floor = float(wfun(np.array([4.0 / delta]))[0])
    if grid.radius is None:
        top = ball_dirichlet_reference(d, k)[k]
        energy = min(top + 1.0, 0.5 * floor)
        radius = 1.0 + auto_extent(wfun, 1.0, 1.0, energy, max_extent=max(1e6, 4.0 / delta))
    else:
        radius = grid.radius
    levels = []
    l = 0
    while True:
        merged = _merge(levels, k)
        if l > L_MAX_CAP:
            raise TruncationError(f"more than {L_MAX_CAP} angular sectors needed for k={k}")
        vals, errs = _sector(wfun, d, l, grid, radius, k)
        if len(merged) >= k and vals[0] > merged[-1][0]:
            break
        levels.extend((float(v), l, mult(l, d), float(e)) for v, e in zip(vals, errs))
        l += 1
    merged = _merge(levels, k)
    q = np.array([m[0] for m in merged])
    err = np.array([m[2] for m in merged])
    wall = float(wfun(np.array([radius]))[0])
    if q[-1] > 0.5 * wall:
        raise TruncationError(
            f"lambda_{k}(Q) = {q[-1]:.4g} exceeds half the boundary potential {wall:.4g}"
        )
    sectors = tuple(m[1] for m in merged)
    scale = math.exp(width.log_level)
    return Spectrum(
        h=h, eigenvalues=q * scale, q_eigenvalues=q, error_estimates=err * scale,
        widths=width, scale=delta, box=(0.0, radius), n_points=grid.n_cells,
        multiplicities=tuple(mult(l, d) for l in sectors), sectors=sectors,
    )


def sided_width_ratios(v0, theta_minus, theta_plus, h):
    """``theta(+-1) |delta_pm(h)| / delta(h)`` for the 1D well ``V0(|x| theta(+-1))``.

    ``delta`` is the radial width of ``V0`` and ``delta_pm`` the widths of
    the one-dimensional well; both ratios tend to one for flat ``V0``.
    """
    from .potentials import make_builtin
    from .wellwidth import solve_delta_pm

    params = dict(v0.params)
    params.update(theta_minus=theta_minus, theta_plus=theta_plus)
    w = solve_delta_pm(make_builtin(v0.family, params), h)
    d = solve_radial_delta(v0, h)
    return theta_minus * abs(w.delta_minus) / d, theta_plus * w.delta_plus / d


# -- star-shaped domains in the plane -----------------------------------------------


@dataclass(frozen=True)
class AngularFactor:
    """Positive function on the circle, tabulated at ``2 pi j / n``.

    Values in between are linearly interpolated with periodic wrap-around.
    """

    values: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValueError("theta needs at least three tabulated values")
        if not np.all(np.isfinite(v)) or v.min() <= 0:
            raise ValueError("theta must be finite and strictly positive")
        object.__setattr__(self, "values", tuple(float(t) for t in v))

    @classmethod
    def constant(cls, c=1.0, n=8):
        return cls((c,) * n)

    @classmethod
    def ellipse(cls, a, b, n=4096):
        """``theta`` of the ellipse with semi-axes ``a`` (x) and ``b`` (y)."""
        phi = 2.0 * math.pi * np.arange(n) / n
        return cls(tuple(np.sqrt(np.cos(phi) ** 2 / a**2 + np.sin(phi) ** 2 / b**2)))

    def __call__(self, phi):
        v = np.asarray(self.values)
        n = v.size
        t = np.mod(np.asarray(phi, dtype=float), 2.0 * math.pi) * n / (2.0 * math.pi)
        i = np.floor(t).astype(int) % n
        frac = t - np.floor(t)
        return v[i] * (1.0 - frac) + v[(i + 1) % n] * frac

    @property
    def min(self):
        return min(self.values)

    @property
    def max(self):
        return max(self.values)

    def to_json(self):
        return list(self.values)


@dataclass(frozen=True)
class StarDomain:
    """``Omega = {x : |x| theta(x/|x|) < 1}`` in ``dimension`` 2."""

    theta: AngularFactor
    dimension: int = 2

    def __post_init__(self):
        if self.dimension != 2:
            raise ValueError("general angular factors are supported in the plane only")

    def gauge(self, x, y):
        """``|x| theta(x/|x|)``; the domain is where this is below one."""
        return np.hypot(x, y) * self.theta(np.arctan2(y, x))

    def contains(self, x, y):
        return self.gauge(x, y) < 1.0

    @property
    def max_radius(self):
        return 1.0 / self.theta.min

    @property
    def min_radius(self):
        return 1.0 / self.theta.max

    def describe(self):
        return (f"star-shaped domain in R^2 with boundary radius between "
                f"{self.min_radius:.4g} and {self.max_radius:.4g}")


@dataclass(frozen=True)
class StarGrid:
    """``n`` interior nodes per axis on ``[-R, R]**2``; refinement to ``2n + 1``."""

    n: int = 160
    richardson: bool = True
    half_width: float | None = None

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("n must be >= 16")


MIN_CELLS_ACROSS = 10


def _nodes(n, half):
    dx = 2.0 * half / (n + 1)
    x = -half + dx * np.arange(1, n + 1)
    return x, dx


def _laplacian(n, dx):
    t = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / dx**2
    eye = sp.identity(n)
    return (sp.kron(t, eye) + sp.kron(eye, t)).tocsr()


def _lowest(mat, k, seed=EIGSH_SEED):
    # shift-invert about 0 finds the bottom of a positive operator;
    # a seeded start vector makes the result reproducible
    v0 = np.random.default_rng(seed).standard_normal(mat.shape[0])
    vals = eigsh(mat, k=k, sigma=0.0, which="LM", v0=v0, return_eigenvectors=False)
    return np.sort(vals)


def _check_resolution(domain, dx, k, interior):
    if domain.min_radius / dx < MIN_CELLS_ACROSS or interior < 20 * k:
        raise ValueError(
            f"grid too coarse: {domain.min_radius / dx:.1f} cells across the narrowest "
            f"radius, {interior} interior nodes for k={k}"
        )


def _masked_once(domain, n, half, k, seed):
    x, dx = _nodes(n, half)
    X, Y = np.meshgrid(x, x, indexing="ij")
    keep = domain.contains(X, Y).ravel()
    _check_resolution(domain, dx, k, int(keep.sum()))
    lap = _laplacian(n, dx)
    return _lowest(lap[keep][:, keep], k, seed)


def star_dirichlet_reference_2d(theta, grid=None, k=1, seed=EIGSH_SEED):
    """Dirichlet eigenvalues of the star-shaped domain by masked finite differences.

    Nodes outside the domain are removed (a staircase boundary, first-order
    accurate).  With ``richardson`` the grid is refined to ``2n + 1`` and
    the two values are combined as ``2 fine - coarse``; the error estimate
    is ``|extrapolated - fine|``.
    """
    grid = grid or StarGrid()
    domain = StarDomain(theta if isinstance(theta, AngularFactor) else AngularFactor(theta))
    half = grid.half_width or 1.05 * domain.max_radius
    a = _masked_once(domain, grid.n, half, k, seed)
    err = np.zeros_like(a)
    if grid.richardson:
        b = _masked_once(domain, 2 * grid.n + 1, half, k, seed)
        a, err = 2.0 * b - a, np.abs(b - a)
    return ReferenceSpectrum(
        "dirichlet_star",
        {"theta": domain.theta.to_json(), "n": grid.n, "half_width": half},
        tuple(float(v) for v in a), tuple(float(e) for e in err),
    )


def _star_once(wfun, domain, n, half, k, seed):
    x, dx = _nodes(n, half)
    X, Y = np.meshgrid(x, x, indexing="ij")
    _check_resolution(domain, dx, k, n * n)
    mat = _laplacian(n, dx) + sp.diags(wfun(X, Y).ravel())
    return _lowest(mat.tocsr(), k, seed)


def star_domain_eigensolve_2d(v0, theta, h, k, grid=None, separable=False,
                              seed=EIGSH_SEED):
    """Lowest ``k`` eigenvalues of ``-h**2 Delta + V`` in the plane.

    ``V(x) = V0(|x| theta(x/|x|))`` by default.  With ``separable`` the
    product form ``V0(|x|) theta(x/|x|)`` is used instead; there ``theta``
    only rescales the barrier and the limit domain is the unit disk.

    The operator is rescaled by ``x = delta y`` with the radial width
    ``delta`` and discretized by the five-point Laplacian on ``[-R, R]**2``
    with Dirichlet ends; ``R`` is sized from the barrier along the
    direction where it is weakest.  Richardson extrapolation assumes an
    ``O(dx**2)`` error.
    """
    grid = grid or StarGrid()
    theta = theta if isinstance(theta, AngularFactor) else AngularFactor(theta)
    domain = StarDomain(theta)
    delta = solve_radial_delta(v0, h)
    width = RadialWidth(h, delta, 2)

    if separable:
        def wfun(X, Y):
            r = np.hypot(X, Y)
            return np.minimum(theta(np.arctan2(Y, X)) * rescaled_radial_potential(v0, delta, r), W_CAP)

        limit = StarDomain(AngularFactor.constant(1.0))
        slice_fn = lambda r: theta.min * rescaled_radial_potential(v0, delta, r)  # noqa: E731
        r0 = 1.0
    else:
        def wfun(X, Y):
            return rescaled_radial_potential(v0, delta, domain.gauge(X, Y))

        limit = domain
        slice_fn = lambda r: rescaled_radial_potential(v0, delta, r * theta.min)  # noqa: E731
        r0 = domain.max_radius

    if grid.half_width is None:
        top = ball_dirichlet_reference(2, k)[k] / limit.min_radius**2
        floor = float(slice_fn(np.array([4.0 / (delta * theta.min)]))[0])
        energy = min(top + 1.0, 0.5 * floor)
        half = r0 + auto_extent(slice_fn, r0, 1.0, energy, min_extent=0.05 * r0)
    else:
        half = grid.half_width
    a = _star_once(wfun, limit, grid.n, half, k, seed)
    err = np.zeros_like(a)
    if grid.richardson:
        b = _star_once(wfun, limit, 2 * grid.n + 1, half, k, seed)
        a, err = (4.0 * b - a) / 3.0, np.abs((4.0 * b - a) / 3.0 - b)
    scale = math.exp(width.log_level)
    return Spectrum(
        h=h, eigenvalues=a * scale, q_eigenvalues=a, error_estimates=err * scale,
        widths=width, scale=delta, box=(-half, half), n_points=grid.n,
        flags=("separable",) if separable else (),
    )
