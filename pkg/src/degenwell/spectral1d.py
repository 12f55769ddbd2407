"""Low-lying spectrum of the rescaled one-dimensional operator.

The physical operator ``P = -h**2 d2/dx2 + V`` is conjugated to the unit
interval: with ``w = delta_plus - delta_minus`` and ``x = delta_minus + w y``,
``Q = (w/h)**2 U^-1 P U = -d2/dy2 + W_h(y)``.  ``Q`` has eigenvalues of order
one while those of ``P`` can be as small as ``1e-28``, so every computation
happens on ``Q`` and is mapped back with ``lambda(P) = (h/w)**2 lambda(Q)``.

``Q`` is discretized with the three-point Laplacian on a truncated box with
Dirichlet ends.  The grid error is ``O(dy**2)``; a second solve with the
spacing halved gives a Richardson-extrapolated value and an error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._bisect import bisect_increasing
from .wellwidth import solve_delta_pm, solve_even_delta

__all__ = [
    "W_CAP",
    "GridSpec",
    "ReferenceSpectrum",
    "Spectrum",
    "TruncationError",
    "auto_extent",
    "build_rescaled_potential",
    "dirichlet_interval_reference",
    "eigensolve",
    "eigs_tridiag",
    "far_field",
    "fd_eigenpairs",
    "quadrature_weights",
    "grid_nodes",
    "square_well_reference",
]

W_CAP = 1e12
BARRIER_ACTION = 25.0


class TruncationError(RuntimeError):
    """The requested eigenvalue is not reliably confined by the box."""


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the rescaled operator.

    ``box=None`` sizes the box automatically so that the tunnelling action
    through each barrier exceeds a fixed margin (see :func:`auto_extent`).
    """

    n_points: int = 4096
    box: tuple | None = None
    richardson: bool = True

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("n_points must be >= 64")
        if self.box is not None:
            left, right = self.box
            if not left < 0 < 1 < right:
                raise ValueError(f"box must satisfy left < 0 < 1 < right, got {self.box}")


@dataclass(frozen=True)
class Spectrum:
    h: float
    eigenvalues: np.ndarray
    q_eigenvalues: np.ndarray
    error_estimates: np.ndarray
    widths: object = None
    scale: float = 1.0
    eigenvectors: np.ndarray | None = None
    grid: np.ndarray | None = None
    weights: np.ndarray | None = None
    box: tuple | None = None
    n_points: int = 0
    multiplicities: tuple | None = None
    sectors: tuple | None = None
    flags: tuple = ()

    def to_json(self, vectors=False):
        out = {
            "h": self.h,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "q_eigenvalues": [float(v) for v in self.q_eigenvalues],
            "error_estimates": [float(v) for v in self.error_estimates],
            "scale": self.scale,
            "box": None if self.box is None else [float(b) for b in self.box],
            "n_points": self.n_points,
        }
        if self.widths is not None:
            out["widths"] = self.widths.to_json()
        if self.sectors is not None:
            out["sectors"] = list(self.sectors)
        if self.flags:
            out["flags"] = list(self.flags)
        if vectors and self.eigenvectors is not None:
            out["grid"] = [float(v) for v in self.grid]
            out["eigenvectors"] = [[float(v) for v in row] for row in self.eigenvectors]
        return out


@dataclass(frozen=True)
class ReferenceSpectrum:
    kind: str
    params: dict
    eigenvalues: tuple
    error_estimates: tuple | None = None

    def __getitem__(self, k):
        """1-based access: ``ref[k]`` is the ``k``-th eigenvalue."""
        return self.eigenvalues[k - 1]


# -- tridiagonal eigenproblem ----------------------------------------------


def eigs_tridiag(diag, offdiag, k, want_vectors=False):
    """Lowest ``k`` eigenpairs of a symmetric tridiagonal matrix.

    Eigenvalues come from Sturm-sequence bisection and eigenvectors from
    inverse iteration with reorthogonalization inside clusters (LAPACK
    ``stebz``/``stein`` through SciPy).  The absolute tolerance is set to the
    smallest normal number so that bisection stops on the relative criterion
    instead of ``eps * ||T||``, which would be useless with barrier entries of
    order ``1e12``.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    n = diag.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for dimension {n}")
    if offdiag.size != n - 1:
        raise ValueError("offdiag must have length len(diag) - 1")
    res = eigh_tridiagonal(
        diag, offdiag, eigvals_only=not want_vectors, select="i",
        select_range=(0, k - 1), lapack_driver="stebz", tol=np.finfo(float).tiny,
    )
    if want_vectors:
        vals, vecs = res
        # deterministic sign: largest component positive
        idx = np.argmax(np.abs(vecs), axis=0)
        vecs = vecs * np.sign(vecs[idx, np.arange(vecs.shape[1])])
        return vals, vecs
    return res, None


STRETCH_EXTENT = 16.0


def grid_nodes(left, right, n, pin=None, stretch=None):
    """``n`` interior nodes of ``(left, right)`` and the box they live in.

    Boxes longer than ``STRETCH_EXTENT`` use ``y = c + sinh(s)`` with ``s``
    uniform, which keeps the spacing nearly constant over the well and lets
    it grow exponentially in the barriers; shorter boxes are sampled
    uniformly.  Both maps are smooth, so the finite-volume scheme stays
    second order in the spacing of ``s``.

    ``pin`` is a point that must be a node (the bottom of the well, where
    ``V`` is least regular).  One end of the box is pushed out slightly to
    make that happen; the returned box is the one actually used.  Refining
    ``n -> 2n + 1`` on the returned box keeps ``pin`` on the grid.
    """
    if stretch is None:
        stretch = right - left > STRETCH_EXTENT
    c = 0.5 if pin is None else pin
    if stretch:
        fwd, inv = math.asinh, np.sinh
    else:
        fwd, inv = (lambda v: v), (lambda v: v)
    s0, s1 = fwd(left - c), fwd(right - c)
    ds = (s1 - s0) / (n + 1)
    if pin is not None:
        m = min(max(round(-s0 / ds), 1), n)
        ds = max(-s0 / m, s1 / (n + 1 - m))
        s0, s1 = -m * ds, (n + 1 - m) * ds
    t = s0 + ds * np.arange(1, n + 1)
    if pin is not None:
        t[m - 1] = 0.0
    nodes = c + inv(t)
    return nodes, (float(c + inv(s0)), float(c + inv(s1)))


def quadrature_weights(x, left, right):
    """Trapezoidal weights of interior nodes ``x`` with zero Dirichlet ends."""
    ext = np.concatenate(([left], x, [right]))
    return 0.5 * (ext[2:] - ext[:-2])


def _fd_once(wfun, left, right, n, k, want_vectors, stretch, pin):
    x, (left, right) = grid_nodes(left, right, n, pin, stretch)
    ext = np.concatenate(([left], x, [right]))
    inv = 1.0 / np.diff(ext)  # face conductances
    wts = 0.5 * (ext[2:] - ext[:-2])
    root = np.sqrt(wts)
    diag = (inv[:-1] + inv[1:]) / wts + wfun(x)
    off = -inv[1:-1] / (root[:-1] * root[1:])
    vals, vecs = eigs_tridiag(diag, off, k, want_vectors)
    if vecs is not None:
        vecs = vecs.T / root
    return x, vals, vecs, (left, right)


def fd_eigenpairs(wfun, left, right, n, k, richardson=True, want_vectors=False,
                  stretch=None, pin=None):
    """Eigenpairs of ``-d2/dx2 + W`` on ``(left, right)`` with Dirichlet ends.

    ``wfun`` maps an array of nodes to potential values.  The operator is
    discretized by symmetric finite volumes on the nodes of
    :func:`grid_nodes`; on a uniform grid this is the three-point
    Laplacian.  With ``richardson`` the problem is solved again on the
    nested grid with ``2n + 1`` nodes (spacing halved) and the two values
    are combined assuming an ``O(dx**2)`` error.  Eigenvectors are those of
    the finest grid, normalized to one in the trapezoidal rule of
    :func:`quadrature_weights`.

    Returns
    -------
    x, values, errors, vectors, box
        ``box`` is the interval actually discretized (see :func:`grid_nodes`).
    """
    if stretch is None:
        stretch = right - left > STRETCH_EXTENT
    x, vals, vecs, box = _fd_once(wfun, left, right, n, k,
                                  want_vectors and not richardson, stretch, pin)
    if not richardson:
        return x, vals, np.zeros_like(vals), vecs, box
    x2, vals2, vecs2, _ = _fd_once(wfun, *box, 2 * n + 1, k, want_vectors, stretch, pin)
    extrap = (4.0 * vals2 - vals) / 3.0
    return x2, extrap, np.abs(extrap - vals2), vecs2, box


# -- rescaled operator -------------------------------------------------------


def _log_abs_phys(widths, y):
    """``(side, ln|x|)`` of ``x = delta_minus + y * w`` without cancellation."""
    y = np.asarray(y, dtype=float)
    lm, lp, lw = widths.log_abs_minus, widths.log_plus, widths.log_width
    w = math.exp(lw)
    side = np.ones_like(y)
    logx = np.empty_like(y)
    with np.errstate(divide="ignore"):
        left = y <= 0
        logx[left] = np.logaddexp(lm, np.log(-y[left]) + lw)
        side[left] = -1.0
        right = y >= 1
        logx[right] = np.logaddexp(lp, np.log(y[right] - 1.0) + lw)
        mid = ~(left | right)
        ym = y[mid]
        # inside, measure from the nearer end
        vals = np.where(ym < 0.5, -math.exp(lm) + ym * w, math.exp(lp) - (1.0 - ym) * w)
        side[mid] = np.where(vals >= 0, 1.0, -1.0)
        logx[mid] = np.log(np.abs(vals))
    return side, logx


def build_rescaled_potential(p, widths, y):
    """``W_h(y) = V(delta_minus + y w) / V(delta_plus)``, capped at ``W_CAP``.

    Computed as ``exp(ln V(x) - ln V(delta_plus))``, a pure ratio that never
    underflows even when ``V`` itself is far below the smallest double.
    """
    side, logx = _log_abs_phys(widths, y)
    ref = float(p.log_eval_side(1, np.array([widths.log_plus]))[0])
    logv = np.empty_like(logx)
    for s in (1.0, -1.0):
        m = side == s
        if m.any():
            logv[m] = p.log_eval_side(int(s), logx[m])
    with np.errstate(over="ignore"):
        return np.minimum(np.exp(logv - ref), W_CAP)


def auto_extent(wfun, anchor, direction, energy, action=BARRIER_ACTION,
                min_extent=0.25, max_extent=1e6, samples=512):
    """Distance beyond ``anchor`` needed to confine states of energy ``energy``.

    Doubles the candidate extent until the WKB action
    ``integral sqrt(max(W - energy, 0))`` over it exceeds ``action`` and the
    potential at the far end exceeds ``2 * energy``.
    """
    ext = min_extent
    while ext <= max_extent:
        t = anchor + direction * np.linspace(0.0, ext, samples)
        w = wfun(t)
        s = np.trapezoid(np.sqrt(np.maximum(w - energy, 0.0)), dx=ext / (samples - 1))
        if s >= action and w[-1] >= 2.0 * energy:
            return ext
        ext *= 2.0
    raise TruncationError(f"potential does not confine energy {energy:g} within {max_extent:g}")


def _solve_widths(p, h):
    return solve_even_delta(p, h) if p.even else solve_delta_pm(p, h)


def far_field(wfun, reach):
    """Smallest far-field value of ``W`` on either side of the well.

    For clamped potentials this is ``1 / V(delta_plus)`` in rescaled units,
    the bottom of the essential spectrum of ``Q``.
    """
    return float(np.min(wfun(np.array([-reach, 1.0 + reach]))))


def eigensolve(p, h, k, grid=None, want_vectors=False, widths=None, strict=True):
    """Lowest ``k`` eigenpairs of ``P = -h**2 d2/dx2 + V`` through ``Q``.

    Returns a :class:`Spectrum` with eigenvalues of ``P`` (``eigenvalues``)
    and ``Q`` (``q_eigenvalues``).  Eigenvectors, when requested, are mapped
    back to physical coordinates (``u_P(x) = w**-1/2 u_Q(y)``) and sampled on
    ``Spectrum.grid``.

    A level is trusted when it lies below half the potential at the box
    ends.  Untrusted levels raise :class:`TruncationError` when ``strict``;
    otherwise they are flagged, and levels at or above the far-field value
    of ``W`` are replaced by it.  That value is the bottom of the essential
    spectrum, the conventional ``k``-th eigenvalue of an operator with fewer
    than ``k`` bound states.  It also keeps the reported value an upper
    bound for the true one.
    """
    grid = grid or GridSpec()
    if widths is None:
        widths = _solve_widths(p, h)

    def wfun(y):
        return build_rescaled_potential(p, widths, y)

    # beyond |x| = 4 every clamped family sits on its floor
    reach = 4.0 / widths.width
    floor = far_field(wfun, reach)
    if grid.box is None:
        energy = min(math.pi**2 * k**2 + 1.0, 0.5 * floor)
        cap = max(1e6, reach)
        left = -auto_extent(wfun, 0.0, -1.0, energy, max_extent=cap)
        right = 1.0 + auto_extent(wfun, 1.0, 1.0, energy, max_extent=cap)
        box = (left, right)
    else:
        box = tuple(grid.box)
    pin = math.exp(widths.log_abs_minus - widths.log_width)  # y of x = 0
    y, qvals, qerr, vecs, box = fd_eigenpairs(wfun, box[0], box[1], grid.n_points, k,
                                              grid.richardson, want_vectors, pin=pin)
    edge = float(min(wfun(np.array([box[0]]))[0], wfun(np.array([box[1]]))[0]))
    flags = []
    loose = np.flatnonzero(qvals > 0.5 * edge)
    if loose.size and strict:
        j = int(loose[0]) + 1
        raise TruncationError(
            f"lambda_{j}(Q) = {qvals[j - 1]:.4g} exceeds half the boundary potential {edge:.4g}"
        )
    for i in loose:
        if qvals[i] >= floor:
            qvals[i] = floor
            flags.append(f"essential:{i + 1}")
        else:
            flags.append(f"unconfined:{i + 1}")
    scale = math.exp(widths.log_level)  # h**2 / w**2
    w = widths.width
    phys = wts = None
    if vecs is not None:
        phys = widths.delta_minus + y * w
        wts = quadrature_weights(y, *box) * w
        vecs = vecs / math.sqrt(w)
    return Spectrum(
        h=h, eigenvalues=qvals * scale, q_eigenvalues=qvals, error_estimates=qerr * scale,
        widths=widths, scale=w, eigenvectors=vecs, grid=phys, weights=wts, box=box,
        n_points=grid.n_points, flags=tuple(flags),
    )


# -- reference spectra --------------------------------------------------------


def dirichlet_interval_reference(k, length=1.0):
    """``pi**2 j**2 / length**2`` for ``j = 1..k``."""
    if k < 1 or not length > 0:
        raise ValueError("need k >= 1 and length > 0")
    vals = tuple(math.pi**2 * j * j / length**2 for j in range(1, k + 1))
    return ReferenceSpectrum("dirichlet_interval", {"length": length}, vals)


def _square_well_root(M, j):
    """``j``-th bound state of ``-d2 + M 1_{[0,1]^C}``, or ``None``."""
    sqm = math.sqrt(M)
    if sqm <= (j - 1) * math.pi:
        return None
    m = (j - 1) // 2
    sign = -1.0 if m % 2 else 1.0
    even = j % 2 == 1

    def f(s):
        kappa = math.sqrt(max(M - s * s, 0.0))
        if even:  # s tan(s/2) = kappa
            val = s * math.sin(s / 2) - kappa * math.cos(s / 2)
        else:  # -s cot(s/2) = kappa
            val = -s * math.cos(s / 2) - kappa * math.sin(s / 2)
        return sign * val

    lo = (j - 1) * math.pi
    hi = min(j * math.pi, sqm)
    s, _, _ = bisect_increasing(f, lo, hi)
    return s * s


def square_well_reference(M, k):
    """Lowest ``k`` levels of ``-d2/dx2 + M 1_{[0,1]^C}`` on the line.

    Even and odd states satisfy ``s tan(s/2) = kappa`` and
    ``-s cot(s/2) = kappa`` with ``s = sqrt(E)``, ``kappa = sqrt(M - E)``;
    the ``j``-th state has ``s`` in ``((j-1) pi, j pi)``.  Missing bound
    states are reported as ``M``, the bottom of the essential spectrum.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    vals = []
    for j in range(1, k + 1):
        e = _square_well_root(M, j)
        vals.append(M if e is None else min(e, M))
    return ReferenceSpectrum("square_well", {"M": M}, tuple(vals))
