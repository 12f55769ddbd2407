"""Executable forms of the flat-well asymptotics.

For a flat well the rescaled operator ``Q`` converges to the Dirichlet
Laplacian of the unit interval, so that::

    lambda_k(P) ~ pi**2 k**2 h**2 / (delta_plus - delta_minus)**2

with eigenvectors close to sine arcs on ``[delta_minus, delta_plus]``.  For
any point well (flat or not) ``lambda_k(P)`` stays within fixed multiples of
``h**2 / (delta_plus - delta_minus)**2``.  This module turns those
statements into checks: predictions, two-sided brackets, eigenvector
residuals, remainder fits over ``h`` sweeps and a probe for the growth of
``lambda_1 / h**2``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .spectral1d import (
    GridSpec,
    Spectrum,
    auto_extent,
    eigensolve,
    fd_eigenpairs,
    quadrature_weights,
    square_well_reference,
)

__all__ = [
    "BracketReport",
    "ProbeResult",
    "RemainderFit",
    "SweepRecord",
    "SweepResult",
    "bracket_check",
    "eigenvector_residual",
    "first_ratio_probe",
    "fit_remainder",
    "predict_lambda",
    "sine_profile",
    "sweep",
]

# decision constants of the first-eigenvalue probe
PROBE_GROWTH = 10.0
PROBE_VARIATION = 0.05


def predict_lambda(w, k):
    """Leading-order ``lambda_k(P) = pi**2 k**2 h**2 / (delta_plus - delta_minus)**2``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.pi**2 * k * k * math.exp(w.log_level)


# -- two-sided bracket --------------------------------------------------------


@dataclass(frozen=True)
class BracketReport:
    k: int
    value: float
    error: float
    lower: float
    upper: float

    @property
    def lower_margin(self):
        """``(value - lower) / lower``; negative when the bound is violated."""
        return (self.value - self.lower) / self.lower

    @property
    def upper_margin(self):
        return (self.upper - self.value) / self.upper

    @property
    def ok(self):
        return self.lower <= self.value + self.error and self.value - self.error <= self.upper

    def to_json(self):
        return {
            "k": self.k, "value": self.value, "error": self.error,
            "lower": self.lower, "upper": self.upper,
            "lower_margin": self.lower_margin, "upper_margin": self.upper_margin,
            "ok": self.ok,
        }


def bracket_check(s: Spectrum, k: int) -> BracketReport:
    """Check ``c_k <= lambda_k(P) w**2 / h**2 <= pi**2 k**2 + 1``.

    The upper constant comes from the Dirichlet interval, the lower one is
    the ``k``-th level of ``-d2/dx2 + 1_{[0,1]^C}`` (``1`` when that
    operator has fewer than ``k`` bound states).  Both sides are compared
    within the spectrum's error estimate.
    """
    if s.widths is None:
        raise ValueError("spectrum carries no well widths")
    scale = math.exp(s.widths.log_level)
    c_k = square_well_reference(1.0, k)[k]
    return BracketReport(
        k=k, value=float(s.eigenvalues[k - 1]), error=float(s.error_estimates[k - 1]),
        lower=c_k * scale, upper=(math.pi**2 * k * k + 1.0) * scale,
    )


# -- eigenvector profiles -----------------------------------------------------


def sine_profile(w, k, grid, weights=None):
    """``sqrt(2/w) sin(pi k (x - delta_minus) / w)`` on ``[delta_minus, delta_plus]``.

    Zero outside the interval.  The samples are rescaled to unit norm in the
    discrete inner product with ``weights`` (trapezoidal weights of ``grid``
    when omitted), which differs from the continuous normalization only by
    the quadrature error.
    """
    x = np.asarray(grid, dtype=float)
    width = w.width
    t = (x - w.delta_minus) / width
    inside = (t >= 0.0) & (t <= 1.0)
    v = np.where(inside, math.sqrt(2.0 / width) * np.sin(math.pi * k * t), 0.0)
    if weights is None:
        weights = quadrature_weights(x, x[0], x[-1])
    norm = math.sqrt(float(np.sum(weights * v * v)))
    return v / norm if norm > 0 else v


def eigenvector_residual(s: Spectrum, k: int) -> float:
    """``min over sign of ||sign * u_k - v_k||`` in the discrete ``L2`` norm."""
    if s.eigenvectors is None:
        raise ValueError("spectrum was computed without eigenvectors")
    u = s.eigenvectors[k - 1]
    v = sine_profile(s.widths, k, s.grid, s.weights)
    return min(
        math.sqrt(float(np.sum(s.weights * (sign * u - v) ** 2))) for sign in (1.0, -1.0)
    )


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class RemainderFit:
    """Fit of ``|ratio - 1| = c * m(h)`` with a fixed model ``m``."""

    model: str
    constant: float
    quality: float
    n_points: int

    def to_json(self):
        return {"model": self.model, "constant": self.constant,
                "quality": self.quality, "n_points": self.n_points}


def _loglog_remainder(h):
    lh = np.abs(np.log(h))
    return np.log(lh) / lh


REMAINDER_MODELS = {"c*ln|ln h|/|ln h|": _loglog_remainder}


def fit_remainder(h, deviation, model="c*ln|ln h|/|ln h|"):
    """Least-squares fit of ``deviation = c * m(h)`` in log-log coordinates.

    The slope is fixed to one (only ``ln c`` is fitted), so ``quality`` is
    the coefficient of determination of ``ln deviation`` against that
    constrained model; it can be negative when the model is wrong.
    """
    h = np.asarray(h, dtype=float)
    d = np.asarray(deviation, dtype=float)
    if h.size < 2 or np.any(d <= 0):
        raise ValueError("need at least two positive deviations")
    y = np.log(d)
    base = np.log(REMAINDER_MODELS[model](h))
    logc = float(np.mean(y - base))
    resid = y - (base + logc)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    quality = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RemainderFit(model, math.exp(logc), quality, int(h.size))


@dataclass(frozen=True)
class SweepRecord:
    h: float
    widths: object
    lambda_numeric: tuple
    lambda_predicted: tuple
    ratio: tuple
    error_estimates: tuple
    eigvec_residual: tuple | None
    flags: tuple = ()

    def to_json(self):
        out = {
            "h": self.h,
            "widths": self.widths.to_json(),
            "lambda_numeric": list(self.lambda_numeric),
            "lambda_predicted": list(self.lambda_predicted),
            "ratio": list(self.ratio),
            "error_estimates": list(self.error_estimates),
        }
        if self.eigvec_residual is not None:
            out["eigvec_residual"] = list(self.eigvec_residual)
        if self.flags:
            out["flags"] = list(self.flags)
        return out


@dataclass(frozen=True)
class SweepResult:
    h_grid: tuple
    records: tuple
    fitted_remainder: RemainderFit | None

    def ratios(self, k=1):
        return np.array([r.ratio[k - 1] for r in self.records])

    def deviations(self, k=1):
        return np.abs(self.ratios(k) - 1.0)

    def converging(self, k=1, tail=None):
        """``|ratio_k - 1|`` strictly decreasing over the last ``tail`` points."""
        d = self.deviations(k)
        d = d[-(tail or max(2, d.size // 2)):]
        return bool(np.all(np.diff(d) < 0))

    def to_json(self):
        return {
            "h_grid": list(self.h_grid),
            "records": [r.to_json() for r in self.records],
            "fitted_remainder": None if self.fitted_remainder is None
            else self.fitted_remainder.to_json(),
            "converging": self.converging(),
        }


def _sweep_point(p, h, k_max, grid, vectors):
    s = eigensolve(p, h, k_max, grid, want_vectors=vectors, strict=False)
    pred = tuple(predict_lambda(s.widths, k) for k in range(1, k_max + 1))
    lam = tuple(float(v) for v in s.eigenvalues)
    res = None
    if vectors:
        res = tuple(eigenvector_residual(s, k) for k in range(1, k_max + 1))
    return SweepRecord(
        h=h, widths=s.widths, lambda_numeric=lam, lambda_predicted=pred,
        ratio=tuple(a / b for a, b in zip(lam, pred)),
        error_estimates=tuple(float(e) for e in s.error_estimates),
        eigvec_residual=res, flags=s.flags,
    )


def default_jobs():
    env = os.environ.get("DEGENWELL_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, args, jobs=1):
    """``[fn(*a) for a in args]``, optionally over worker processes.

    Results come back in input order whatever the number of workers.
    """
    args = list(args)
    if jobs <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as ex:
        return list(ex.map(fn, *zip(*args)))


def sweep(p, h_grid, k_max=1, grid=None, vectors=False, jobs=1, fit_tail=None):
    """Solve over a grid of ``h`` and compare with the leading-order law.

    ``h_grid`` is sorted into decreasing order.  The remainder model
    ``c ln|ln h| / |ln h|`` is fitted to ``|ratio_1 - 1|`` over the last
    ``fit_tail`` points (all points by default).
    """
    hs = sorted((float(h) for h in h_grid), reverse=True)
    if len(set(hs)) != len(hs):
        raise ValueError("h_grid contains duplicates")
    if any(not h > 0 for h in hs):
        raise ValueError("h must be positive")
    records = parallel_map(_sweep_point, [(p, h, k_max, grid, vectors) for h in hs], jobs)
    fit = None
    tail = records[-(fit_tail or len(records)):]
    dev = [abs(r.ratio[0] - 1.0) for r in tail]
    if len(tail) >= 2 and all(d > 0 for d in dev):
        fit = fit_remainder([r.h for r in tail], dev)
    return SweepResult(tuple(hs), tuple(records), fit)


# -- growth of lambda_1 / h**2 -------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    classification: str
    h_grid: tuple
    ratios: tuple
    growth: float
    variation: float

    def to_json(self):
        return {
            "classification": self.classification,
            "h_grid": list(self.h_grid),
            "lambda1_over_h2": list(self.ratios),
            "growth": self.growth,
            "variation": self.variation,
        }


def _plateau_first(p, h, grid):
    """``lambda_1(P) / h**2`` in physical coordinates for wells with a zero set."""
    a = p.params["a"]
    edge = p.reach(1)

    def wfun(x):
        return p.eval(x) / (h * h)

    # the Dirichlet problem on the plateau bounds lambda_1 / h**2 from above
    energy = 1.5 * math.pi**2 / (2.0 * a) ** 2
    ext = edge + auto_extent(wfun, edge, 1.0, energy)
    _, vals, _, _, _ = fd_eigenpairs(wfun, -ext, ext, grid.n_points, 1, grid.richardson)
    return float(vals[0])


def _probe_point(p, h, grid):
    if p.point_well:
        return float(eigensolve(p, h, 1, grid, strict=False).eigenvalues[0]) / (h * h)
    return _plateau_first(p, h, grid)


def first_ratio_probe(p, h_grid, grid=None, jobs=1,
                      growth=PROBE_GROWTH, variation=PROBE_VARIATION):
    """Classify the behaviour of ``h -> lambda_1(P) / h**2`` as ``h`` decreases.

    ``divergent`` when the last ratio exceeds the first by ``growth``,
    ``bounded`` when the total variation relative to the smallest ratio is
    at most ``variation``, and ``inconclusive`` otherwise.
    """
    hs = [float(h) for h in h_grid]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("h_grid must be strictly decreasing")
    grid = grid or GridSpec()
    r = np.array(parallel_map(_probe_point, [(p, h, grid) for h in hs], jobs))
    g = float(r[-1] / r[0])
    tv = float(np.sum(np.abs(np.diff(r))) / np.min(r))
    if g >= growth:
        label = "divergent"
    elif tv <= variation:
        label = "bounded"
    else:
        label = "inconclusive"
    return ProbeResult(label, tuple(hs), tuple(float(v) for v in r), g, tv)
