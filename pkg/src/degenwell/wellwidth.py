"""Well widths from the implicit balance between kinetic and potential energy.

For a point well ``V`` (``V**-1(0) = {0}``, monotone on each side) the
interval ``I_h = (delta_minus, delta_plus)`` is the unique solution of::

    V(delta_minus) = V(delta_plus) = h**2 / (delta_plus - delta_minus)**2

All equations are solved by bisection in the variables ``ln|delta|``.  The
log form is what keeps the asymmetric examples tractable: there
``delta_plus`` can be ``exp(-10**6)``, far below the smallest double, while
``delta_minus`` is of order ``h**(2/3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._bisect import BracketError, bisect_increasing, expand_down

__all__ = [
    "BracketError",
    "NonMonotoneError",
    "WellWidths",
    "asymptotic_delta",
    "solve_delta_pm",
    "solve_even_delta",
    "solve_radial_delta",
]

RESIDUAL_TOL = 1e-10
_TOP = 1.0 - 1e-9  # stay strictly below the clamp plateau


class NonMonotoneError(ValueError):
    """The potential does not satisfy the side-monotonicity hypothesis."""


@dataclass(frozen=True)
class WellWidths:
    """Solution ``(delta_minus, delta_plus)`` of the width equation at ``h``.

    The logarithms are authoritative; ``delta_plus`` may underflow to 0.0
    for wells like ``asym_mixed`` at small ``h``.
    """

    h: float
    log_abs_minus: float
    log_plus: float
    residual: float
    iterations: int
    degenerate: bool = False

    @property
    def delta_minus(self):
        return -math.exp(self.log_abs_minus)

    @property
    def delta_plus(self):
        return math.exp(self.log_plus)

    @property
    def log_width(self):
        return float(np.logaddexp(self.log_abs_minus, self.log_plus))

    @property
    def width(self):
        return math.exp(self.log_width)

    @property
    def log_level(self):
        """``ln(h**2 / width**2)``, the common value of ``ln V`` at both ends."""
        return 2.0 * math.log(self.h) - 2.0 * self.log_width

    def to_json(self):
        return {
            "h": self.h,
            "delta_minus": self.delta_minus,
            "delta_plus": self.delta_plus,
            "log_abs_delta_minus": self.log_abs_minus,
            "log_delta_plus": self.log_plus,
            "residual": self.residual,
            "iterations": self.iterations,
            "degenerate": self.degenerate,
        }


def _logv(p, side):
    def f(u):
        return float(p.log_eval_side(side, np.array([u]))[0])

    return f


def _check(p):
    if not p.point_well:
        raise NonMonotoneError(f"{p.family} is not a point well")
    if not p.monotone:
        raise NonMonotoneError(f"{p.family} is not monotone on each side of 0")


def _upper(p, side, cap=2.0):
    return math.log(min(p.reach(side) * _TOP, cap))


def _solve(g, hi, guess=None):
    """Bisection on an increasing ``g`` with ``g(hi) >= 0`` required."""
    if g(hi) < 0:
        raise BracketError("h too large: no bracket below the clamp level")
    lo = math.log(1e-300)
    if guess is not None and math.isfinite(guess):
        a, b = guess - 1.0, min(guess + 1.0, hi)
        if a < b and g(a) < 0 <= g(b):
            lo, hi = a, b
    if g(lo) >= 0:
        lo = expand_down(g, lo)
    return bisect_increasing(g, lo, hi)


def _degenerate(g, x):
    # a perturbation delta -> 1.01 delta must move the residual beyond tolerance
    return abs(g(x + math.log(1.01)) - g(x)) <= RESIDUAL_TOL


def solve_even_delta(p, h):
    """Solve ``4 delta**2 V(delta) = h**2`` for an even point well.

    Bisection is performed on ``u = ln delta`` for the increasing map
    ``2 ln(2 delta) + ln V(delta) - 2 ln h``.
    """
    _check(p)
    if not p.even:
        raise ValueError(f"{p.family} with params {dict(p.params)} is not even")
    lv = _logv(p, 1)
    two_ln_h = 2.0 * math.log(h)

    def g(u):
        return 2.0 * (math.log(2.0) + u) + lv(u) - two_ln_h

    guess = _log_guess(p, h)
    u, gu, it = _solve(g, _upper(p, 1), guess)
    if abs(gu) > RESIDUAL_TOL:
        raise BracketError(f"even width residual {gu:.3g} exceeds {RESIDUAL_TOL:g}")
    return WellWidths(h, u, u, abs(gu), it, _degenerate(g, u))


def _inner(p, level, cap=2.0):
    """``ln|delta_minus|`` with ``ln V(delta_minus) = level``."""
    lv = _logv(p, -1)

    def g(t):
        return lv(t) - level

    hi = _upper(p, -1, cap)
    if g(hi) < 0:
        raise BracketError("side ranges of V do not overlap at this level")
    lo = math.log(1e-300) if g(math.log(1e-300)) < 0 else expand_down(g, math.log(1e-300))
    t, gt, _ = bisect_increasing(g, lo, hi)
    return t, gt


def solve_delta_pm(p, h):
    """Solve the two-sided width equation by nested bisection.

    The inner solve gives ``delta_minus(delta_plus)`` from
    ``V(delta_minus) = V(delta_plus)``; the outer solve finds where the
    increasing map ``delta_plus -> V(delta_plus) (delta_plus - delta_minus)**2``
    meets ``h**2``.
    """
    _check(p)
    lvp = _logv(p, 1)
    lvm = _logv(p, -1)
    two_ln_h = 2.0 * math.log(h)
    memo = {}

    def g(s):
        level = lvp(s)
        if level == -math.inf:
            return -math.inf
        t, _ = _inner(p, level)
        memo[s] = t
        return level + 2.0 * float(np.logaddexp(s, t)) - two_ln_h

    guess = _log_guess(p, h) if p.even else None
    s, gs, it = _solve(g, _upper(p, 1), guess)
    t = memo[s] if s in memo else _inner(p, lvp(s))[0]
    residual = max(abs(gs), abs(lvm(t) - lvp(s)))
    if residual > RESIDUAL_TOL:
        raise BracketError(f"width residual {residual:.3g} exceeds {RESIDUAL_TOL:g}")
    return WellWidths(h, t, s, residual, it, _degenerate(g, s))


def solve_radial_delta(v0, h):
    """Solve ``delta**2 V0(delta) = h**2`` for the radial profile ``V0``."""
    _check(v0)
    lv = _logv(v0, 1)
    two_ln_h = 2.0 * math.log(h)

    def g(u):
        return 2.0 * u + lv(u) - two_ln_h

    guess = _log_guess(v0, 2.0 * h)
    u, gu, _ = _solve(g, _upper(v0, 1), guess)
    if abs(gu) > RESIDUAL_TOL:
        raise BracketError(f"radial width residual {gu:.3g} exceeds {RESIDUAL_TOL:g}")
    return math.exp(u)


def asymptotic_delta(family, params, h):
    """Leading-order width for families with a known closed or asymptotic form.

    For ``asym_mixed`` the returned value is ``|delta_minus| ~ h**(2/3)``.
    """
    params = dict(params or {})
    lnh = abs(math.log(h))
    if family == "power":
        q = params["exponent"]
        return (h * h / 4.0) ** (1.0 / (q + 2.0))
    if family == "exp_flat":
        return (2.0 * lnh) ** (-1.0 / params["alpha"])
    if family == "log_squared":
        return math.exp(1.0 - math.sqrt(1.0 + 2.0 * abs(math.log(h / 2.0))))
    if family == "log_power":
        return 0.5 * h * lnh ** (params["alpha"] / 2.0)
    if family == "asym_mixed":
        return h ** (2.0 / 3.0)
    raise ValueError(f"no stored asymptotic width for family {family!r}")


def _log_guess(p, h):
    if p.params.get("theta_minus", 1.0) != 1.0 or p.params.get("theta_plus", 1.0) != 1.0:
        return None
    try:
        d = asymptotic_delta(p.family, p.params, h)
    except (ValueError, KeyError):
        return None
    return math.log(d) if d > 0 else None
