"""Guarded bisection for monotone scalar equations."""

import math

MAX_ITER = 200


class BracketError(ValueError):
    """No sign change could be found for a monotone equation."""


def bisect_increasing(f, lo, hi, maxiter=MAX_ITER):
    """Locate the root of a nondecreasing function on ``[lo, hi]``.

    Bisection runs until the bracket cannot shrink further in floating
    point, so the result is as accurate as ``f`` allows.  Values of ``-inf``
    and ``+inf`` are accepted as signs.

    Returns
    -------
    x : float
        Bracket end point with the smaller ``|f|``.
    fx : float
        ``f(x)``.
    iterations : int
    """
    flo, fhi = f(lo), f(hi)
    if math.isnan(flo) or math.isnan(fhi):
        raise BracketError(f"function is undefined at a bracket end ({lo}, {hi})")
    if flo > 0 or fhi < 0:
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f = ({flo!r}, {fhi!r})")
    it = 0
    while it < maxiter:
        if flo == 0:
            return lo, flo, it
        if fhi == 0:
            return hi, fhi, it
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        it += 1
        if math.isnan(fm):
            raise BracketError(f"function is undefined at {mid!r}")
        if fm < 0:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    else:
        raise BracketError(f"bisection did not converge in {maxiter} iterations")
    if abs(flo) <= abs(fhi):
        return lo, flo, it
    return hi, fhi, it


def expand_down(f, start, limit=-1e15):
    """Walk ``start`` toward ``-inf`` by doubling until ``f`` becomes negative."""
    x = start
    step = max(1.0, abs(start))
    while x > limit:
        if f(x) < 0:
            return x
        x -= step
        step *= 2.0
    raise BracketError(f"no negative value of f above {limit:g}")
