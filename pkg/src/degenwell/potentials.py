"""Potential wells with underflow-free log-domain evaluation.

Every built-in family is defined by a closed formula near the origin (the
*core*, ``|x| < c``).  Beyond the core edge ``c`` the potential ramps
linearly from ``V(c)`` to the floor value 1 over ``[c, 2c]`` and stays at 1,
which keeps the operator confining without introducing a wall.  The pure
power family is already confining and is never clamped.

Two evaluators are provided.  :meth:`Potential.eval` uses the direct formula
and underflows to zero for flat wells; :meth:`Potential.log_eval` manipulates
the formula symbolically (``ln V = -|x|**-alpha`` for ``exp_flat`` and so on)
and stays finite far below the smallest double.  The solvers call
:meth:`Potential.log_eval_side`, which takes ``ln|x|`` directly so that
arguments such as ``|x| = exp(-10**6)`` can be represented.

Monotonicity and flatness are checked by sampling (:func:`check_hypotheses`).
A passing report is evidence on the sampled grid, not a proof.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "FAMILIES",
    "HypothesisReport",
    "Potential",
    "check_hypotheses",
    "dyadic_grid",
    "make_builtin",
    "parse_potential",
    "uniform_grid",
    "zoo",
]


def _neg_log_abs_log(u):
    # ln |ln|x|| for u = ln|x| < 0
    with np.errstate(divide="ignore"):
        return np.log(-u)


def _exp_flat_log(p, side, u, ax=None):
    with np.errstate(over="ignore", divide="ignore"):
        if ax is not None:
            return -(ax ** -p["alpha"])
        return -np.exp(-p["alpha"] * u)


def _exp_flat_value(p, side, ax):
    with np.errstate(divide="ignore", over="ignore"):
        return np.exp(-(ax ** -p["alpha"]))


def _log_power_log(p, side, u, ax=None):
    return -p["alpha"] * _neg_log_abs_log(u)


def _log_power_value(p, side, ax):
    with np.errstate(divide="ignore"):
        return np.abs(np.log(ax)) ** -p["alpha"]


def _log_squared_log(p, side, u, ax=None):
    return -(u * u)


def _log_squared_value(p, side, ax):
    with np.errstate(divide="ignore"):
        return np.exp(-np.log(ax) ** 2)


def _power_log(p, side, u, ax=None):
    return p["exponent"] * u


def _power_value(p, side, ax):
    return ax ** p["exponent"]


def _asym_log(p, side, u, ax=None):
    if side < 0:
        return np.array(u, dtype=float)
    return -_neg_log_abs_log(u)


def _asym_value(p, side, ax):
    if side < 0:
        return np.array(ax, dtype=float)
    with np.errstate(divide="ignore"):
        return 1.0 / np.abs(np.log(ax))


def _osc_log(p, side, u, ax=None):
    with np.errstate(over="ignore", invalid="ignore"):
        a4 = np.exp(-4.0 * u)
        a2 = np.exp(-2.0 * u)
        phase = np.exp(-36.0 * u)
        # once the phase overflows, x**-2 / x**-4 is below machine epsilon
        # and the sine term cannot change ln V
        s = np.where(np.isfinite(phase), np.sin(np.where(np.isfinite(phase), phase, 0.0)), 0.0)
        out = -a4 - a2 * (1.0 + s)
    return np.where(np.isinf(a4), -np.inf, out)


def _osc_value(p, side, ax):
    with np.errstate(divide="ignore"):
        u = np.log(ax)
    return np.exp(_osc_log(p, side, u))


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def _plateau_value(p, side, ax):
    return _smoothstep((ax - p["a"]) / p["rise"])


def _plateau_log(p, side, u, ax=None):
    with np.errstate(divide="ignore"):
        return np.log(_plateau_value(p, side, np.exp(u)))


@dataclass(frozen=True)
class _Family:
    name: str
    required: tuple
    defaults: Mapping[str, float]
    log_core: Callable
    value_core: Callable
    edge: Callable  # (params, side) -> |x| where the core formula ends
    point_well: bool = True
    even: bool = True
    monotone: bool = True
    flat: bool = False
    source: str = ""


FAMILIES = {
    f.name: f
    for f in [
        _Family(
            "power", ("exponent",), {}, _power_log, _power_value,
            lambda p, s: math.inf,
            source="pure homogeneous well |x|**exponent (harmonic for exponent 2)",
        ),
        _Family(
            "exp_flat", ("alpha",), {}, _exp_flat_log, _exp_flat_value,
            lambda p, s: 1.0, flat=True,
            source="flat well exp(-|x|**-alpha)",
        ),
        _Family(
            "log_power", ("alpha",), {}, _log_power_log, _log_power_value,
            lambda p, s: math.exp(-1.0),
            source="logarithmic well |ln|x||**-alpha",
        ),
        _Family(
            "log_squared", (), {}, _log_squared_log, _log_squared_value,
            lambda p, s: 1.0, flat=True,
            source="flat well exp(-|ln|x||**2)",
        ),
        _Family(
            "asym_mixed", (), {}, _asym_log, _asym_value,
            lambda p, s: 1.0 if s < 0 else math.exp(-2.0), even=False,
            source="asymmetric well: |x| on the left, 1/|ln x| on the right",
        ),
        _Family(
            "oscillatory", (), {}, _osc_log, _osc_value,
            lambda p, s: 1.0, monotone=False, flat=True,
            source="flat but oscillating well exp(-|x|**-4 - |x|**-2 (1 + sin |x|**-36))",
        ),
        _Family(
            "plateau", ("a",), {"rise": None}, _plateau_log, _plateau_value,
            lambda p, s: p["a"] + p["rise"], point_well=False,
            source="V = 0 on [-a, a], smoothstep rise to 1 over [a, a + rise]",
        ),
    ]
}


@dataclass(frozen=True)
class Potential:
    """A built-in potential family with its parameters.

    ``params`` may carry ``theta_minus`` / ``theta_plus`` (default 1) for
    point wells, which evaluate the family at ``theta_pm * |x|`` on each side.
    This is the one-dimensional form of ``V0(|x| theta(x/|x|))``.
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)
    support_floor: float = 1.0

    @property
    def _fam(self):
        return FAMILIES[self.family]

    def _theta(self, side):
        return self.params.get("theta_plus" if side > 0 else "theta_minus", 1.0)

    @property
    def point_well(self):
        return self._fam.point_well

    @property
    def monotone(self):
        return self._fam.monotone

    @property
    def flat(self):
        return self._fam.flat

    @property
    def even(self):
        return self._fam.even and self._theta(1) == self._theta(-1)

    def edge(self, side):
        """``|x|`` where the core formula hands over to the clamp ramp."""
        return self._fam.edge(self.params, side) / self._theta(side)

    def reach(self, side):
        """``|x|`` beyond which ``V`` is identically the floor value."""
        return 2.0 * self.edge(side)

    # -- evaluation ---------------------------------------------------------

    def log_eval_side(self, side, u, ax=None):
        """``ln V(side * exp(u))`` for an array of ``u = ln|x|``.

        ``ax = |x|`` may be passed as well when it is representable; some
        families are then evaluated without a round trip through ``exp``.
        """
        u = np.asarray(u, dtype=float)
        fam = self._fam
        theta = self._theta(side)
        c = fam.edge(self.params, side)
        us = u + math.log(theta)
        axs = None if ax is None else np.asarray(ax, dtype=float) * theta
        if math.isinf(c):
            return fam.log_core(self.params, side, us, axs)
        lc = math.log(c)
        core = us < lc
        out = np.empty_like(us)
        out[core] = fam.log_core(self.params, side, us[core], None if axs is None else axs[core])
        if not core.all():
            v_edge = float(np.exp(fam.log_core(self.params, side, np.array([lc]))[0]))
            with np.errstate(over="ignore"):
                ax = np.exp(us[~core])
            out[~core] = np.log(self._ramp_scaled(ax, c, v_edge))
        return out

    def _ramp_scaled(self, ax_scaled, c, v_edge):
        frac = np.clip((ax_scaled - c) / c, 0.0, 1.0)
        return v_edge + (self.support_floor - v_edge) * frac

    def _split(self, x, fn):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.full(x.shape, -np.inf if fn == "log" else 0.0)
        for side, mask in ((1, x > 0), (-1, x < 0)):
            if not mask.any():
                continue
            if fn == "log":
                ax = np.abs(x[mask])
                out[mask] = self.log_eval_side(side, np.log(ax), ax)
            else:
                out[mask] = self._value_side(side, np.abs(x[mask]))
        return float(out[0]) if scalar else out

    def _value_side(self, side, ax):
        fam = self._fam
        axs = ax * self._theta(side)
        c = fam.edge(self.params, side)
        if math.isinf(c):
            return fam.value_core(self.params, side, axs)
        core = axs < c
        out = np.empty_like(axs)
        out[core] = fam.value_core(self.params, side, axs[core])
        if not core.all():
            v_edge = float(fam.value_core(self.params, side, np.array([c]))[0])
            out[~core] = self._ramp_scaled(axs[~core], c, v_edge)
        return out

    def eval(self, x):
        """``V(x)`` by the direct formula; flat wells underflow to 0."""
        return self._split(x, "value")

    def log_eval(self, x):
        """``ln V(x)``, computed symbolically; ``-inf`` where ``V = 0``."""
        return self._split(x, "log")

    __call__ = eval

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return {"family": self.family, "params": dict(sorted(self.params.items()))}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return make_builtin(obj["family"], obj.get("params", {}))


def make_builtin(family, params=None):
    """Construct a built-in potential after validating its parameters.

    Examples
    --------
    >>> v = make_builtin("exp_flat", {"alpha": 1})
    >>> v.log_eval(0.01)
    -100.0
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown potential family {family!r}; known: {sorted(FAMILIES)}")
    fam = FAMILIES[family]
    params = {k: float(v) for k, v in (params or {}).items()}
    allowed = set(fam.required) | set(fam.defaults)
    if fam.point_well:
        allowed |= {"theta_minus", "theta_plus"}
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)} for family {family!r}")
    for name in fam.required:
        if name not in params:
            raise ValueError(f"family {family!r} requires parameter {name!r}")
    if family == "plateau" and "rise" not in params:
        params["rise"] = params["a"]
    for name, value in params.items():
        if not value > 0 or not math.isfinite(value):
            raise ValueError(f"parameter {name!r} must be positive and finite, got {value}")
    return Potential(family, params)


def zoo():
    """Named potentials used throughout the examples and the acceptance suite."""
    return {
        "power2": make_builtin("power", {"exponent": 2}),
        "power4": make_builtin("power", {"exponent": 4}),
        "exp_flat1": make_builtin("exp_flat", {"alpha": 1}),
        "exp_flat2": make_builtin("exp_flat", {"alpha": 2}),
        "log_power2": make_builtin("log_power", {"alpha": 2}),
        "log_squared": make_builtin("log_squared"),
        "asym_mixed": make_builtin("asym_mixed"),
        "oscillatory": make_builtin("oscillatory"),
        "plateau": make_builtin("plateau", {"a": 0.1}),
    }


def parse_potential(text):
    """Accept a zoo name, an inline JSON object or a path to a JSON file."""
    named = zoo()
    if text in named:
        return named[text]
    stripped = text.strip()
    if stripped.startswith("{"):
        return Potential.from_json(stripped)
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            return Potential.from_json(json.load(fh))
    raise ValueError(f"cannot interpret potential {text!r}: not a zoo name, JSON object or file")


# -- hypothesis checks -------------------------------------------------------


def dyadic_grid(n=1000):
    """``2**-n, ..., 2**-1`` in increasing order."""
    return 2.0 ** -np.arange(n, 0, -1, dtype=float)


def uniform_grid(n=1000):
    return np.arange(1, n + 1, dtype=float) / (n + 1)


@dataclass(frozen=True)
class HypothesisReport:
    flatness_ok: Mapping[int, bool]
    monotonicity_ok: bool
    sampled_n_range: range
    sample_grid: tuple
    failures: Mapping[str, tuple] = field(default_factory=dict)

    @property
    def flat_ok(self):
        return all(self.flatness_ok.values())


def _first_decrease(values, rtol=1e-12):
    v = np.asarray(values)
    with np.errstate(invalid="ignore", over="ignore"):
        slack = rtol * np.maximum(1.0, np.abs(v[:-1]))
        bad = v[1:] < v[:-1] - np.where(np.isfinite(slack), slack, 0.0)
    idx = np.flatnonzero(bad)
    return None if idx.size == 0 else int(idx[0])


def check_hypotheses(p, n_max, grid, near_fraction=0.5):
    """Sample the monotonicity and flatness hypotheses on both sides of 0.

    ``V`` must be nondecreasing in ``|x|`` on the grid points inside the
    family's monotone neighbourhood (up to where it reaches the floor).  For
    every ``n <= n_max``, ``|x|**-n V(x)`` must be nondecreasing in ``|x|``
    on the innermost ``near_fraction`` of those points; the hypothesis only
    concerns a neighbourhood of 0 that may shrink as ``n`` grows.

    Parameters
    ----------
    p : Potential
    n_max : int
    grid : sequence of float
        Sorted abscissae in ``(0, 1)``, mirrored to sample the left side.
    """
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or np.any(g <= 0) or np.any(g >= 1) or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be sorted, strictly increasing, inside (0, 1)")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    failures = {}
    mono = True
    flat = {n: True for n in range(1, n_max + 1)}
    for side in (1, -1):
        pts = g[g < p.reach(side)]
        if pts.size < 2:
            continue
        u = np.log(pts)
        lv = p.log_eval_side(side, u)
        i = _first_decrease(lv)
        if i is not None:
            mono = False
            failures[f"monotone{side:+d}"] = (side * pts[i], side * pts[i + 1])
        m = max(2, int(near_fraction * pts.size))
        for n in flat:
            i = _first_decrease(lv[:m] - n * u[:m])
            if i is not None:
                flat[n] = False
                failures.setdefault(f"flat{side:+d}_n{n}", (side * pts[i], side * pts[i + 1]))
    return HypothesisReport(flat, mono, range(1, n_max + 1), tuple(g), failures)
