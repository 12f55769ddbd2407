"""Well widths of flat and non-flat potentials.

The width ``delta_plus - delta_minus`` of a well at scale ``h`` is where the
potential reaches the kinetic level ``h**2 / width**2``.  For a flat well
it shrinks only logarithmically, far more slowly than any power of ``h``.
"""

import math

import numpy as np

from degenwell import make_builtin, solve_even_delta, zoo

# %% A harmonic well has width 2 sqrt(h / 2)
w = solve_even_delta(make_builtin("power", {"exponent": 2}), 0.02)
print("harmonic, h = 0.02:", w.delta_minus, w.delta_plus, "residual", w.residual)

# %% exp(-1/|x|): the half-width behaves like 1 / (2 |ln h|)
hs = 10.0 ** -np.arange(4, 301, 37)
for h in hs:
    w = solve_even_delta(zoo()["exp_flat1"], h)
    print(f"h = {h:8.1e}   delta = {w.delta_plus:.6e}   2 |ln h| delta = "
          f"{2 * abs(math.log(h)) * w.delta_plus:.4f}")

# %% Compare the widths of every even zoo well at one h
for name, p in zoo().items():
    if p.point_well and p.even and p.monotone:
        w = solve_even_delta(p, 1e-12)
        print(f"{name:12s} width {w.width:.3e}   level ln(h^2/w^2) = {w.log_level:.2f}")
