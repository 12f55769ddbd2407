"""Low-lying eigenvalues of a flat well against the Dirichlet interval law.

For ``V = exp(-1/|x|)`` the ratio ``lambda_k w**2 / (pi**2 k**2 h**2)``
tends to one, but only at the rate ``ln|ln h| / |ln h|``.  A harmonic well
is shown for contrast: its ratio stays at ``2 (2k - 1) / (pi k)**2``.
"""

import math
from pathlib import Path

from degenwell import sweep, zoo
from degenwell.svgplot import loglog_svg

hs = [10.0**-e for e in range(4, 16)]

# %% The flat well
flat = sweep(zoo()["exp_flat1"], hs, k_max=2, fit_tail=6)
for rec in flat.records:
    print(f"h = {rec.h:7.0e}   ratio_1 = {rec.ratio[0]:.4f}   ratio_2 = {rec.ratio[1]:.4f}")
fit = flat.fitted_remainder
print(f"|ratio_1 - 1| ~ {fit.constant:.3f} ln|ln h| / |ln h|   (R^2 = {fit.quality:.4f})")

# %% The harmonic well never approaches the law
harm = sweep(zoo()["power2"], hs[:4], k_max=2)
print("harmonic ratios:", harm.ratios(1), "expected", 2 / math.pi**2)

# %% Plot the deviations
out = Path("flat_well_ratio.svg")
out.write_text(loglog_svg({"exp_flat1, k=1": (hs, flat.deviations(1)),
                           "exp_flat1, k=2": (hs, flat.deviations(2))},
                          title="approach to the Dirichlet interval law",
                          ylabel="|ratio - 1|"), encoding="utf-8")
print("wrote", out)
