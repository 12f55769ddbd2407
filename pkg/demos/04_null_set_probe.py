"""Does ``lambda_1 / h**2`` stay bounded as ``h`` goes to zero?

It stays bounded exactly when the zero set of ``V`` can carry a nonzero
finite-energy function.  A plateau can; a single point cannot.
"""

from degenwell import make_builtin, zoo
from degenwell.asymptotics import first_ratio_probe

grid = [10.0**-e for e in range(2, 9)]

# %% A plateau of half-width 1: bounded by the Dirichlet value pi^2 / 4
r = first_ratio_probe(make_builtin("plateau", {"a": 1.0, "rise": 0.01}), grid[:5])
print(r.classification, [round(v, 4) for v in r.ratios])

# %% Point wells grow without bound, flat or not
for name in ("power2", "exp_flat1", "log_squared"):
    r = first_ratio_probe(zoo()[name], grid)
    print(f"{name:12s} {r.classification:12s} growth x{r.growth:.3g}")
