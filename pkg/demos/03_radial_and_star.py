"""Flat wells in the plane and in space.

A radial flat well behaves like the Dirichlet ball; a well of the form
``V0(|x| theta(x/|x|))`` behaves like the star-shaped domain
``|x| theta < 1``, while ``V0(|x|) theta`` forgets ``theta`` entirely.
"""

from degenwell import zoo
from degenwell.radial_nd import (
    AngularFactor,
    StarGrid,
    ball_dirichlet_reference,
    radial_eigensolve,
    star_dirichlet_reference_2d,
    star_domain_eigensolve_2d,
)

p = zoo()["exp_flat1"]

# %% Radial wells in two and three dimensions
for d in (2, 3):
    target = ball_dirichlet_reference(d, 1)[1]
    for h in (1e-5, 1e-10, 1e-15):
        q = radial_eigensolve(p, h, d, 1).q_eigenvalues[0]
        print(f"d = {d}  h = {h:.0e}  lambda_1 delta^2 / h^2 = {q:.4f}  ball value {target:.4f}")

# %% The harmonic ladder with multiplicities
s = radial_eigensolve(zoo()["power2"], 1e-3, 3, 10)
print("3D harmonic, lambda / h:", (s.eigenvalues / 1e-3).round(4), "sectors", s.sectors)

# %% An elliptic angular factor
theta = AngularFactor.ellipse(1.25, 0.8)
ref = star_dirichlet_reference_2d(theta, StarGrid(n=120), 1)
print(f"ellipse Dirichlet value {ref[1]:.4f} +- {ref.error_estimates[0]:.4f}")
for separable in (False, True):
    q = star_domain_eigensolve_2d(p, theta, 1e-10, 1, StarGrid(n=120),
                                  separable=separable).q_eigenvalues[0]
    print(f"separable = {separable!s:5s}  lambda_1 delta^2 / h^2 = {q:.4f}")
print(f"disk value {ball_dirichlet_reference(2, 1)[1]:.4f}")
