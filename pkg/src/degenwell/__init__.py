"""Low-lying spectra of semiclassical Schrödinger operators with flat wells."""

__version__ = "0.1.0"

from .asymptotics import first_ratio_probe, sweep  # noqa: E402
from .potentials import Potential, check_hypotheses, make_builtin, zoo  # noqa: E402
from .radial_nd import radial_eigensolve  # noqa: E402
from .spectral1d import GridSpec, Spectrum, eigensolve  # noqa: E402
from .wellwidth import WellWidths, solve_delta_pm, solve_even_delta, solve_radial_delta  # noqa: E402

__all__ = [
    "GridSpec",
    "Potential",
    "Spectrum",
    "WellWidths",
    "check_hypotheses",
    "eigensolve",
    "first_ratio_probe",
    "make_builtin",
    "radial_eigensolve",
    "solve_delta_pm",
    "solve_even_delta",
    "solve_radial_delta",
    "sweep",
    "zoo",
]
