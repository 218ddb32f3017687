"""Geometric quantum speed limits for mixed states.

Purification bundles over isospectral orbits, Mandelstam-Tamm,
Margolus-Levitin and Deffner-Lutz type bounds, and time-optimal
Hamiltonians from Euler-Arnold geodesics.
"""

from .bounds import (
    BoundsReport,
    BoundViolation,
    beta_constant,
    build_report,
    dl_bound,
    dl_improved_bound,
    ml_bound,
    mt_bounds,
)
from .bundle import Purification, connection, gauge_metric, purify, qspeed_terms, xi_field
from .dynamics import (
    HamiltonianCurve,
    NonCommutingError,
    Trajectory,
    averaged_hamiltonian,
    dispersion_integral,
    evolve_schrodinger,
    evolve_von_neumann,
    horizontal_lift,
    parallel_hamiltonian,
)
from .geodesy import (
    GeodesicResult,
    ShootingError,
    ShootingOptions,
    StarMetric,
    coadjoint_term,
    endpoint_distance,
    euler_arnold_integrate,
    geodesic_shoot,
    optimal_hamiltonian,
    qubit_distance,
)
from .states import Spectrum, bures_angle, density, fidelity, fully_distinguishable, spectrum_of

__all__ = [
    "BoundViolation", "BoundsReport", "GeodesicResult", "HamiltonianCurve",
    "NonCommutingError", "Purification", "ShootingError", "ShootingOptions",
    "Spectrum", "StarMetric", "Trajectory", "averaged_hamiltonian", "beta_constant",
    "build_report", "bures_angle", "coadjoint_term", "connection", "density",
    "dispersion_integral", "dl_bound", "dl_improved_bound", "endpoint_distance",
    "euler_arnold_integrate", "evolve_schrodinger", "evolve_von_neumann", "fidelity",
    "fully_distinguishable", "gauge_metric", "geodesic_shoot", "horizontal_lift",
    "ml_bound", "mt_bounds", "optimal_hamiltonian", "parallel_hamiltonian", "purify",
    "qspeed_terms", "qubit_distance", "spectrum_of", "xi_field",
]
