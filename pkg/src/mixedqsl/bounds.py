"""Quantum speed limits and the comparative bounds report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .bundle import Purification, purify
from .dynamics import (
    HamiltonianCurve,
    NonCommutingError,
    Trajectory,
    averaged_hamiltonian,
    dispersion_integral,
    evolve_schrodinger,
    evolve_von_neumann,
)
from .states import bures_angle, fully_distinguishable

BOUND_SLACK = 1e-9
SATURATION_RTOL = 1e-6
STATIONARY_ATOL = 1e-12

NOT_APPLICABLE = "not-applicable"
HOLDS = "holds"
SATURATED = "saturated"


class BoundViolation(AssertionError):
    """An applicable speed limit exceeds the realized evolution time."""


def mt_bounds(distance: float, bures: float, delta_e: float, hbar: float = 1.0):
    """Mandelstam-Tamm limits ħ·distance/ΔE and ħ·bures/ΔE.

    Returns ``(None, None)`` for a stationary evolution (ΔE = 0).
    """
    if delta_e <= STATIONARY_ATOL:
        return None, None
    return hbar * distance / delta_e, hbar * bures / delta_e


def ml_bound(e_bar: float, hbar: float = 1.0) -> float | None:
    """Margolus-Levitin limit πħ/(2Ē) for fully distinguishable endpoints."""
    if e_bar <= STATIONARY_ATOL:
        return None
    return math.pi * hbar / (2 * e_bar)


def dl_bound(bures: float, mean_shifted_energy: float, hbar: float = 1.0) -> float | None:
    """4ħ·bures²/(π²⟨H - E₀⟩)."""
    if mean_shifted_energy <= STATIONARY_ATOL:
        return None
    return 4 * hbar * bures**2 / (math.pi**2 * mean_shifted_energy)


def _tangency(x: float) -> float:
    return math.cos(x) - 1 + x * math.sin(x)


@lru_cache(maxsize=None)
def tangent_point() -> float:
    """x₀ in (2, 3) where the line through (0, 1) touches cos x."""
    return brentq(_tangency, 2.0, 3.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def beta_constant() -> float:
    """Slope β such that 1 - βx is tangent to cos x."""
    return math.sin(tangent_point())


def dl_improved_bound(bures: float, e_bar: float, hbar: float = 1.0) -> float | None:
    """4ħ·bures²/(βπ²Ē)."""
    if e_bar <= STATIONARY_ATOL:
        return None
    return 4 * hbar * bures**2 / (beta_constant() * math.pi**2 * e_bar)


def purification_overlap_chain(psi0: Purification, psi1: Purification, e_bar: float, hbar: float = 1.0):
    """The two intermediate bounds built from |Tr ψ₀†ψ₁|.

    ``psi1`` must be evolved from ``psi0`` by the ground-shifted Hamiltonian.
    Returns ``(bound_linear, bound_arccos)``.
    """
    if e_bar <= STATIONARY_ATOL:
        return None, None
    overlap = min(1.0, abs(np.vdot(psi0.psi, psi1.psi)))
    beta = beta_constant()
    linear = hbar * (1 - overlap) / (beta * e_bar)
    arccos = 4 * hbar * math.acos(overlap) ** 2 / (beta * math.pi**2 * e_bar)
    return linear, arccos


@dataclass
class BoundsReport:
    tau: float
    hbar: float
    bures: float
    delta_e: float
    dispersion_integral: float
    distance: float | None = None
    distance_method: str | None = None
    distance_residual: float | None = None
    e_bar: float | None = None
    e_bar_final: float | None = None
    mean_shifted_energy: float | None = None
    mt_geometric: float | None = None
    mt_bures: float | None = None
    ml: float | None = None
    dl: float | None = None
    dl_improved: float | None = None
    overlap_linear: float | None = None
    overlap_arccos: float | None = None
    commuting: bool = False
    fully_distinguishable: bool = False
    stationary: bool = False
    flags: dict = field(default_factory=dict)

    def bound_values(self) -> dict:
        return {
            "mt_geometric": self.mt_geometric,
            "mt_bures": self.mt_bures,
            "ml": self.ml,
            "dl": self.dl,
            "dl_improved": self.dl_improved,
        }

    def check(self) -> None:
        """Raise BoundViolation if the report contradicts its own invariants."""
        for name, value in self.bound_values().items():
            if value is None:
                continue
            slack = BOUND_SLACK
            if name == "mt_geometric" and self.distance_residual:
                # an endpoint mismatch of r moves the distance by O(r)
                slack += 2 * self.hbar * self.distance_residual / self.delta_e
            if value > self.tau + slack:
                raise BoundViolation(f"{name} = {value!r} exceeds tau = {self.tau!r}")
        if self.mt_geometric is not None and self.mt_bures is not None:
            if self.mt_geometric < self.mt_bures - BOUND_SLACK:
                raise BoundViolation("geometric MT bound below the Bures MT bound")
        chain = [self.overlap_linear, self.overlap_arccos, self.dl_improved]
        if None not in chain:
            if not (chain[0] >= chain[1] - BOUND_SLACK and chain[1] >= chain[2] - BOUND_SLACK):
                raise BoundViolation("purification overlap chain out of order")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    CSV_FIELDS = (
        "tau", "distance", "bures", "delta_e", "e_bar", "mean_shifted_energy",
        "mt_geometric", "mt_bures", "ml", "dl", "dl_improved",
    )

    def csv_header(self) -> str:
        return ",".join(self.CSV_FIELDS + tuple(f"flag_{k}" for k in sorted(self.flags)))

    def csv_row(self) -> str:
        def fmt(x):
            return "" if x is None else format(x, ".17g")

        values = [fmt(getattr(self, name)) for name in self.CSV_FIELDS]
        values += [self.flags[k] for k in sorted(self.flags)]
        return ",".join(values)


def _flag(value, tau):
    if value is None:
        return NOT_APPLICABLE
    if abs(value - tau) <= SATURATION_RTOL * tau:
        return SATURATED
    return HOLDS


def build_report(
    H: HamiltonianCurve,
    rho0,
    *,
    trajectory: Trajectory | None = None,
    distance: float | None = None,
    distance_method: str | None = None,
    distance_residual: float | None = None,
    hbar: float = 1.0,
    check: bool = True,
) -> BoundsReport:
    """Evaluate every speed limit along a computed evolution.

    ``distance`` is the geodesic distance between the endpoints, supplied
    by the caller (closed form or geodesic shooting); without it the
    geometric MT bound is not applicable.
    """
    traj = trajectory if trajectory is not None else evolve_von_neumann(H, rho0, hbar)
    rho = traj.states()
    rho0, rho1 = rho[0], rho[-1]
    tau = H.tau
    integral, delta_e = dispersion_integral(H, traj)
    bures = bures_angle(rho0, rho1)
    commutators = [np.linalg.norm(h @ r - r @ h) for h, r in zip(H.samples, rho)]
    stationary = max(commutators) <= STATIONARY_ATOL * max(1.0, np.abs(H.samples).max())
    report = BoundsReport(
        tau=tau, hbar=hbar, bures=bures, delta_e=delta_e,
        dispersion_integral=integral, distance=distance,
        distance_method=distance_method, distance_residual=distance_residual,
        stationary=bool(stationary),
        fully_distinguishable=fully_distinguishable(rho0, rho1),
    )
    if not stationary:
        mt_geo, report.mt_bures = mt_bounds(distance or 0.0, bures, delta_e, hbar)
        report.mt_geometric = mt_geo if distance is not None else None

    try:
        avg = averaged_hamiltonian(H)
    except NonCommutingError:
        avg = None
    if avg is not None:
        report.commuting = True
        report.e_bar = avg.energy(rho0)
        report.e_bar_final = avg.energy(rho1)
        report.mean_shifted_energy = avg.mean_shifted_energy(traj)
        report.dl = dl_bound(bures, report.mean_shifted_energy, hbar)
        report.dl_improved = dl_improved_bound(bures, report.e_bar, hbar)
        if report.fully_distinguishable:
            report.ml = ml_bound(report.e_bar, hbar)
        if report.e_bar > STATIONARY_ATOL:
            psi0 = purify(rho0)
            shifted = H.shifted(avg.ground)
            psi1 = Purification(evolve_schrodinger(shifted, psi0, hbar).psi[-1], psi0.spectrum)
            report.overlap_linear, report.overlap_arccos = purification_overlap_chain(
                psi0, psi1, report.e_bar, hbar
            )

    report.flags = {name: _flag(v, tau) for name, v in report.bound_values().items()}
    if check:
        report.check()
    return report
