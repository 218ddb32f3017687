from __future__ import annotations

import json
import math

import numpy as np
import pytest

from mixedqsl.bounds import (
    HOLDS,
    NOT_APPLICABLE,
    SATURATED,
    BoundsReport,
    BoundViolation,
    beta_constant,
    build_report,
    dl_bound,
    dl_improved_bound,
    ml_bound,
    mt_bounds,
    tangent_point,
)
from mixedqsl.dynamics import HamiltonianCurve
from mixedqsl.geodesy import qubit_distance
from mixedqsl.validation import qubit_example, swap4


def test_scalar_bounds():
    assert mt_bounds(1.0, 0.5, 2.0, 1.0) == (0.5, 0.25)
    assert mt_bounds(1.0, 0.5, 0.0) == (None, None)
    assert ml_bound(1.0, 2.0) == pytest.approx(math.pi)
    assert ml_bound(0.0) is None
    assert dl_bound(math.pi / 2, 1.0) == pytest.approx(1.0)
    assert dl_improved_bound(math.pi / 2, 1.0) == pytest.approx(1 / beta_constant())


def test_beta_tangency():
    x0 = tangent_point()
    beta = beta_constant()
    assert 2 < x0 < 3
    assert math.cos(x0) == pytest.approx(1 - beta * x0, abs=1e-14)
    assert -math.sin(x0) == pytest.approx(-beta, abs=1e-14)  # common slope
    assert beta == pytest.approx(0.7246113537767084, abs=1e-14)


def test_qubit_example_report():
    H, rho0 = qubit_example(p=(2 / 3, 1 / 3), a=1.0, tau=math.pi / 4)
    from mixedqsl.dynamics import evolve_von_neumann

    rho1 = evolve_von_neumann(H, rho0).rho[-1]
    r = build_report(H, rho0, distance=qubit_distance(rho0, rho1), distance_method="qubit")
    assert r.flags["mt_geometric"] == SATURATED
    assert r.flags["mt_bures"] == HOLDS
    assert r.flags["ml"] == NOT_APPLICABLE
    assert r.mt_geometric - r.mt_bures > 0.1
    assert r.overlap_linear >= r.overlap_arccos >= r.dl_improved


def test_swap4_report():
    H, rho0 = swap4(E=2.0, hbar=0.5)
    r = build_report(H, rho0, distance=math.pi / 2, hbar=0.5)
    assert r.fully_distinguishable and r.flags["ml"] == SATURATED
    assert r.ml == pytest.approx(math.pi * 0.5 / 4)


def test_stationary_evolution_not_applicable():
    rho0 = np.diag([0.7, 0.3]).astype(complex)
    H = HamiltonianCurve.constant(np.diag([1.0, 2.0]), 1.0, 50)
    r = build_report(H, rho0, distance=0.0)
    assert r.stationary
    assert r.flags["mt_geometric"] == NOT_APPLICABLE == r.flags["mt_bures"]


def test_non_commuting_family_skips_ml_and_dl():
    H = HamiltonianCurve.from_function(
        lambda t: np.array([[0, 1], [1, 0]]) * t + np.diag([1, -1]) * (1 - t), 1.0, 100)
    r = build_report(H, np.diag([0.8, 0.2]))
    assert not r.commuting
    assert r.ml is None and r.dl is None and r.flags["dl"] == NOT_APPLICABLE


def test_check_raises_on_violation():
    r = BoundsReport(tau=1.0, hbar=1.0, bures=0.5, delta_e=1.0, dispersion_integral=1.0,
                     mt_geometric=1.5, mt_bures=0.5)
    with pytest.raises(BoundViolation):
        r.check()
    r = BoundsReport(tau=1.0, hbar=1.0, bures=0.5, delta_e=1.0, dispersion_integral=1.0,
                     mt_geometric=0.4, mt_bures=0.5)
    with pytest.raises(BoundViolation):
        r.check()


def test_report_serialization():
    H, rho0 = qubit_example(steps=50)
    r = build_report(H, rho0, distance=math.pi / 4)
    d = json.loads(r.to_json())
    assert d["tau"] == pytest.approx(math.pi / 4)
    header, row = r.csv_header().split(","), r.csv_row().split(",")
    assert len(header) == len(row)
    assert float(row[header.index("mt_geometric")]) == r.mt_geometric
