from __future__ import annotations

import json
import math

import numpy as np
import pytest

from mixedqsl.bundle import purify
from mixedqsl.dynamics import evolve_schrodinger
from mixedqsl.geodesy import (
    ShootingError,
    ShootingOptions,
    StarMetric,
    coadjoint_term,
    endpoint_distance,
    euler_arnold_integrate,
    geodesic_shoot,
    horizontal_part,
    horizontality_check,
    optimal_hamiltonian,
    qubit_distance,
    star_metric,
    stiefel_geodesic,
    two_eigenvalue_geodesic,
    u_basis,
)
from mixedqsl.states import Spectrum, bures_angle, random_density
from mixedqsl.validation import brute_force_coadjoint, random_hermitian

SIGMA3 = Spectrum((0.5, 1 / 3, 1 / 6), (1, 1, 1))


@pytest.fixture(scope="module")
def pair3():
    return random_density(SIGMA3, 3, 11), random_density(SIGMA3, 3, 12)


@pytest.fixture(scope="module")
def shot3(pair3):
    return geodesic_shoot(*pair3, ShootingOptions(seed=11))


def test_u_basis_orthonormal():
    B = u_basis(3)
    G = np.einsum("aij,bij->ab", B.conj(), B).real
    assert B.shape == (9, 3, 3) and np.allclose(G, np.eye(9))
    assert np.allclose(B + B.conj().transpose(0, 2, 1), 0)


def test_star_metric_requires_invertible():
    with pytest.raises(ValueError):
        star_metric(np.zeros((2, 2)), np.zeros((2, 2)), np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        StarMetric(np.diag([1.0, 0.0]))


def test_coadjoint_methods_agree_with_brute_force():
    rng = np.random.default_rng(0)
    rho0 = random_density(SIGMA3, 3, rng)
    metric = StarMetric(rho0)
    xi = 1j * random_hermitian(3, rng)
    brute = brute_force_coadjoint(xi, rho0)
    assert np.allclose(coadjoint_term(xi, metric, "gram"), brute, atol=1e-12)
    assert np.allclose(coadjoint_term(xi, metric, "eigen"), brute, atol=1e-12)
    with pytest.raises(ValueError):
        coadjoint_term(xi, metric, "other")


def test_euler_arnold_matches_constraint_geodesic():
    # the same horizontal geodesic computed two independent ways
    rng = np.random.default_rng(1)
    rho0 = random_density(SIGMA3, 3, rng)
    psi0 = purify(rho0, SIGMA3)
    xi0 = horizontal_part(1j * random_hermitian(3, rng, 1.0), psi0)
    assert horizontality_check(xi0, psi0) < 1e-12
    sol = euler_arnold_integrate(xi0, rho0, 1.0, 400)
    psi1 = stiefel_geodesic(psi0, xi0 @ psi0.psi, 1.0, 400)
    assert np.allclose(sol.U[-1] @ psi0.psi, psi1, atol=1e-9)
    # and H_ξ reproduces it through the Schrödinger equation
    traj = evolve_schrodinger(sol.hamiltonian, psi0)
    assert np.allclose(traj.psi[-1], psi1, atol=1e-8)


def test_two_eigenvalue_closed_form():
    xi = np.array([[0, 0.8j], [0.8j, 0]])
    psi, rho = two_eigenvalue_geodesic(0.75, 0.25, 1, 1, xi, 0.5)
    general = euler_arnold_integrate(xi, np.diag([0.75, 0.25]), 0.5, 200)
    assert np.allclose(general.U[-1] @ np.diag(np.sqrt([0.75, 0.25])), psi, atol=1e-12)
    with pytest.raises(ValueError):
        two_eigenvalue_geodesic(0.75, 0.25, 1, 1, np.diag([1j, -1j]), 0.5)


def test_qubit_distance_half_bloch_angle():
    _, rho1 = two_eigenvalue_geodesic(0.75, 0.25, 1, 1, np.array([[0, 1.0], [-1.0, 0]]), 1.2)
    assert qubit_distance(np.diag([0.75, 0.25]), rho1) == pytest.approx(1.2, abs=1e-12)
    # past the injectivity radius the shorter arc wins
    _, rho2 = two_eigenvalue_geodesic(0.75, 0.25, 1, 1, np.array([[0, 1.0], [-1.0, 0]]), 2.0)
    assert qubit_distance(np.diag([0.75, 0.25]), rho2) == pytest.approx(math.pi - 2.0, abs=1e-12)


def test_shooting_random_pair(pair3, shot3):
    rho0, rho1 = pair3
    assert shot3.accepted and shot3.residual <= 1e-6
    assert shot3.method == "euler-arnold"
    assert shot3.distance_estimate >= bures_angle(rho0, rho1) - 1e-6
    assert shot3.curve.speed_drift < 1e-8
    d = json.loads(shot3.to_json())
    assert d["label"].startswith("upper bound") and len(d["starts"]) == 8


def test_shooting_symmetry(pair3, shot3):
    back = geodesic_shoot(pair3[1], pair3[0], ShootingOptions(seed=11))
    assert abs(back.distance_estimate - shot3.distance_estimate) <= 2e-6


def test_shooting_identical_states():
    rho = random_density(SIGMA3, 3, 4)
    res = geodesic_shoot(rho, rho)
    assert res.distance_estimate == 0.0 and res.method == "trivial"


def test_shooting_rejects_non_isospectral():
    with pytest.raises(ValueError):
        geodesic_shoot(np.diag([0.6, 0.4]), np.diag([0.7, 0.3]))


def test_shooting_failure_reported():
    rho0 = random_density(SIGMA3, 3, 1)
    rho1 = random_density(SIGMA3, 3, 2)
    with pytest.raises(ShootingError):
        geodesic_shoot(rho0, rho1, ShootingOptions(starts=1, max_nfev=1, tol=1e-14))


def test_endpoint_distance_closed_forms():
    r0 = np.diag([0.7, 0.3, 0, 0]).astype(complex)
    r1 = np.diag([0, 0, 0.7, 0.3]).astype(complex)
    assert endpoint_distance(r0, r1)[:2] == (math.pi / 2, "fully-distinguishable")
    assert endpoint_distance(r0, r0)[:2] == (0.0, "identical")
    v = np.array([1, 1j, 0]) / math.sqrt(2)
    d, method, _ = endpoint_distance(np.diag([1.0, 0, 0]), np.outer(v, v.conj()))
    assert method == "pure" and d == pytest.approx(math.pi / 4)


def test_optimal_hamiltonian_saturates(pair3):
    opt = optimal_hamiltonian(*pair3, tau=2.0, steps=800, opts=ShootingOptions(seed=11))
    assert abs(opt.saturation - 1.0) <= 1e-4
    assert opt.xi_perp_max <= 1e-6
    assert not opt.time_independent


def test_optimal_hamiltonian_qubit_constant():
    _, rho1 = two_eigenvalue_geodesic(2 / 3, 1 / 3, 1, 1, np.array([[0, 0.9], [-0.9, 0]]), 1.0)
    opt = optimal_hamiltonian(np.diag([2 / 3, 1 / 3]), rho1, tau=1.0, steps=200)
    assert opt.time_independent
    assert np.allclose(opt.hamiltonian.samples[0], 1j * np.array([[0, 0.9], [-0.9, 0]]), atol=1e-6)
    same = optimal_hamiltonian(rho1, rho1, tau=1.0, steps=10)
    assert np.allclose(same.hamiltonian.samples, 0)
