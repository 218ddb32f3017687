from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedqsl.bundle import (
    Purification,
    connection,
    gauge_basis,
    gauge_metric,
    horizontal_basis,
    in_gauge_algebra,
    metric_momentum,
    minus_i_one,
    project,
    purify,
    qspeed_terms,
    split,
    xi_field,
)
from mixedqsl.matkern import hs_forms
from mixedqsl.states import Spectrum, random_density

SPECTRA = [
    Spectrum((0.5, 0.3, 0.2), (1, 1, 1)),
    Spectrum((0.4, 0.2), (2, 1)),
    Spectrum((0.5,), (2,)),
    Spectrum((1.0,), (1,)),
]


def _setup(sigma, n, seed):
    rng = np.random.default_rng(seed)
    psi = purify(random_density(sigma, n, rng), sigma)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return psi, (A + A.conj().T) / 2, rng


def test_purification_validates_constraint():
    with pytest.raises(ValueError):
        Purification(np.eye(2), Spectrum((0.6, 0.4), (1, 1)))
    psi = purify(np.diag([0.6, 0.4]))
    assert np.allclose(project(psi), np.diag([0.6, 0.4]))
    with pytest.raises(ValueError):
        psi.psi[0, 0] = 1.0


@pytest.mark.parametrize("sigma", SPECTRA)
@pytest.mark.parametrize("n", [3, 4])
def test_connection_is_projection(sigma, n):
    if n < sigma.k:
        pytest.skip("rank exceeds dimension")
    psi, H, rng = _setup(sigma, n, 1)
    X = H @ psi.psi / 1j
    Xh, Xv = split(psi, X)
    assert np.linalg.norm(connection(psi, Xh)) < 1e-12
    # vertical vectors are fixed points: A(ψη) = η
    for eta in gauge_basis(sigma):
        assert np.allclose(connection(psi, psi.psi @ eta), eta, atol=1e-12)
    assert abs(hs_forms(Xh, Xv)[0]) < 1e-12
    assert in_gauge_algebra(connection(psi, X), sigma)


@pytest.mark.parametrize("sigma", SPECTRA)
def test_gauge_basis_orthonormal(sigma):
    basis = gauge_basis(sigma)
    G = np.array([[gauge_metric(a, b, sigma) for b in basis] for a in basis])
    assert np.allclose(G, np.eye(len(basis)), atol=1e-12)
    assert gauge_metric(minus_i_one(sigma), minus_i_one(sigma), sigma) == pytest.approx(1.0)


@pytest.mark.parametrize("sigma", SPECTRA)
def test_horizontal_basis(sigma):
    psi, _, _ = _setup(sigma, 4, 2)
    B = horizontal_basis(psi)
    n, k = psi.psi.shape
    dim_u_sigma = sum(m * m for m in sigma.m)
    # tangent space of S(σ) has dimension 2nk - k², minus the fiber
    assert len(B) == 2 * n * k - k * k - dim_u_sigma
    G = np.array([[hs_forms(a, b)[0] for b in B] for a in B])
    assert np.allclose(G, np.eye(len(B)), atol=1e-10)
    for X in B:
        M = psi.psi.conj().T @ X
        assert np.allclose(M + M.conj().T, 0, atol=1e-10)
        assert np.linalg.norm(connection(psi, X)) < 1e-10
        assert np.max(np.abs(metric_momentum(psi, X))) < 1e-10


def test_xi_field_trace_identity():
    psi, H, _ = _setup(SPECTRA[0], 3, 3)
    hbar = 0.7
    xi = xi_field(psi, H, hbar)
    energy = np.trace(H @ project(psi)).real
    assert hbar * gauge_metric(minus_i_one(psi.spectrum), xi, psi.spectrum) == pytest.approx(energy)


@given(st.sampled_from(SPECTRA), st.integers(0, 10_000), st.floats(0.3, 3.0))
@settings(max_examples=40, deadline=None)
def test_speed_identity(sigma, seed, hbar):
    psi, H, _ = _setup(sigma, 4, seed)
    t = qspeed_terms(psi, H, hbar)
    assert t.identity_residual(hbar) < 1e-10
    assert hbar**2 * t.g_XH <= t.delta_H2 + 1e-12


def test_speed_identity_hbar_on_perpendicular_term():
    # with ħ ≠ 1 the identity needs ħ² on the ξ⊥ term as well
    psi, H, _ = _setup(SPECTRA[1], 3, 5)
    hbar = 2.5
    t = qspeed_terms(psi, H, hbar)
    assert t.perp2 > 1e-3
    assert abs(hbar**2 * t.g_XH - (t.delta_H2 - t.perp2)) > 1e-3
