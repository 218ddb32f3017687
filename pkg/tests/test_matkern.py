from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from mixedqsl.matkern import (
    antihermitian,
    cluster_eigenvalues,
    eig_herm,
    exp_antiherm,
    expm_hermitian_step,
    hermitian,
    hs_forms,
    time_ordered_exp,
    unitarity_defect,
)


def _random_herm(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def test_hermitian_rejects_asymmetric():
    with pytest.raises(ValueError):
        hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        hermitian(np.ones((2, 3)))


def test_antihermitian_symmetrizes_small_noise():
    xi = 1j * _random_herm(3, 0)
    noisy = xi + 1e-13 * np.ones((3, 3))
    out = antihermitian(noisy)
    assert np.allclose(out + out.conj().T, 0)


@given(st.integers(1, 6), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_eig_herm_descending_and_reconstructs(n, seed):
    H = _random_herm(n, seed)
    w, V = eig_herm(H)
    assert np.all(np.diff(w) <= 0)
    assert np.allclose((V * w) @ V.conj().T, H, atol=1e-12)


def test_cluster_eigenvalues():
    assert cluster_eigenvalues([3.0, 3.0 + 1e-10, 2.0, 1.0, 1.0]) == [[0, 1], [2], [3, 4]]


def test_hs_forms_split_real_and_imaginary():
    X = np.array([[1, 1j], [0, 2]])
    Y = np.array([[1j, 1], [1, 0]])
    g, omega = hs_forms(X, Y)
    z = np.trace(X.conj().T @ Y)
    assert g == pytest.approx(z.real) and omega == pytest.approx(z.imag)
    assert hs_forms(X, X)[1] == pytest.approx(0.0)
    with pytest.raises(ValueError):
        hs_forms(X, np.ones((3, 3)))


@given(st.integers(1, 5), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_exponentials_match_scipy(n, seed):
    H = _random_herm(n, seed)
    assert np.allclose(exp_antiherm(-1j * H), expm(-1j * H), atol=1e-12)
    assert np.allclose(expm_hermitian_step(H, 0.3, 2.0), expm(-0.15j * H), atol=1e-12)
    assert unitarity_defect(exp_antiherm(-1j * H)) < 1e-12


def test_time_ordered_exp_orderings():
    A = 1j * _random_herm(2, 1)
    B = 1j * _random_herm(2, 2)
    samples = np.array([A, A, B])
    mids = np.array([A, B])
    pos = time_ordered_exp(samples, 0.5, "positive", mids)
    neg = time_ordered_exp(samples, 0.5, "negative", mids)
    assert np.allclose(pos, expm(0.5 * B) @ expm(0.5 * A))
    assert np.allclose(neg, expm(0.5 * A) @ expm(0.5 * B))
    with pytest.raises(ValueError):
        time_ordered_exp(samples, 0.5, "sideways")


def test_time_ordered_exp_constant_generator_is_exact():
    xi = 1j * _random_herm(3, 4)
    U = time_ordered_exp(np.repeat(xi[None], 11, axis=0), 0.1)
    assert np.allclose(U, expm(xi), atol=1e-12)
