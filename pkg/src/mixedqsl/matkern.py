"""Dense complex-matrix kernel.

Hermitian eigendecomposition, exponentials of anti-Hermitian matrices,
the real and imaginary parts of the Hilbert-Schmidt product, and
time-ordered exponentials on a uniform grid.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_RTOL = 1e-10
DEGENERACY_ATOL = 1e-8


def _asym_residual(A: np.ndarray, sign: int) -> float:
    return float(np.linalg.norm(A - sign * A.conj().T))


def hermitian(A, *, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate ``A`` as Hermitian and return its symmetrized copy (A + A†)/2."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.linalg.norm(A)))
    if _asym_residual(A, 1) > rtol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return (A + A.conj().T) / 2


def antihermitian(A, *, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate ``A`` as anti-Hermitian and return (A - A†)/2."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.linalg.norm(A)))
    if _asym_residual(A, -1) > rtol * scale:
        raise ValueError("matrix is not anti-Hermitian within tolerance")
    return (A - A.conj().T) / 2


def antihermitian_part(A: np.ndarray) -> np.ndarray:
    return (A - A.conj().T) / 2


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def eig_herm(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, V)`` with ``A = V diag(w) V†`` and ``V`` unitary.
    """
    A = hermitian(A)
    w, V = np.linalg.eigh(A)
    return w[::-1].copy(), V[:, ::-1].copy()


def cluster_eigenvalues(w, atol: float = DEGENERACY_ATOL) -> list[list[int]]:
    """Group indices of a sorted eigenvalue list into degenerate clusters."""
    groups: list[list[int]] = []
    for i, x in enumerate(w):
        if groups and abs(w[groups[-1][-1]] - x) <= atol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def hs_forms(X, Y) -> tuple[float, float]:
    """Real and imaginary parts of the Hilbert-Schmidt product Tr(X†Y).

    ``g = ½Tr(X†Y + Y†X)`` is the metric, ``omega = (1/2i)Tr(X†Y - Y†X)``
    the symplectic form.
    """
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    z = np.vdot(X, Y)
    return float(z.real), float(z.imag)


def exp_antiherm(xi) -> np.ndarray:
    """exp(ξ) for anti-Hermitian ξ, via the eigendecomposition of iξ."""
    xi = antihermitian(xi)
    w, V = np.linalg.eigh(1j * xi)
    # xi = -i V diag(w) V†
    return (V * np.exp(-1j * w)) @ V.conj().T


def expm_hermitian_step(H: np.ndarray, dt: float, hbar: float = 1.0) -> np.ndarray:
    """exp(-i H dt / hbar) for Hermitian ``H``."""
    w, V = np.linalg.eigh((H + H.conj().T) / 2)
    return (V * np.exp(-1j * w * dt / hbar)) @ V.conj().T


def time_ordered_exp(
    samples,
    dt: float,
    direction: str = "positive",
    midpoints=None,
) -> np.ndarray:
    """Time-ordered exponential of a curve of anti-Hermitian matrices.

    ``samples`` holds ξ at the N+1 nodes of a uniform grid with spacing
    ``dt``. Each step uses the exact exponential of the midpoint value,
    either supplied in ``midpoints`` or linearly interpolated.

    ``direction="positive"`` orders later factors on the left and solves
    U' = ξU; ``"negative"`` orders them on the right and solves U' = Uξ.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 3 or samples.shape[0] < 2:
        raise ValueError("need at least two grid samples")
    if direction not in ("positive", "negative"):
        raise ValueError(f"unknown direction {direction!r}")
    if midpoints is None:
        midpoints = (samples[1:] + samples[:-1]) / 2
    n = samples.shape[1]
    U = np.eye(n, dtype=complex)
    for mid in midpoints:
        step = exp_antiherm(dt * mid)
        U = step @ U if direction == "positive" else U @ step
    return U


def unitarity_defect(U: np.ndarray) -> float:
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1])))
