"""Spectra, density operators, fidelity and Bures angle."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .matkern import DEGENERACY_ATOL, cluster_eigenvalues, hermitian

TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
ZERO_EIGENVALUE = 1e-10
# eigenvalues this close to zero (relative) are round-off in matrix square roots
_SQRT_CLIP = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Spectrum:
    """Distinct positive eigenvalues ``p`` (descending) with multiplicities ``m``."""

    p: tuple[float, ...]
    m: tuple[int, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        m = tuple(int(x) for x in self.m)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "m", m)
        if not p or len(p) != len(m):
            raise ValueError("p and m must be non-empty and of equal length")
        if any(x <= 0 for x in p):
            raise ValueError("eigenvalues must be positive")
        if any(a <= b for a, b in zip(p, p[1:])):
            raise ValueError("eigenvalues must be strictly descending")
        if any(x < 1 for x in m):
            raise ValueError("multiplicities must be positive integers")
        if abs(sum(a * b for a, b in zip(p, m)) - 1.0) > TRACE_ATOL:
            raise ValueError("spectrum does not sum to one")

    @property
    def k(self) -> int:
        return sum(self.m)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.p)

    def diagonal(self) -> np.ndarray:
        """Eigenvalues with multiplicity, as the diagonal of P(σ)."""
        return np.repeat(np.array(self.p), self.m)

    def block_slices(self) -> list[slice]:
        edges = np.concatenate([[0], np.cumsum(self.m)])
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]

    def matches(self, other: Spectrum, atol: float = DEGENERACY_ATOL) -> bool:
        return self.m == other.m and all(abs(a - b) <= atol for a, b in zip(self.p, other.p))

    def to_json(self) -> dict:
        return {"p": list(self.p), "m": list(self.m)}

    @classmethod
    def from_json(cls, data: dict) -> Spectrum:
        return cls(tuple(_number(x) for x in data["p"]), tuple(data["m"]))


def _number(x) -> float:
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def p_sigma(sigma: Spectrum) -> tuple[np.ndarray, list[np.ndarray]]:
    """The spectral operator P(σ) and its block projectors Π_j."""
    k = sigma.k
    projectors = []
    for block in sigma.block_slices():
        proj = np.zeros((k, k), dtype=complex)
        idx = np.arange(k)[block]
        proj[idx, idx] = 1.0
        projectors.append(proj)
    P = sum(p * proj for p, proj in zip(sigma.p, projectors))
    return np.asarray(P, dtype=complex), projectors


def density(rho) -> np.ndarray:
    """Validate a density matrix and return its Hermitian-symmetrized copy."""
    rho = hermitian(rho)
    if abs(np.trace(rho).real - 1.0) > TRACE_ATOL:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho)[0] < -PSD_ATOL:
        raise ValueError("density matrix must be positive semidefinite")
    return rho


def spectrum_of(rho, atol: float = DEGENERACY_ATOL) -> Spectrum:
    """Spectrum of a density matrix; eigenvalues below 1e-10 are dropped."""
    rho = density(rho)
    w = np.linalg.eigvalsh(rho)[::-1]
    w = w[w > ZERO_EIGENVALUE]
    groups = cluster_eigenvalues(w, atol)
    p = [float(np.mean(w[g])) for g in groups]
    m = [len(g) for g in groups]
    # renormalize the cluster means so the trace constraint holds exactly
    total = sum(a * b for a, b in zip(p, m))
    return Spectrum(tuple(x / total for x in p), tuple(m))


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((rho + rho.conj().T) / 2)
    cutoff = _SQRT_CLIP * max(1.0, float(np.max(np.abs(w))))
    w = np.where(w > cutoff, w, 0.0)
    return (V * np.sqrt(w)) @ V.conj().T


def fidelity(rho0, rho1) -> float:
    """Uhlmann fidelity (Tr √(√ρ₀ ρ₁ √ρ₀))².

    The trace of the square root is evaluated as the sum of the singular
    values of √ρ₀√ρ₁, which are the square roots of the eigenvalues of
    √ρ₀ρ₁√ρ₀. This is symmetric in the arguments and keeps round-off
    eigenvalues from leaking in through the square root.
    """
    rho0 = density(rho0)
    rho1 = density(rho1)
    if rho0.shape != rho1.shape:
        raise ValueError(f"dimension mismatch: {rho0.shape} vs {rho1.shape}")
    s = np.linalg.svd(psd_sqrt(rho0) @ psd_sqrt(rho1), compute_uv=False)
    return float(min(1.0, max(0.0, np.sum(s) ** 2)))


def bures_angle(rho0, rho1) -> float:
    """Bures angle arccos √F, in [0, π/2]."""
    return float(np.arccos(np.sqrt(fidelity(rho0, rho1))))


def qubit_fidelity_closed_form(p1: float, p2: float, a_tau: float) -> float:
    """Fidelity between diag(p₁, p₂) and its image after rotating by ``a_tau``."""
    if not (p1 > p2 > 0) or abs(p1 + p2 - 1.0) > TRACE_ATOL:
        raise ValueError("need p1 > p2 > 0 with p1 + p2 = 1")
    return (p1 - p2) ** 2 * np.cos(a_tau) ** 2 + 4 * p1 * p2


def fully_distinguishable(rho0, rho1, atol: float = 1e-10) -> bool:
    """Orthogonal supports, tested through Tr(ρ₀ρ₁) = 0."""
    rho0 = density(rho0)
    rho1 = density(rho1)
    if rho0.shape != rho1.shape:
        raise ValueError(f"dimension mismatch: {rho0.shape} vs {rho1.shape}")
    return bool(abs(np.trace(rho0 @ rho1).real) <= atol)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(sigma: Spectrum, n: int, seed) -> np.ndarray:
    """U diag(P(σ), 0) U† for a seeded Haar-random unitary U."""
    if n < sigma.k:
        raise ValueError(f"dimension {n} smaller than rank {sigma.k}")
    rng = np.random.default_rng(seed)
    U = haar_unitary(n, rng)
    diag = np.zeros(n)
    diag[: sigma.k] = sigma.diagonal()
    return hermitian((U * diag) @ U.conj().T)


# JSON schema: matrices are nested arrays of [re, im] pairs.


def matrix_to_json(A) -> list:
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ValueError("matrix JSON must be rows of [re, im] pairs")
