"""The purification bundle ψ ↦ ψψ† over an isospectral orbit.

Purifications are n×k matrices with ψ†ψ = P(σ). Gauge algebra elements are
k×k anti-Hermitian matrices commuting with P(σ); they are passed around as
plain arrays together with the spectrum they belong to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkern import antihermitian_part, hs_forms
from .states import Spectrum, p_sigma, spectrum_of

PURIFICATION_ATOL = 1e-9
GAUGE_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class Purification:
    psi: np.ndarray
    spectrum: Spectrum

    def __post_init__(self):
        psi = np.array(self.psi, dtype=complex)
        if psi.ndim != 2 or psi.shape[1] != self.spectrum.k:
            raise ValueError(
                f"purification must be n x {self.spectrum.k}, got {psi.shape}"
            )
        P, _ = p_sigma(self.spectrum)
        if np.linalg.norm(psi.conj().T @ psi - P) > PURIFICATION_ATOL:
            raise ValueError("psi†psi differs from P(sigma)")
        psi.flags.writeable = False
        object.__setattr__(self, "psi", psi)

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    def with_psi(self, psi) -> Purification:
        return Purification(psi, self.spectrum)


def purify(rho, spectrum: Spectrum | None = None) -> Purification:
    """The purification V·√P(σ) built from a descending eigenbasis of ρ."""
    rho = np.asarray(rho, dtype=complex)
    spectrum = spectrum or spectrum_of(rho)
    w, V = np.linalg.eigh((rho + rho.conj().T) / 2)
    V = V[:, ::-1][:, : spectrum.k]
    return Purification(V * np.sqrt(spectrum.diagonal()), spectrum)


def project(psi: Purification) -> np.ndarray:
    """ψψ†."""
    A = psi.psi @ psi.psi.conj().T
    return (A + A.conj().T) / 2


def _block_diagonal(M: np.ndarray, spectrum: Spectrum) -> np.ndarray:
    out = np.zeros_like(M)
    for b in spectrum.block_slices():
        out[b, b] = M[b, b]
    return out


def connection(psi: Purification, X) -> np.ndarray:
    """Mechanical connection Σ_j Π_j ψ†X Π_j P(σ)⁻¹.

    ψ†X is anti-Hermitized first, which makes the result the orthogonal
    projection of X onto the vertical space for any X, tangent or not.
    """
    X = np.asarray(X, dtype=complex)
    if X.shape != psi.psi.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {psi.psi.shape}")
    M = antihermitian_part(psi.psi.conj().T @ X)
    return _block_diagonal(M, psi.spectrum) / psi.spectrum.diagonal()[None, :]


def split(psi: Purification, X) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical parts of X."""
    X = np.asarray(X, dtype=complex)
    X_v = psi.psi @ connection(psi, X)
    return X - X_v, X_v


def in_gauge_algebra(xi, spectrum: Spectrum, atol: float = GAUGE_ATOL) -> bool:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (spectrum.k, spectrum.k):
        return False
    P, _ = p_sigma(spectrum)
    return bool(
        np.linalg.norm(xi + xi.conj().T) <= atol
        and np.linalg.norm(xi @ P - P @ xi) <= atol
    )


def gauge_metric(xi, eta, spectrum: Spectrum) -> float:
    """ξ·η = -½Tr((ξη + ηξ)P(σ))."""
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    k = spectrum.k
    if xi.shape != (k, k) or eta.shape != (k, k):
        raise ValueError(f"gauge elements must be {k}x{k} for this spectrum")
    d = spectrum.diagonal()
    return float(-0.5 * np.trace((xi @ eta + eta @ xi) * d[None, :]).real)


def gauge_norm(xi, spectrum: Spectrum) -> float:
    return float(np.sqrt(max(0.0, gauge_metric(xi, xi, spectrum))))


def gauge_basis(spectrum: Spectrum) -> list[np.ndarray]:
    """Basis of u(σ), orthonormal under the gauge metric.

    Within a block of size m the standard anti-Hermitian basis is Frobenius
    orthonormal, and the gauge metric there is p_j times Frobenius, so the
    Gram-Schmidt step reduces to a 1/√p_j rescaling.
    """
    k = spectrum.k
    basis = []
    for p, block in zip(spectrum.p, spectrum.block_slices()):
        idx = range(block.start, block.stop)
        scale = 1.0 / np.sqrt(p)
        for a in idx:
            e = np.zeros((k, k), dtype=complex)
            e[a, a] = 1j
            basis.append(scale * e)
        for a in idx:
            for b in idx:
                if b <= a:
                    continue
                e = np.zeros((k, k), dtype=complex)
                e[a, b], e[b, a] = 1, -1
                basis.append(scale * e / np.sqrt(2))
                e = np.zeros((k, k), dtype=complex)
                e[a, b] = e[b, a] = 1j
                basis.append(scale * e / np.sqrt(2))
    return basis


def minus_i_one(spectrum: Spectrum) -> np.ndarray:
    return -1j * np.eye(spectrum.k)


def xi_field(psi: Purification, H, hbar: float = 1.0) -> np.ndarray:
    """ξ_H at ψ: the connection applied to Hψ/iħ."""
    H = np.asarray(H, dtype=complex)
    if H.shape != (psi.n, psi.n):
        raise ValueError(f"Hamiltonian must be {psi.n}x{psi.n}")
    return connection(psi, H @ psi.psi / (1j * hbar))


def xi_perp(xi, spectrum: Spectrum) -> np.ndarray:
    """Component of ξ orthogonal to the unit vector -i1."""
    u = minus_i_one(spectrum)
    return np.asarray(xi) - gauge_metric(u, xi, spectrum) * u


@dataclass(frozen=True)
class SpeedTerms:
    g_XH: float
    delta_H2: float
    perp2: float
    mean_H: float
    xi2: float

    def identity_residual(self, hbar: float = 1.0) -> float:
        """|ħ²g - (ΔH² - ħ²ξ⊥·ξ⊥)| relative to Tr(H²ρ)."""
        lhs = hbar**2 * self.g_XH
        rhs = self.delta_H2 - hbar**2 * self.perp2
        scale = max(1e-300, self.delta_H2 + self.mean_H**2)
        return abs(lhs - rhs) / scale


def qspeed_terms(psi: Purification, H, hbar: float = 1.0) -> SpeedTerms:
    """Squared speed, energy variance and the perpendicular gauge part.

    ``perp2`` is ξ_H⊥·ξ_H⊥ without the ħ² factor; the identity is
    ħ²·g_XH = ΔH² - ħ²·perp2.
    """
    H = np.asarray(H, dtype=complex)
    sigma = psi.spectrum
    X = H @ psi.psi / (1j * hbar)
    X_h, _ = split(psi, X)
    g_XH, _ = hs_forms(X_h, X_h)
    rho = project(psi)
    mean = float(np.trace(H @ rho).real)
    second = float(np.trace(H @ H @ rho).real)
    xi = connection(psi, X)
    xp = xi_perp(xi, sigma)
    return SpeedTerms(
        g_XH=g_XH,
        delta_H2=second - mean**2,
        perp2=gauge_metric(xp, xp, sigma),
        mean_H=mean,
        xi2=gauge_metric(xi, xi, sigma),
    )


def metric_momentum(psi: Purification, psi_dot, basis=None) -> np.ndarray:
    """Values of the metric momentum G(ψ̇, ψξ) on a gauge-orthonormal basis."""
    psi_dot = np.asarray(psi_dot, dtype=complex)
    if psi_dot.shape != psi.psi.shape:
        raise ValueError("velocity shape does not match the purification")
    basis = gauge_basis(psi.spectrum) if basis is None else basis
    return np.array([hs_forms(psi_dot, psi.psi @ xi)[0] for xi in basis])


def horizontal_basis(psi: Purification) -> np.ndarray:
    """Orthonormal (under G) basis of the horizontal tangent space at ψ.

    Returned as an array of shape (dim, n, k).
    """
    n, k = psi.psi.shape
    sigma = psi.spectrum
    # real coordinates x = (Re X, Im X) flattened; constraints are linear in x
    dim = 2 * n * k
    cols = []
    for j in range(dim):
        x = np.zeros(dim)
        x[j] = 1.0
        X = (x[: n * k] + 1j * x[n * k :]).reshape(n, k)
        M = psi.psi.conj().T @ X
        herm = (M + M.conj().T) / 2
        vert = _block_diagonal(antihermitian_part(M), sigma)
        cols.append(np.concatenate([herm.real.ravel(), herm.imag.ravel(),
                                    vert.real.ravel(), vert.imag.ravel()]))
    C = np.array(cols).T
    _, s, vh = np.linalg.svd(C)
    rank = int(np.sum(s > 1e-10 * s[0]))
    null = vh[rank:]
    return np.array([(v[: n * k] + 1j * v[n * k :]).reshape(n, k) for v in null])
