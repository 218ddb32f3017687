"""Unitary propagation on purifications and density operators.

All propagators step with exact exponentials of the Hamiltonian at the
interval midpoints, so ψ†ψ = P(σ) and the spectrum of ρ are preserved by
construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bundle import (
    Purification,
    connection,
    gauge_metric,
    qspeed_terms,
    xi_field,
)
from .matkern import (
    DEGENERACY_ATOL,
    cluster_eigenvalues,
    exp_antiherm,
    expm_hermitian_step,
    hermitian,
)
from .states import Spectrum, density, matrix_from_json, matrix_to_json, spectrum_of

COMMUTING_RTOL = 1e-8


class NonCommutingError(ValueError):
    """The Hamiltonian family does not commute at different times."""


@dataclass(frozen=True, eq=False)
class HamiltonianCurve:
    """Hermitian samples on the uniform grid 0 = t_0 < ... < t_N = tau.

    Midpoint values are linear interpolations of the node samples unless
    exact ``midpoints`` are supplied.
    """

    tau: float
    samples: np.ndarray
    midpoints: np.ndarray | None = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
            raise ValueError("samples must have shape (N+1, n, n)")
        if samples.shape[0] < 2:
            raise ValueError("need at least two grid samples")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        samples = np.array([hermitian(h) for h in samples])
        object.__setattr__(self, "samples", samples)
        if self.midpoints is not None:
            mids = np.array([hermitian(h) for h in self.midpoints])
            if mids.shape != (samples.shape[0] - 1,) + samples.shape[1:]:
                raise ValueError("midpoints must have shape (N, n, n)")
            object.__setattr__(self, "midpoints", mids)

    @classmethod
    def from_function(cls, H: Callable[[float], np.ndarray], tau: float, steps: int = 1000):
        t = np.linspace(0.0, tau, steps + 1)
        mid = (t[1:] + t[:-1]) / 2
        return cls(tau, np.array([H(s) for s in t]), np.array([H(s) for s in mid]))

    @classmethod
    def constant(cls, H, tau: float, steps: int = 1000):
        H = np.asarray(H, dtype=complex)
        return cls(tau, np.repeat(H[None], steps + 1, axis=0),
                   np.repeat(H[None], steps, axis=0))

    @property
    def steps(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def dt(self) -> float:
        return self.tau / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.tau, self.steps + 1)

    def midpoint_samples(self) -> np.ndarray:
        if self.midpoints is not None:
            return self.midpoints
        return (self.samples[1:] + self.samples[:-1]) / 2

    def shifted(self, energies) -> HamiltonianCurve:
        """H(t) - E(t)·1 for a function or array of node energies E."""
        t = self.times
        if callable(energies):
            e_nodes = np.array([energies(s) for s in t])
            e_mid = np.array([energies(s) for s in (t[1:] + t[:-1]) / 2])
        else:
            e_nodes = np.asarray(energies, dtype=float)
            e_mid = (e_nodes[1:] + e_nodes[:-1]) / 2
        eye = np.eye(self.dim)
        mids = None
        if self.midpoints is not None or callable(energies):
            mids = self.midpoint_samples() - e_mid[:, None, None] * eye
        return HamiltonianCurve(
            self.tau, self.samples - e_nodes[:, None, None] * eye, mids
        )

    def to_json(self) -> dict:
        out = {
            "times": self.times.tolist(),
            "samples": [matrix_to_json(h) for h in self.samples],
        }
        if self.midpoints is not None:
            out["midpoints"] = [matrix_to_json(h) for h in self.midpoints]
        return out

    @classmethod
    def from_json(cls, data: dict) -> HamiltonianCurve:
        times = np.asarray(data["times"], dtype=float)
        if times.size < 2 or times[0] != 0.0:
            raise ValueError("times must start at 0 and hold at least two nodes")
        spacing = np.diff(times)
        if np.any(spacing <= 0) or np.ptp(spacing) > 1e-9 * times[-1]:
            raise ValueError("times must form a uniform increasing grid")
        samples = np.array([matrix_from_json(h) for h in data["samples"]])
        if samples.shape[0] != times.size:
            raise ValueError("one Hamiltonian sample per time is required")
        mids = data.get("midpoints")
        if mids is not None:
            mids = np.array([matrix_from_json(h) for h in mids])
        return cls(float(times[-1]), samples, mids)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of ψ and/or ρ on the generator's grid."""

    generator: HamiltonianCurve
    spectrum: Spectrum
    psi: np.ndarray | None = None
    rho: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.generator.times

    def purification(self, j: int) -> Purification:
        return Purification(self.psi[j], self.spectrum)

    def states(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.einsum("tik,tjk->tij", self.psi, self.psi.conj())


def evolve_schrodinger(H: HamiltonianCurve, psi0: Purification, hbar: float = 1.0) -> Trajectory:
    """ψ_{j+1} = exp(-i H(t_{j+½}) Δt/ħ) ψ_j."""
    if H.dim != psi0.n:
        raise ValueError(f"Hamiltonian dimension {H.dim} != purification rows {psi0.n}")
    dt = H.dt
    out = np.empty((H.steps + 1,) + psi0.psi.shape, dtype=complex)
    out[0] = psi0.psi
    for j, Hm in enumerate(H.midpoint_samples()):
        out[j + 1] = expm_hermitian_step(Hm, dt, hbar) @ out[j]
    rho = np.einsum("tik,tjk->tij", out, out.conj())
    return Trajectory(H, psi0.spectrum, psi=out, rho=rho)


def evolve_von_neumann(H: HamiltonianCurve, rho0, hbar: float = 1.0) -> Trajectory:
    """ρ_{j+1} = U_j ρ_j U_j† with the midpoint step unitaries."""
    rho0 = density(rho0)
    if H.dim != rho0.shape[0]:
        raise ValueError(f"Hamiltonian dimension {H.dim} != state dimension {rho0.shape[0]}")
    dt = H.dt
    out = np.empty((H.steps + 1,) + rho0.shape, dtype=complex)
    out[0] = rho0
    for j, Hm in enumerate(H.midpoint_samples()):
        U = expm_hermitian_step(Hm, dt, hbar)
        r = U @ out[j] @ U.conj().T
        out[j + 1] = (r + r.conj().T) / 2
    return Trajectory(H, spectrum_of(rho0), rho=out)


def horizontal_lift(
    H: HamiltonianCurve, psi0: Purification, hbar: float = 1.0
) -> Trajectory:
    """Gauge-shift the Schrödinger solution into a horizontal curve.

    ψ_∥(t) = ψ(t)·V(t) with V' = -A_ψ(ψ̇)V, V(0) = 1. The connection is
    evaluated at each step midpoint with ψ̇ = Hψ/iħ from the generator.
    """
    base = evolve_schrodinger(H, psi0, hbar)
    dt = H.dt
    sigma = psi0.spectrum
    mids = H.midpoint_samples()
    k = sigma.k
    V = np.eye(k, dtype=complex)
    lifted = np.empty_like(base.psi)
    lifted[0] = base.psi[0]
    gauge = np.empty((H.steps + 1, k, k), dtype=complex)
    gauge[0] = V
    for j, Hm in enumerate(mids):
        psi_mid = Purification(expm_hermitian_step(Hm, dt / 2, hbar) @ base.psi[j], sigma)
        A = connection(psi_mid, Hm @ psi_mid.psi / (1j * hbar))
        V = exp_antiherm(-dt * A) @ V
        gauge[j + 1] = V
        lifted[j + 1] = base.psi[j + 1] @ V
    return Trajectory(H, sigma, psi=lifted, rho=base.rho, meta={"gauge": gauge})


def horizontality_residuals(traj: Trajectory) -> np.ndarray:
    """Gauge norm of the connection on the discrete velocity of each step.

    For consecutive samples a, b with a†a = b†b = P, the midpoint rule
    A_{(a+b)/2}((b-a)/Δt) reduces to the block-diagonal part of
    (a†b - b†a)/(2Δt) divided by P.
    """
    sigma = traj.spectrum
    dt = traj.generator.dt
    d = sigma.diagonal()
    out = []
    for a, b in zip(traj.psi[:-1], traj.psi[1:]):
        M = (a.conj().T @ b - b.conj().T @ a) / (2 * dt)
        blocks = np.zeros_like(M)
        for s in sigma.block_slices():
            blocks[s, s] = M[s, s]
        A = blocks / d[None, :]
        out.append(np.sqrt(max(0.0, gauge_metric(A, A, sigma))))
    return np.array(out)


def parallel_hamiltonian(
    H: HamiltonianCurve, traj: Trajectory, hbar: float = 1.0
) -> HamiltonianCurve:
    """H_∥ = H - iħ ψ ξ_H P(σ)⁻¹ ψ† at every node.

    On invertible ψ this equals H - iħ ψ ξ_H ψ⁻¹; otherwise the correction
    vanishes on the orthocomplement of the image of ψ. Midpoints use the
    half-step propagated ψ when the generator carries exact midpoints.
    """
    if traj.psi is None:
        raise ValueError("parallel_hamiltonian needs a purification trajectory")
    sigma = traj.spectrum
    inv_p = 1.0 / sigma.diagonal()

    def correct(Hj, psi):
        p = Purification(psi, sigma)
        xi = xi_field(p, Hj, hbar)
        corr = 1j * hbar * (psi @ (xi * inv_p[None, :]) @ psi.conj().T)
        return hermitian(Hj - corr, rtol=1e-8)

    samples = np.array([correct(h, psi) for h, psi in zip(H.samples, traj.psi)])
    mids = None
    if H.midpoints is not None:
        dt = H.dt
        mids = np.array([
            correct(hm, expm_hermitian_step(hm, dt / 2, hbar) @ psi)
            for hm, psi in zip(H.midpoints, traj.psi[:-1])
        ])
    return HamiltonianCurve(H.tau, samples, mids)


def _trapezoid(values: np.ndarray, dt: float) -> float:
    return float(dt * (values.sum() - 0.5 * (values[0] + values[-1])))


def uncertainty(H: np.ndarray, rho: np.ndarray) -> float:
    mean = np.trace(H @ rho).real
    return float(np.sqrt(max(0.0, np.trace(H @ H @ rho).real - mean**2)))


def dispersion_integral(H: HamiltonianCurve, traj: Trajectory) -> tuple[float, float]:
    """∫ΔH(ρ(t))dt by the trapezoid rule, and its time average ΔE."""
    rho = traj.states()
    if rho.shape[0] != H.steps + 1:
        raise ValueError("trajectory and Hamiltonian grids differ")
    values = np.array([uncertainty(h, r) for h, r in zip(H.samples, rho)])
    integral = _trapezoid(values, H.dt)
    return integral, integral / H.tau


def speed_profile(traj: Trajectory, psi0: Purification, hbar: float = 1.0) -> np.ndarray:
    """√g(ρ̇, ρ̇) at each node, from the horizontal part of Hψ/iħ."""
    H = traj.generator
    if traj.psi is not None:
        psi = traj.psi
    else:
        psi = evolve_schrodinger(H, psi0, hbar).psi
    sigma = psi0.spectrum
    return np.array([
        np.sqrt(max(0.0, qspeed_terms(Purification(p, sigma), h, hbar).g_XH))
        for h, p in zip(H.samples, psi)
    ])


def curve_length(traj: Trajectory, psi0: Purification, hbar: float = 1.0) -> float:
    """Length of ρ(t) under the quotient metric, by the trapezoid rule."""
    return _trapezoid(speed_profile(traj, psi0, hbar), traj.generator.dt)


@dataclass(frozen=True, eq=False)
class AveragedHamiltonian:
    """Time-averaged, ground-shifted Hamiltonian of a commuting family."""

    frame: np.ndarray  # columns are the common eigenvectors |n>
    energies: np.ndarray  # (N+1, n) eigenvalue curves E_n(t_j)
    ground: np.ndarray  # E_0(t_j)
    averages: np.ndarray  # Ē_n(τ)
    matrix: np.ndarray  # H̄(τ)

    def energy(self, rho) -> float:
        """Ē = Tr(H̄(τ)ρ)."""
        return float(np.trace(self.matrix @ np.asarray(rho)).real)

    def mean_shifted_energy(self, traj: Trajectory) -> float:
        """⟨H - E₀⟩, the time average of Tr(H(t)ρ(t)) - E₀(t)."""
        H = traj.generator
        vals = np.array([
            np.trace(h @ r).real for h, r in zip(H.samples, traj.states())
        ]) - self.ground
        return _trapezoid(vals, H.dt) / H.tau


def common_eigenframe(samples: np.ndarray, seed: int = 0, rtol: float = COMMUTING_RTOL) -> np.ndarray:
    """Eigenframe shared by a commuting family of Hermitian matrices.

    A random real combination of the samples is diagonalized; clusters of
    degenerate combined eigenvalues are re-diagonalized with a fresh
    combination restricted to the cluster. Raises NonCommutingError when
    some sample is not diagonal in the frame.
    """
    rng = np.random.default_rng(seed)
    n = samples.shape[1]
    scale = max(1.0, float(np.max(np.linalg.norm(samples, axis=(1, 2)))))

    def combine(mats):
        c = rng.uniform(0.5, 1.5, size=len(mats))
        return np.einsum("t,tij->ij", c, mats) / c.sum()

    frame = np.zeros((n, n), dtype=complex)
    pending = [(np.eye(n, dtype=complex), 0)]
    while pending:
        basis, depth = pending.pop()
        restricted = np.einsum("ia,tij,jb->tab", basis.conj(), samples, basis)
        w, V = np.linalg.eigh(combine(restricted))
        for group in cluster_eigenvalues(w, DEGENERACY_ATOL * scale):
            sub = basis @ V[:, group]
            if len(group) > 1 and depth < 3:
                pending.append((sub, depth + 1))
            else:
                cols = [i for i in range(n) if not np.any(frame[:, i])]
                frame[:, cols[: len(group)]] = sub
    for h in samples:
        D = frame.conj().T @ h @ frame
        off = np.linalg.norm(D - np.diag(np.diag(D)))
        if off > rtol * scale:
            raise NonCommutingError("Hamiltonian samples do not commute")
    return frame


def averaged_hamiltonian(H: HamiltonianCurve, seed: int = 0) -> AveragedHamiltonian:
    """H̄(τ) = Σ_n Ē_n(τ)|n⟩⟨n| with Ē_n = (1/τ)∫(E_n - E_0)dt."""
    frame = common_eigenframe(H.samples, seed)
    energies = np.einsum("ia,tij,ja->ta", frame.conj(), H.samples, frame).real
    ground = energies.min(axis=1)
    shifted = energies - ground[:, None]
    if H.midpoints is not None:
        mid = np.einsum("ia,tij,ja->ta", frame.conj(), H.midpoints, frame).real
        mid = mid - mid.min(axis=1)[:, None]
        # Simpson's rule on the node/midpoint pairs
        avg = (shifted[:-1] + 4 * mid + shifted[1:]).sum(axis=0) * H.dt / 6 / H.tau
    else:
        avg = np.array([_trapezoid(shifted[:, i], H.dt) for i in range(H.dim)]) / H.tau
    matrix = (frame * avg) @ frame.conj().T
    return AveragedHamiltonian(frame, energies, ground, avg, (matrix + matrix.conj().T) / 2)


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Columns t, vec(ρ) row-major with re/im interleaved, ΔH(t)."""
    H = traj.generator
    rho = traj.states()
    n = rho.shape[1]
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    header.append("delta_H")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, h, r in zip(traj.times, H.samples, rho):
            row = [repr(float(t))]
            for z in r.ravel():
                row += [repr(float(z.real)), repr(float(z.imag))]
            row.append(repr(uncertainty(h, r)))
            w.writerow(row)
