"""Geodesics of isospectral orbits and time-optimal Hamiltonians.

For invertible ρ₀ the left action of U(n) identifies purifications with
unitaries, and horizontal geodesics are generated by body velocities ξ(t)
solving the Euler-Arnold equation ξ' = ad*_ξ ξ for the left-invariant
metric ξ∗η = -½Tr((ξη + ηξ)ρ₀). Rank-deficient states are handled by
integrating the geodesic equation of the constraint set ψ†ψ = P(σ) directly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, polar
from scipy.optimize import least_squares

from .bundle import (
    Purification,
    connection,
    gauge_norm,
    horizontal_basis,
    purify,
    xi_field,
    xi_perp,
)
from .dynamics import (
    HamiltonianCurve,
    dispersion_integral,
    evolve_schrodinger,
)
from .matkern import antihermitian, antihermitian_part, exp_antiherm
from .states import (
    ZERO_EIGENVALUE,
    Spectrum,
    bures_angle,
    density,
    fully_distinguishable,
    matrix_to_json,
    spectrum_of,
)


class ShootingError(RuntimeError):
    """No start of the geodesic shooting reached the target state."""


def u_basis(n: int) -> np.ndarray:
    """Frobenius-orthonormal basis of u(n), shape (n², n, n)."""
    out = []
    for a in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[a, a] = 1j
        out.append(e)
    s = 1 / math.sqrt(2)
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b], e[b, a] = s, -s
            out.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = e[b, a] = 1j * s
            out.append(e)
    return np.array(out)


def star_metric(xi, eta, rho0) -> float:
    """ξ∗η = -½Tr((ξη + ηξ)ρ₀)."""
    rho0 = np.asarray(rho0, dtype=complex)
    if np.linalg.eigvalsh((rho0 + rho0.conj().T) / 2)[0] <= ZERO_EIGENVALUE:
        raise ValueError("the star metric needs an invertible density operator")
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if xi.shape != rho0.shape or eta.shape != rho0.shape:
        raise ValueError("dimension mismatch")
    return float(-0.5 * np.trace((xi @ eta + eta @ xi) @ rho0).real)


class StarMetric:
    """The ∗ metric at ρ₀ with its Gram matrix factored once."""

    def __init__(self, rho0):
        rho0 = density(rho0)
        if np.linalg.eigvalsh(rho0)[0] <= ZERO_EIGENVALUE:
            raise ValueError("the star metric needs an invertible density operator")
        self.rho0 = rho0
        self.n = rho0.shape[0]
        self.basis = u_basis(self.n)
        # G_ab = -Re Tr(e_a e_b ρ₀)
        prod = np.einsum("aij,bjk,ki->ab", self.basis, self.basis, rho0)
        self.gram = -prod.real
        self._cho = cho_factor(self.gram)
        self._lam, self._frame = np.linalg.eigh(rho0)
        self._denom = 0.5 * (self._lam[:, None] + self._lam[None, :])

    def inner(self, xi, eta) -> float:
        return float(-0.5 * np.trace((xi @ eta + eta @ xi) @ self.rho0).real)

    def norm(self, xi) -> float:
        return math.sqrt(max(0.0, self.inner(xi, xi)))

    def coords(self, xi) -> np.ndarray:
        """Frobenius coordinates Re Tr(e_b† ξ)."""
        return np.einsum("bij,ij->b", self.basis.conj(), xi).real

    def from_coords(self, c) -> np.ndarray:
        return np.einsum("b,bij->ij", c, self.basis)

    def inertia(self, xi) -> np.ndarray:
        """The anti-Hermitian M with ξ∗η = Re Tr(M†η) for all η: ½(ξρ₀ + ρ₀ξ)."""
        return 0.5 * (xi @ self.rho0 + self.rho0 @ xi)

    def solve(self, rhs) -> np.ndarray:
        return self.from_coords(cho_solve(self._cho, rhs))

    def inertia_inverse(self, M) -> np.ndarray:
        """Solve ½(ζρ₀ + ρ₀ζ) = M in the eigenframe of ρ₀."""
        V = self._frame
        return V @ ((V.conj().T @ M @ V) / self._denom) @ V.conj().T


def coadjoint_term(xi, metric: StarMetric, method: str = "gram") -> np.ndarray:
    """ad*_ξ ξ: the ζ in u(n) with ζ∗η = ξ∗[ξ, η] for every η.

    The right-hand sides ξ∗[ξ, e_b] equal the Frobenius coordinates of
    [𝕀ξ, ξ], 𝕀 being the inertia map. ``method="gram"`` solves the Gram
    system over the u(n) basis; ``"eigen"`` inverts 𝕀 directly in the
    eigenframe of ρ₀, which gives the same ζ at O(n³) cost.
    """
    xi = np.asarray(xi, dtype=complex)
    M = metric.inertia(xi)
    B = M @ xi - xi @ M
    if method == "eigen":
        return antihermitian_part(metric.inertia_inverse(B))
    if method != "gram":
        raise ValueError(f"unknown method {method!r}")
    return antihermitian_part(metric.solve(metric.coords(B)))


@dataclass(frozen=True, eq=False)
class EulerArnoldSolution:
    times: np.ndarray
    xi: np.ndarray  # (N+1, n, n)
    U: np.ndarray  # (N+1, n, n), U' = Uξ
    hamiltonian: HamiltonianCurve
    speed_drift: float


def _ea_rhs(metric, xi, U):
    return coadjoint_term(xi, metric, "eigen"), U @ xi


def _ea_step(metric, xi, U, h):
    k1x, k1u = _ea_rhs(metric, xi, U)
    k2x, k2u = _ea_rhs(metric, xi + h / 2 * k1x, U + h / 2 * k1u)
    k3x, k3u = _ea_rhs(metric, xi + h / 2 * k2x, U + h / 2 * k2u)
    k4x, k4u = _ea_rhs(metric, xi + h * k3x, U + h * k3u)
    xi = xi + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
    U = U + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
    return antihermitian_part(xi), U


def euler_arnold_integrate(
    xi0,
    rho0,
    duration: float = 1.0,
    steps: int = 1000,
    hbar: float = 1.0,
    metric: StarMetric | None = None,
) -> EulerArnoldSolution:
    """Integrate ξ' = ad*_ξ ξ and U' = Uξ with classical RK4.

    Also returns H_ξ(t) = iħ U ξ U† on the grid, with midpoint samples from
    cubic Hermite interpolation of (ξ, U).
    """
    metric = metric or StarMetric(rho0)
    xi = antihermitian(xi0)
    n = xi.shape[0]
    h = duration / steps
    U = np.eye(n, dtype=complex)
    xis = [xi]
    Us = [U]
    mids = []
    for _ in range(steps):
        f0x, f0u = _ea_rhs(metric, xi, U)
        xi1, U1 = _ea_step(metric, xi, U, h)
        f1x, f1u = _ea_rhs(metric, xi1, U1)
        xm = antihermitian_part((xi + xi1) / 2 + h / 8 * (f0x - f1x))
        Um = (U + U1) / 2 + h / 8 * (f0u - f1u)
        mids.append(1j * hbar * Um @ xm @ np.linalg.inv(Um))
        xi, U = xi1, U1
        xis.append(xi)
        Us.append(U)
    xis = np.array(xis)
    Us = np.array(Us)
    nodes = 1j * hbar * np.einsum("tij,tjk,tlk->til", Us, xis, Us.conj())
    speeds = np.array([metric.inner(x, x) for x in xis])
    H = HamiltonianCurve(duration, nodes, np.array(mids))
    return EulerArnoldSolution(
        np.linspace(0.0, duration, steps + 1), xis, Us, H,
        float(np.max(np.abs(speeds - speeds[0]))),
    )


def _ea_endpoint(metric: StarMetric, xi0: np.ndarray, steps: int) -> np.ndarray:
    xi = xi0
    U = np.eye(xi0.shape[0], dtype=complex)
    h = 1.0 / steps
    for _ in range(steps):
        xi, U = _ea_step(metric, xi, U, h)
    return U


def horizontality_check(xi, psi0: Purification) -> float:
    """Gauge norm of the connection on the fundamental field ξψ₀."""
    xi = np.asarray(xi, dtype=complex)
    return gauge_norm(connection(psi0, xi @ psi0.psi), psi0.spectrum)


def horizontal_part(xi, psi0: Purification) -> np.ndarray:
    """ξ minus the vertical compensation ψ₀ A(ξψ₀) ψ₀⁻¹ (invertible ψ₀)."""
    xi = np.asarray(xi, dtype=complex)
    A = connection(psi0, xi @ psi0.psi)
    return antihermitian_part(xi - psi0.psi @ A @ np.linalg.inv(psi0.psi))


def two_eigenvalue_geodesic(p1, p2, m1, m2, xi, t):
    """ψ(t) = exp(tξ)√P(σ) and ρ(t) for a horizontal ξ at the diagonal state.

    ``xi`` must be off-diagonal with respect to the (m1, m2) block split.
    The qubit case uses the closed-form cos/sin matrix.
    """
    sigma = Spectrum((p1, p2), (m1, m2))
    xi = antihermitian(xi)
    n = m1 + m2
    if xi.shape != (n, n):
        raise ValueError(f"xi must be {n}x{n}")
    if np.linalg.norm(xi[:m1, :m1]) + np.linalg.norm(xi[m1:, m1:]) > 1e-12 * max(1.0, np.linalg.norm(xi)):
        raise ValueError("xi must be off-diagonal with respect to the block split")
    root = np.sqrt(sigma.diagonal())
    if n == 2:
        z = xi[0, 1]
        a, theta = abs(z), np.angle(z)
        c, s = math.cos(a * t), math.sin(a * t)
        psi = np.array([
            [root[0] * c, root[1] * np.exp(1j * theta) * s],
            [-root[0] * np.exp(-1j * theta) * s, root[1] * c],
        ])
    else:
        psi = exp_antiherm(t * xi) * root[None, :]
    rho = psi @ psi.conj().T
    return psi, (rho + rho.conj().T) / 2


def qubit_distance(rho0, rho1) -> float:
    """Distance between isospectral invertible qubit states.

    The orbit is a round sphere on which the Bloch vector turns at twice
    the geodesic speed, so the distance is half the Bloch angle.
    """
    rho0 = density(rho0)
    rho1 = density(rho1)
    if rho0.shape != (2, 2):
        raise ValueError("qubit states only")

    def bloch(r):
        return np.array([2 * r[0, 1].real, -2 * r[0, 1].imag, (r[0, 0] - r[1, 1]).real])

    b0, b1 = bloch(rho0), bloch(rho1)
    r0, r1 = np.linalg.norm(b0), np.linalg.norm(b1)
    if r0 < 1e-12 or abs(r0 - r1) > 1e-8:
        raise ValueError("states must be isospectral and not maximally mixed")
    return 0.5 * math.acos(max(-1.0, min(1.0, float(b0 @ b1) / (r0 * r1))))


# -- constraint-set geodesics (any rank) ----------------------------------


def _stiefel_accel(psi, vel, d):
    S = -2 * (vel.conj().T @ vel) / (d[:, None] + d[None, :])
    return psi @ S


def stiefel_geodesic(psi0: Purification, X, duration: float = 1.0, steps: int = 400, keep: bool = False):
    """Geodesic of {ψ†ψ = P(σ)} from ψ₀ with initial velocity X.

    ψ'' = ψS with S solving SP + PS = -2ψ'†ψ', integrated with RK4.
    """
    d = psi0.spectrum.diagonal()
    psi = psi0.psi.astype(complex)
    vel = np.asarray(X, dtype=complex)
    h = duration / steps
    path = [psi]
    for _ in range(steps):
        k1p, k1v = vel, _stiefel_accel(psi, vel, d)
        k2p, k2v = vel + h / 2 * k1v, _stiefel_accel(psi + h / 2 * k1p, vel + h / 2 * k1v, d)
        k3p, k3v = vel + h / 2 * k2v, _stiefel_accel(psi + h / 2 * k2p, vel + h / 2 * k2v, d)
        k4p, k4v = vel + h * k3v, _stiefel_accel(psi + h * k3p, vel + h * k3v, d)
        psi = psi + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        vel = vel + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if keep:
            path.append(psi)
    return np.array(path) if keep else psi


# -- shooting ----------------------------------------------------------------


@dataclass
class ShootingOptions:
    tol: float = 1e-6
    starts: int = 8
    seed: int = 0
    steps: int = 100
    curve_steps: int = 1000
    max_nfev: int = 400
    workers: int = 1
    hbar: float = 1.0


@dataclass(eq=False)
class GeodesicResult:
    xi0: np.ndarray | None  # body velocity at ψ₀ (invertible case)
    velocity: np.ndarray  # horizontal initial velocity X at ψ₀
    psi0: Purification
    speed: float
    duration: float
    residual: float
    distance_estimate: float
    method: str
    accepted: bool
    starts: list = field(default_factory=list)
    curve: EulerArnoldSolution | None = None
    label: str = "upper bound from best geodesic found"

    def to_dict(self) -> dict:
        return {
            "xi0": None if self.xi0 is None else matrix_to_json(self.xi0),
            "velocity": matrix_to_json(self.velocity),
            "psi0": matrix_to_json(self.psi0.psi),
            "spectrum": self.psi0.spectrum.to_json(),
            "speed": self.speed,
            "duration": self.duration,
            "residual": self.residual,
            "distance_estimate": self.distance_estimate,
            "method": self.method,
            "accepted": self.accepted,
            "label": self.label,
            "starts": self.starts,
            "curve_steps": None if self.curve is None else len(self.curve.times) - 1,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def _hermitian_vector(A: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(A.shape[0])
    v = A[iu]
    return np.concatenate([v.real, v.imag])


def _aligned_log(psi0: Purification, psi1: Purification) -> np.ndarray:
    """Great-circle velocity from ψ₀ to the gauge-aligned purification of ρ₁."""
    N = psi0.psi.conj().T @ psi1.psi
    W = np.zeros_like(N)
    for b in psi0.spectrum.block_slices():
        u, _, vh = np.linalg.svd(N[b, b].conj().T)
        W[b, b] = (u @ vh).conj().T
    target = psi1.psi @ W
    c = min(1.0, max(-1.0, float(np.vdot(psi0.psi, target).real)))
    D = target - c * psi0.psi
    nrm = np.linalg.norm(D)
    if nrm < 1e-15:
        return np.zeros_like(D)
    return math.acos(c) * D / nrm


class _Shooter:
    def __init__(self, rho0, rho1, opts: ShootingOptions):
        self.rho0 = density(rho0)
        self.rho1 = density(rho1)
        self.opts = opts
        self.sigma = spectrum_of(self.rho0)
        if not self.sigma.matches(spectrum_of(self.rho1)):
            raise ValueError("states are not isospectral")
        self.psi0 = purify(self.rho0, self.sigma)
        self.invertible = self.sigma.k == self.rho0.shape[0]
        self.basis = horizontal_basis(self.psi0)
        self.target = _hermitian_vector(self.rho1)
        if self.invertible:
            self.metric = StarMetric(self.rho0)
            self.psi_inv = np.linalg.inv(self.psi0.psi)
            self.method = "euler-arnold"
        else:
            self.method = "stiefel"

    def velocity(self, c) -> np.ndarray:
        return np.einsum("b,bij->ij", c, self.basis)

    def endpoint(self, c) -> np.ndarray:
        X = self.velocity(c)
        if self.invertible:
            xi0 = antihermitian_part(X @ self.psi_inv)
            if self.sigma.l <= 2:
                # horizontal generators are stationary for two eigenvalues
                U = exp_antiherm(xi0)
            else:
                U = _ea_endpoint(self.metric, xi0, self._steps(c))
            # RK4 leaves U unitary only to truncation order
            U, _ = polar(U)
            psi = U @ self.psi0.psi
        else:
            psi = stiefel_geodesic(self.psi0, X, 1.0, self._steps(c))
        rho = psi @ psi.conj().T
        rho = (rho + rho.conj().T) / 2
        return rho / np.trace(rho).real

    def _steps(self, c) -> int:
        # keep the RK4 step length below 1/50 of the geodesic's angular scale
        return int(min(20 * self.opts.steps, max(self.opts.steps, math.ceil(50 * np.linalg.norm(c)))))

    def residual(self, c) -> np.ndarray:
        return _hermitian_vector(self.endpoint(c)) - self.target

    def coefficients(self, X) -> np.ndarray:
        return np.einsum("bij,ij->b", self.basis.conj(), X).real

    def initial_guesses(self) -> list[np.ndarray]:
        guesses = [self.coefficients(_aligned_log(self.psi0, purify(self.rho1, self.sigma)))]
        # linearization ρ' = Xψ₀† + ψ₀X†
        cols = [_hermitian_vector(B @ self.psi0.psi.conj().T + self.psi0.psi @ B.conj().T)
                for B in self.basis]
        J = np.array(cols).T
        delta = self.target - _hermitian_vector(self.rho0)
        lin, *_ = np.linalg.lstsq(J, delta, rcond=None)
        guesses.append(lin)
        # ξ ∝ [ρ₁, ρ₀], projected horizontal and scaled along the linearization
        comm = self.coefficients((self.rho1 @ self.rho0 - self.rho0 @ self.rho1) @ self.psi0.psi)
        jc = J @ comm
        if float(jc @ jc) > 1e-30:
            guesses.append(comm * float(jc @ delta) / float(jc @ jc))
        rng = np.random.default_rng(self.opts.seed)
        base = min(guesses, key=lambda g: float(np.linalg.norm(self.residual(g))))
        scale = 0.3 * np.linalg.norm(base) + 0.1
        while len(guesses) < self.opts.starts:
            guesses.append(base + scale * rng.standard_normal(base.size))
        return guesses[: max(1, self.opts.starts)]

    def run_start(self, index: int, x0: np.ndarray) -> dict:
        try:
            sol = least_squares(self.residual, x0, method="trf", xtol=1e-15,
                                ftol=1e-15, gtol=1e-15, max_nfev=self.opts.max_nfev)
            c = sol.x
        except (np.linalg.LinAlgError, ValueError):
            c = x0
        try:
            res = bures_angle(self.endpoint(c), self.rho1)
        except (np.linalg.LinAlgError, ValueError):
            # a diverged start can leave the state space entirely
            res = math.inf
        return {
            "start": index,
            "speed": float(np.linalg.norm(c)),
            "residual": res,
            "accepted": bool(res <= self.opts.tol),
            "coefficients": c,
        }


def geodesic_shoot(rho0, rho1, opts: ShootingOptions | None = None) -> GeodesicResult:
    """Find a horizontal geodesic of unit duration from ρ₀ to ρ₁.

    Multi-start trust-region least squares (finite-difference Jacobian) over the
    coefficients of the initial velocity in an orthonormal basis of the
    horizontal space at ψ₀. The shortest accepted geodesic is returned; its
    length is an upper bound on the distance.
    """
    opts = opts or ShootingOptions()
    shooter = _Shooter(rho0, rho1, opts)
    psi0 = shooter.psi0
    if bures_angle(shooter.rho0, shooter.rho1) <= opts.tol and np.allclose(
        shooter.rho0, shooter.rho1, atol=1e-12
    ):
        zero = np.zeros_like(psi0.psi)
        return GeodesicResult(
            xi0=np.zeros((psi0.n, psi0.n), dtype=complex) if shooter.invertible else None,
            velocity=zero, psi0=psi0, speed=0.0, duration=1.0, residual=0.0,
            distance_estimate=0.0, method="trivial", accepted=True,
        )
    guesses = shooter.initial_guesses()
    if opts.workers > 1:
        with ThreadPoolExecutor(opts.workers) as pool:
            runs = list(pool.map(shooter.run_start, range(len(guesses)), guesses))
    else:
        runs = [shooter.run_start(i, g) for i, g in enumerate(guesses)]
    accepted = [r for r in runs if r["accepted"]]
    summary = [
        {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
         for k, v in r.items() if k != "coefficients"}
        for r in runs
    ]
    if not accepted:
        best = min(runs, key=lambda r: r["residual"])
        raise ShootingError(
            f"no start converged (best endpoint Bures residual {best['residual']:.3e})"
        )
    best = min(accepted, key=lambda r: (r["speed"], r["start"]))
    X = shooter.velocity(best["coefficients"])
    xi0 = antihermitian_part(X @ shooter.psi_inv) if shooter.invertible else None
    curve = None
    if shooter.invertible:
        curve = euler_arnold_integrate(xi0, shooter.rho0, 1.0, opts.curve_steps,
                                       opts.hbar, shooter.metric)
    return GeodesicResult(
        xi0=xi0, velocity=X, psi0=psi0, speed=best["speed"], duration=1.0,
        residual=best["residual"], distance_estimate=best["speed"],
        method=shooter.method, accepted=True, starts=summary, curve=curve,
    )


def endpoint_distance(rho0, rho1, opts: ShootingOptions | None = None) -> tuple[float, str, float]:
    """Distance between isospectral states as ``(value, method, residual)``.

    Closed forms are used where they apply: coincident states, fully
    distinguishable states (π/2), pure states (Fubini-Study angle, equal to
    the Bures angle) and invertible qubits. Otherwise geodesic shooting
    supplies an upper bound.
    """
    rho0 = density(rho0)
    rho1 = density(rho1)
    sigma = spectrum_of(rho0)
    if not sigma.matches(spectrum_of(rho1)):
        raise ValueError("states are not isospectral")
    if np.linalg.norm(rho0 - rho1) <= 1e-12:
        return 0.0, "identical", 0.0
    if fully_distinguishable(rho0, rho1):
        return math.pi / 2, "fully-distinguishable", 0.0
    if sigma.k == 1:
        return bures_angle(rho0, rho1), "pure", 0.0
    if rho0.shape == (2, 2) and sigma.l == 2:
        return qubit_distance(rho0, rho1), "qubit", 0.0
    geo = geodesic_shoot(rho0, rho1, opts)
    return geo.distance_estimate, f"shooting:{geo.method}", geo.residual


# -- optimal Hamiltonians ----------------------------------------------------


@dataclass(eq=False)
class OptimalHamiltonian:
    hamiltonian: HamiltonianCurve
    geodesic: GeodesicResult
    distance: float
    delta_e: float
    mt_geometric: float
    saturation: float  # mt_geometric / tau
    xi_perp_max: float
    time_independent: bool


def optimal_hamiltonian(
    rho0, rho1, tau: float = 1.0, steps: int = 1000,
    opts: ShootingOptions | None = None, hbar: float = 1.0,
) -> OptimalHamiltonian:
    """Synthesize H_ξ along the shortest geodesic found from ρ₀ to ρ₁ in time τ."""
    from .bounds import mt_bounds

    opts = opts or ShootingOptions(hbar=hbar)
    geo = geodesic_shoot(rho0, rho1, opts)
    psi0 = geo.psi0
    n = psi0.n
    if geo.xi0 is None:
        raise ValueError("optimal Hamiltonians need invertible density operators")
    if geo.speed == 0.0:
        H = HamiltonianCurve.constant(np.zeros((n, n)), tau, steps)
    else:
        sol = euler_arnold_integrate(geo.xi0 / tau, psi0.psi @ psi0.psi.conj().T,
                                     tau, steps, hbar)
        H = sol.hamiltonian
    traj = evolve_schrodinger(H, psi0, hbar)
    _, delta_e = dispersion_integral(H, traj)
    distance = geo.distance_estimate
    mt_geo, _ = mt_bounds(distance, 0.0, delta_e, hbar)
    perp = 0.0
    for h, p in zip(H.samples, traj.psi):
        xi = xi_field(Purification(p, psi0.spectrum), h, hbar)
        perp = max(perp, gauge_norm(xi_perp(xi, psi0.spectrum), psi0.spectrum))
    spread = float(np.max(np.linalg.norm(H.samples - H.samples[0], axis=(1, 2))))
    mt_geo = tau if mt_geo is None else mt_geo
    return OptimalHamiltonian(
        hamiltonian=H, geodesic=geo, distance=distance, delta_e=delta_e,
        mt_geometric=mt_geo, saturation=mt_geo / tau, xi_perp_max=perp,
        time_independent=bool(spread <= 1e-8 * max(1.0, np.linalg.norm(H.samples[0]))),
    )
