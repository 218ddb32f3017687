"""Seeded batteries of the library's invariants, shared by the CLI and the tests.

Every check reports the measured residual next to its threshold so that a
failing run says by how much it failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (
    BOUND_SLACK,
    beta_constant,
    build_report,
)
from .bundle import (
    Purification,
    gauge_norm,
    metric_momentum,
    purify,
    qspeed_terms,
    xi_field,
)
from .dynamics import (
    HamiltonianCurve,
    curve_length,
    dispersion_integral,
    evolve_schrodinger,
    evolve_von_neumann,
    horizontal_lift,
    horizontality_residuals,
    parallel_hamiltonian,
)
from .geodesy import (
    ShootingOptions,
    StarMetric,
    coadjoint_term,
    endpoint_distance,
    euler_arnold_integrate,
    geodesic_shoot,
    horizontal_part,
    star_metric,
    u_basis,
)
from .states import Spectrum, bures_angle, haar_unitary, p_sigma, random_density

SUITES = ("qspeed", "conservation", "bounds-chain", "parallel", "ml", "dl", "euler-arnold", "geodesy")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    residual: float
    threshold: float
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.suite}/{self.name}: residual {self.residual:.3e} (threshold {self.threshold:.1e})"

    def to_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "residual": self.residual,
                "threshold": self.threshold, "passed": self.passed}


def _check(suite, name, residual, threshold) -> Check:
    residual = float(residual)
    return Check(suite, name, residual, threshold, bool(residual <= threshold))


# -- generators ------------------------------------------------------------


def random_spectrum(rng: np.random.Generator, k: int, max_l: int = 3) -> Spectrum:
    """Random spectrum of rank k with at most ``max_l`` distinct eigenvalues."""
    l = int(rng.integers(1, min(k, max_l) + 1))  # noqa: E741
    cuts = np.sort(rng.choice(np.arange(1, k), size=l - 1, replace=False)) if l > 1 else []
    m = np.diff(np.concatenate([[0], cuts, [k]])).astype(int)
    while True:
        p = np.sort(rng.uniform(0.1, 1.0, size=l))[::-1]
        if l == 1 or np.min(-np.diff(p)) > 0.05:
            break
    p = p / float(p @ m)
    return Spectrum(tuple(p), tuple(m))


def random_hermitian(n: int, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (A + A.conj().T) / 2
    if norm is not None:
        H *= norm / np.linalg.norm(H, 2)
    return H


def random_driven_curve(n: int, rng: np.random.Generator, tau: float = 1.0,
                        steps: int = 1000, norm: float = 1.0) -> HamiltonianCurve:
    """H(t) = A + sin(2πt/τ)B + cos(πt/τ)C with exact midpoint samples."""
    A, B, C = (random_hermitian(n, rng, norm / 2) for _ in range(3))
    return HamiltonianCurve.from_function(
        lambda t: A + math.sin(2 * math.pi * t / tau) * B + math.cos(math.pi * t / tau) * C,
        tau, steps,
    )


def qubit_example(p=(2 / 3, 1 / 3), a: float = 1.0, theta: float = 0.0,
                  tau: float = math.pi / 4, steps: int = 1000, hbar: float = 1.0):
    """H = iħξ with ξ = [[0, a e^{iθ}], [-a e^{-iθ}, 0]] from ρ₀ = diag(p₁, p₂)."""
    xi = np.array([[0, a * np.exp(1j * theta)], [-a * np.exp(-1j * theta), 0]])
    rho0 = np.diag(np.asarray(p, dtype=float)).astype(complex)
    return HamiltonianCurve.constant(1j * hbar * xi, tau, steps), rho0


def swap4(p=(0.6, 0.4), E: float = 1.0, steps: int = 1000, hbar: float = 1.0, tau: float | None = None):
    """H = E(|1⟩⟨3| + |2⟩⟨4| + h.c.) from ρ₀ = diag(p₁, p₂, 0, 0).

    At τ = πħ/(2E) the support {1, 2} is swapped onto {3, 4}.
    """
    H = np.zeros((4, 4), dtype=complex)
    H[0, 2] = H[2, 0] = H[1, 3] = H[3, 1] = E
    rho0 = np.diag(list(p) + [0.0] * (4 - len(p))).astype(complex)
    tau = math.pi * hbar / (2 * E) if tau is None else tau
    return HamiltonianCurve.constant(H, tau, steps), rho0


def commuting_distinguishable_run(rng: np.random.Generator, pairs: int = 2, tau: float = 1.0,
                                  steps: int = 1000, hbar: float = 1.0):
    """A commuting family taking ρ₀ to a state with orthogonal support.

    Eigenvector pairs (a_j, b_j) carry ρ₀ on (|a_j⟩ + |b_j⟩)/√2; their
    energy gaps integrate to an odd multiple of πħ, which maps each such
    vector onto the orthogonal (|a_j⟩ - |b_j⟩)/√2.
    """
    n = 2 * pairs
    W = haar_unitary(n, rng)
    base = rng.uniform(-1, 1, size=pairs)
    wobble = rng.uniform(0.2, 1.0, size=pairs)
    odd = 2 * rng.integers(0, 2, size=pairs) + 1
    amp = rng.uniform(-0.5, 0.5, size=pairs)

    def H(t):
        e = np.empty(n)
        drift = base + wobble * math.sin(2 * math.pi * t / tau)
        gap = odd * math.pi * hbar / tau * (1 + amp * math.sin(2 * math.pi * t / tau))
        e[0::2] = drift + gap
        e[1::2] = drift
        return (W * e) @ W.conj().T

    p = rng.uniform(0.2, 1.0, size=pairs)
    p /= p.sum()
    rho0 = np.zeros((n, n), dtype=complex)
    for j in range(pairs):
        v = (W[:, 2 * j] + W[:, 2 * j + 1]) / math.sqrt(2)
        rho0 += p[j] * np.outer(v, v.conj())
    return HamiltonianCurve.from_function(H, tau, steps), rho0


# -- suites ----------------------------------------------------------------


def suite_qspeed(seed: int = 0, instances: int = 50) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        sigma = random_spectrum(rng, k)
        psi = purify(random_density(sigma, n, rng), sigma)
        H = random_hermitian(n, rng)
        hbar = float(rng.uniform(0.5, 2.0))
        worst = max(worst, qspeed_terms(psi, H, hbar).identity_residual(hbar))
    return [_check("qspeed", f"speed identity, worst of {instances}", worst, 1e-8)]


def suite_conservation(seed: int = 0, steps: int = 1000) -> list[Check]:
    rng = np.random.default_rng(seed)
    sigma = Spectrum((0.5, 0.3, 0.2), (1, 1, 1))
    n = 4
    psi0 = purify(random_density(sigma, n, rng), sigma)
    H = random_driven_curve(n, rng, tau=2.0, steps=steps)
    traj = evolve_schrodinger(H, psi0)
    P, _ = p_sigma(sigma)
    drift = max(np.linalg.norm(p.conj().T @ p - P) for p in traj.psi)
    w0 = np.linalg.eigvalsh(traj.rho[0])
    spec = max(np.max(np.abs(np.linalg.eigvalsh(r) - w0)) for r in traj.rho)
    # lift accuracy is second order in Δt·‖H‖
    Hl = random_driven_curve(n, rng, tau=1.0, steps=2 * steps, norm=1.0)
    lift = horizontal_lift(Hl, psi0)
    lift_res = float(np.max(horizontality_residuals(lift)))
    # metric momentum along horizontal geodesics
    mom = 0.0
    for spec_g in (Spectrum((0.5, 0.3, 0.2), (1, 1, 1)), Spectrum((0.4, 0.2), (2, 1))):
        rho0 = random_density(spec_g, 3, rng)
        p0 = purify(rho0, spec_g)
        xi0 = horizontal_part(random_hermitian(3, rng) * 1j, p0)
        sol = euler_arnold_integrate(xi0, rho0, 1.0, steps)
        for U, xi in zip(sol.U, sol.xi):
            psi = Purification(U @ p0.psi, spec_g)
            mom = max(mom, float(np.max(np.abs(metric_momentum(psi, U @ xi @ p0.psi)))))
    return [
        _check("conservation", f"psi†psi - P drift over {steps} steps", drift, 1e-10),
        _check("conservation", "spectrum drift of rho(t)", spec, 1e-10),
        _check("conservation", "horizontal lift connection residual", lift_res, 1e-7),
        _check("conservation", "metric momentum along horizontal geodesics", mom, 1e-7),
    ]


def suite_bounds_chain(seed: int = 0, runs: int = 20) -> list[Check]:
    """τ ≥ ħ·distance/ΔE ≥ ħ·bures/ΔE on the qubit example plus random drives."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    H, rho0 = qubit_example()
    cases = [(H, rho0)]
    spectra = [Spectrum((0.7, 0.3), (1, 1)), Spectrum((0.5, 0.25), (1, 2)), Spectrum((1.0,), (1,))]
    for i in range(runs - 1):
        sigma = spectra[i % 3]
        n = 2 if sigma.k == 2 else 3
        tau = float(rng.uniform(0.3, 1.5))
        cases.append((random_driven_curve(n, rng, tau, 400), random_density(sigma, n, rng)))
    margin = 0.0
    for j, (H, rho0) in enumerate(cases):
        traj_rho = _endpoint(H, rho0)
        distance, method, res = endpoint_distance(rho0, traj_rho, ShootingOptions(seed=seed))
        r = build_report(H, rho0, distance=distance, distance_method=method,
                         distance_residual=res, check=False)
        slack = BOUND_SLACK + (2 * res / r.delta_e if res else 0.0)
        worst = max(worst, r.mt_geometric - r.tau - slack, r.mt_bures - r.mt_geometric - BOUND_SLACK)
        if j == 0:
            margin = r.mt_geometric - r.mt_bures
    return [
        _check("bounds-chain", f"chain ordering on {len(cases)} runs (max excess)", max(worst, 0.0), 0.0),
        _check("bounds-chain", "qubit example strict gap >= 0.1 (0.1 - margin)", max(0.0, 0.1 - margin), 0.0),
    ]


def _endpoint(H: HamiltonianCurve, rho0) -> np.ndarray:
    return evolve_von_neumann(H, rho0).rho[-1]


def suite_parallel(seed: int = 0, runs: int = 10, steps: int = 400) -> list[Check]:
    rng = np.random.default_rng(seed)
    xi_max = comm = length_gap = 0.0
    for i in range(runs):
        n = 3
        k = 3 if i % 2 == 0 else 2
        sigma = random_spectrum(rng, k)
        psi0 = purify(random_density(sigma, n, rng), sigma)
        H = random_driven_curve(n, rng, 1.0, steps)
        traj = evolve_schrodinger(H, psi0)
        Hp = parallel_hamiltonian(H, traj)
        for h, hp, psi, r in zip(H.samples, Hp.samples, traj.psi, traj.rho):
            xi_max = max(xi_max, gauge_norm(xi_field(Purification(psi, sigma), hp), sigma))
            comm = max(comm, np.linalg.norm((hp @ r - r @ hp) - (h @ r - r @ h)))
        length = curve_length(traj, psi0)
        integral, _ = dispersion_integral(Hp, traj)
        length_gap = max(length_gap, abs(length - integral))
    return [
        _check("parallel", "xi of the parallel Hamiltonian", xi_max, 1e-8),
        _check("parallel", "||[H_par, rho] - [H, rho]||", comm, 1e-8),
        _check("parallel", "length vs dispersion integral of H_par", length_gap, 1e-6),
    ]


def suite_ml(seed: int = 0, runs: int = 10) -> list[Check]:
    rng = np.random.default_rng(seed)
    H, rho0 = swap4()
    r = build_report(H, rho0, distance=math.pi / 2, distance_method="fully-distinguishable")
    sat = abs(r.ml - r.tau) / r.tau
    worst = 0.0
    for _ in range(runs):
        H, rho0 = commuting_distinguishable_run(rng, int(rng.integers(1, 4)), float(rng.uniform(0.5, 2.0)), 400)
        r = build_report(H, rho0, distance=math.pi / 2, check=False)
        if r.ml is None:
            worst = math.inf
        else:
            worst = max(worst, r.ml - r.tau)
    return [
        _check("ml", "swap4 saturation |ml - tau|/tau", sat, 1e-6),
        _check("ml", f"ml <= tau on {runs} commuting runs (max excess)", max(worst, 0.0), BOUND_SLACK),
    ]


def suite_dl(seed: int = 0, runs: int = 10) -> list[Check]:
    rng = np.random.default_rng(seed)
    beta = beta_constant()
    x = np.linspace(0.0, 20.0, 200001)
    cos_slack = float(np.min(np.cos(x) - (1 - beta * x)))
    ratio = 0.0
    for _ in range(runs):
        n = int(rng.integers(2, 5))
        sigma = random_spectrum(rng, n)
        while sigma.l == 1:  # the maximally mixed state does not move
            sigma = random_spectrum(rng, n)
        H = HamiltonianCurve.constant(random_hermitian(n, rng), float(rng.uniform(0.2, 2.0)), 200)
        r = build_report(H, random_density(sigma, n, rng), check=False)
        ratio = max(ratio, abs(r.dl_improved / r.dl - 1 / beta))
    worst = 0.0
    for _ in range(runs):
        H, rho0 = commuting_distinguishable_run(rng, int(rng.integers(1, 4)), float(rng.uniform(0.5, 2.0)), 400)
        r = build_report(H, rho0, check=False)
        worst = max(worst, r.dl - r.tau, r.dl_improved - r.tau)
    return [
        _check("dl", "beta in [0.7241, 0.7251]", 0.0 if 0.7241 <= beta <= 0.7251 else abs(beta - 0.7246), 0.0),
        _check("dl", "cos x - (1 - beta x) on [0, 20] (negated minimum)", max(0.0, -cos_slack), 1e-9),
        _check("dl", "dl_improved/dl - 1/beta for constant H", ratio, 1e-10),
        _check("dl", f"dl, dl_improved <= tau on {runs} commuting runs (max excess)", max(worst, 0.0), BOUND_SLACK),
    ]


def brute_force_coadjoint(xi, rho0) -> np.ndarray:
    """Solve ζ∗e_a = ξ∗[ξ, e_a] over a u(n) basis, every entry by star_metric."""
    n = rho0.shape[0]
    basis = u_basis(n)
    G = np.array([[star_metric(a, b, rho0) for b in basis] for a in basis])
    rhs = np.array([star_metric(xi, xi @ e - e @ xi, rho0) for e in basis])
    c = np.linalg.solve(G, rhs)
    return np.einsum("b,bij->ij", c, basis)


def suite_euler_arnold(seed: int = 0, steps: int = 1000) -> list[Check]:
    rng = np.random.default_rng(seed)
    sigma = Spectrum((0.5, 0.3, 0.2), (1, 1, 1))
    rho0 = random_density(sigma, 3, rng)
    xi0 = 1j * random_hermitian(3, rng, 1.0)
    sol = euler_arnold_integrate(xi0, rho0, 1.0, steps)
    metric = StarMetric(rho0)
    brute = np.linalg.norm(coadjoint_term(xi0, metric) - brute_force_coadjoint(xi0, rho0))
    two = Spectrum((0.4, 0.2), (1, 3))
    rho2 = random_density(two, 4, rng)
    p2 = purify(rho2, two)
    xi2 = horizontal_part(1j * random_hermitian(4, rng, 1.0), p2)
    ad = np.linalg.norm(coadjoint_term(xi2, StarMetric(rho2)))
    sol2 = euler_arnold_integrate(xi2, rho2, 1.0, steps)
    drift2 = float(np.max(np.linalg.norm(sol2.xi - sol2.xi[0], axis=(1, 2))))
    spread = float(np.max(np.linalg.norm(sol2.hamiltonian.samples - sol2.hamiltonian.samples[0], axis=(1, 2))))
    return [
        _check("euler-arnold", f"xi*xi drift over {steps} steps", sol.speed_drift, 1e-8),
        _check("euler-arnold", "coadjoint term vs brute-force basis evaluation (n=3)", brute, 1e-10),
        _check("euler-arnold", "two-eigenvalue ad*_xi xi on horizontal xi", ad, 1e-12),
        _check("euler-arnold", "two-eigenvalue xi(t) drift", drift2, 1e-10),
        _check("euler-arnold", "two-eigenvalue H_xi(t) spread", spread, 1e-10),
    ]


def suite_geodesy(seed: int = 11) -> list[Check]:
    sigma = Spectrum((0.5, 1 / 3, 1 / 6), (1, 1, 1))
    rho0 = random_density(sigma, 3, seed)
    rho1 = random_density(sigma, 3, seed + 1)
    opts = ShootingOptions(seed=seed)
    fwd = geodesic_shoot(rho0, rho1, opts)
    back = geodesic_shoot(rho1, rho0, opts)
    bures = bures_angle(rho0, rho1)
    return [
        _check("geodesy", "shooting endpoint residual", fwd.residual, opts.tol),
        _check("geodesy", "distance >= bures (deficit)", max(0.0, bures - fwd.distance_estimate), 1e-6),
        _check("geodesy", "symmetry of distance estimates", abs(fwd.distance_estimate - back.distance_estimate), 2 * opts.tol),
    ]


_RUNNERS = {
    "qspeed": suite_qspeed,
    "conservation": suite_conservation,
    "bounds-chain": suite_bounds_chain,
    "parallel": suite_parallel,
    "ml": suite_ml,
    "dl": suite_dl,
    "euler-arnold": suite_euler_arnold,
    "geodesy": suite_geodesy,
}


def run_suite(name: str, seed: int | None = None) -> list[Check]:
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return _RUNNERS[name]() if seed is None else _RUNNERS[name](seed)
