"""Command-line harness: bound reports, geodesics, figure data and validation.

Exit codes: 0 success, 1 invalid configuration, 2 violated invariant.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bounds import BoundsReport, BoundViolation, build_report
from .dynamics import HamiltonianCurve, evolve_schrodinger, evolve_von_neumann, write_trajectory_csv
from .geodesy import ShootingError, ShootingOptions, endpoint_distance, optimal_hamiltonian
from .states import Spectrum, bures_angle, density, matrix_from_json, random_density
from .validation import SUITES, qubit_example, run_suite, swap4

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2

DEFAULT_GAP_SPECTRA = ((2 / 3, 1 / 3), (3 / 4, 1 / 4), (7 / 8, 1 / 8))


class ConfigError(ValueError):
    """A run configuration violates a precondition."""


def _num(x) -> float:
    return float(Fraction(x)) if isinstance(x, str) else float(x)


@dataclass
class RunConfig:
    """One run: a Hamiltonian source, initial state and numerical settings.

    ``hamiltonian`` is either ``{"builtin": "qubit_example" | "swap4", ...}``
    with builtin parameters, ``{"constant": matrix}``, or
    ``{"samples": [matrix, ...], "midpoints": [...]}`` on the uniform grid.
    Matrices are rows of [re, im] pairs; plain real rows are accepted.
    """

    hamiltonian: dict = field(default_factory=lambda: {"builtin": "qubit_example"})
    spectrum: Spectrum | None = None
    dimension: int | None = None
    rho0: np.ndarray | None = None
    rho1: np.ndarray | None = None
    tau: float | None = None
    steps: int = 1000
    seed: int = 0
    hbar: float = 1.0
    tol: float = 1e-6

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("a run configuration must be a JSON object")
        known = {"hamiltonian", "spectrum", "dimension", "rho0", "rho1", "tau", "steps", "seed", "hbar", "tol"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(extra))}")
        try:
            cfg = cls(
                hamiltonian=data.get("hamiltonian", {"builtin": "qubit_example"}),
                spectrum=Spectrum.from_json(data["spectrum"]) if "spectrum" in data else None,
                dimension=int(data["dimension"]) if "dimension" in data else None,
                rho0=matrix_from_json(data["rho0"]) if "rho0" in data else None,
                rho1=matrix_from_json(data["rho1"]) if "rho1" in data else None,
                tau=_num(data["tau"]) if "tau" in data else None,
                steps=int(data.get("steps", 1000)),
                seed=int(data.get("seed", 0)),
                hbar=_num(data.get("hbar", 1.0)),
                tol=_num(data.get("tol", 1e-6)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.steps < 1 or self.steps > 10**6:
            raise ConfigError("steps must lie in [1, 10^6]")
        if not self.hbar > 0:
            raise ConfigError("hbar must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not isinstance(self.hamiltonian, dict):
            raise ConfigError("hamiltonian must be an object")
        if self.spectrum is not None and self.dimension is not None and self.dimension < self.spectrum.k:
            raise ConfigError(f"dimension {self.dimension} is smaller than the rank {self.spectrum.k}")
        for name in ("rho0", "rho1"):
            rho = getattr(self, name)
            if rho is not None:
                try:
                    setattr(self, name, density(rho))
                except ValueError as exc:
                    raise ConfigError(f"{name}: {exc}") from exc

    def initial_state(self, n: int) -> np.ndarray:
        if self.rho0 is not None:
            if self.rho0.shape != (n, n):
                raise ConfigError(f"rho0 must be {n}x{n}")
            return self.rho0
        if self.spectrum is None:
            raise ConfigError("either rho0 or spectrum is required")
        if n < self.spectrum.k:
            raise ConfigError(f"dimension {n} is smaller than the rank {self.spectrum.k}")
        return random_density(self.spectrum, n, self.seed)

    def build(self) -> tuple[HamiltonianCurve, np.ndarray]:
        """The Hamiltonian curve and initial state this configuration describes."""
        h = self.hamiltonian
        try:
            if "builtin" in h:
                return self._builtin(h)
            if "constant" in h:
                if self.tau is None:
                    raise ConfigError("tau is required for a constant Hamiltonian")
                H = HamiltonianCurve.constant(matrix_from_json(h["constant"]), self.tau, self.steps)
            elif "samples" in h:
                samples = np.array([matrix_from_json(m) for m in h["samples"]])
                mids = h.get("midpoints")
                mids = None if mids is None else np.array([matrix_from_json(m) for m in mids])
                if self.tau is None:
                    raise ConfigError("tau is required with explicit samples")
                H = HamiltonianCurve(self.tau, samples, mids)
            else:
                raise ConfigError("hamiltonian needs one of: builtin, constant, samples")
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"hamiltonian: {exc}") from exc
        n = self.dimension or H.dim
        if n != H.dim:
            raise ConfigError(f"dimension {n} does not match the Hamiltonian ({H.dim})")
        return H, self.initial_state(n)

    def _builtin(self, h: dict):
        name = h["builtin"]
        if name == "qubit_example":
            p = tuple(_num(x) for x in h.get("p", self.spectrum.p if self.spectrum else (2 / 3, 1 / 3)))
            if len(p) != 2 or not p[0] > p[1] > 0 or abs(sum(p) - 1) > 1e-10:
                raise ConfigError("qubit_example needs p1 > p2 > 0 with p1 + p2 = 1")
            a = _num(h.get("a", 1.0))
            if not a > 0:
                raise ConfigError("qubit_example needs a > 0")
            tau = self.tau if self.tau is not None else math.pi / 4
            return qubit_example(p, a, _num(h.get("theta", 0.0)), tau, self.steps, self.hbar)
        if name == "swap4":
            p = tuple(_num(x) for x in h.get("p", self.spectrum.diagonal() if self.spectrum else (0.6, 0.4)))
            if len(p) != 2 or min(p) <= 0 or abs(sum(p) - 1) > 1e-10:
                raise ConfigError("swap4 needs two positive weights summing to one")
            E = _num(h.get("E", 1.0))
            if not E > 0:
                raise ConfigError("swap4 needs E > 0")
            return swap4(p, E, self.steps, self.hbar, self.tau)
        raise ConfigError(f"unknown builtin {name!r}; choose qubit_example or swap4")


def _load_configs(path: str | None) -> list[dict]:
    if path is None:
        return [{}]
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return data if isinstance(data, list) else [data]


def _apply_overrides(raw: dict, args) -> dict:
    raw = dict(raw)
    for key in ("seed", "steps", "hbar", "tol"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    return raw


def _opts(cfg: RunConfig) -> ShootingOptions:
    return ShootingOptions(tol=cfg.tol, seed=cfg.seed, hbar=cfg.hbar)


def run_bounds(cfg: RunConfig) -> dict:
    H, rho0 = cfg.build()
    traj = evolve_von_neumann(H, rho0, cfg.hbar)
    rho1 = traj.rho[-1]
    distance, method, residual = endpoint_distance(rho0, rho1, _opts(cfg))
    if residual > cfg.tol:
        raise ShootingError(f"distance residual {residual:.3e} above tol {cfg.tol:.1e}")
    report = build_report(H, rho0, trajectory=traj, distance=distance, distance_method=method,
                          distance_residual=residual, hbar=cfg.hbar)
    return report.to_dict()


def run_geodesic(cfg: RunConfig, trajectory_csv: str | None = None) -> dict:
    if cfg.rho1 is None:
        raise ConfigError("the geodesic command needs rho1")
    rho0 = cfg.rho0 if cfg.rho0 is not None else cfg.initial_state(cfg.rho1.shape[0])
    if rho0.shape != cfg.rho1.shape:
        raise ConfigError("rho0 and rho1 differ in dimension")
    if np.linalg.eigvalsh(rho0)[0] <= 1e-10:
        raise ConfigError("the geodesic command needs invertible density operators")
    tau = cfg.tau if cfg.tau is not None else 1.0
    try:
        opt = optimal_hamiltonian(rho0, cfg.rho1, tau, cfg.steps, _opts(cfg), cfg.hbar)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = opt.geodesic.to_dict()
    out.update({
        "tau": tau,
        "bures": bures_angle(rho0, cfg.rho1),
        "delta_e": opt.delta_e,
        "mt_geometric": opt.mt_geometric,
        "saturation": opt.saturation,
        "xi_perp_max": opt.xi_perp_max,
        "time_independent": opt.time_independent,
        "hamiltonian_initial": opt.hamiltonian.to_json()["samples"][0],
    })
    if trajectory_csv:
        psi0 = opt.geodesic.psi0
        write_trajectory_csv(trajectory_csv, evolve_schrodinger(opt.hamiltonian, psi0, cfg.hbar))
    return out


def gap_table(spectra, samples: int) -> tuple[list[str], list[list[float]]]:
    """aτ − arccos√((p₁−p₂)²cos²(aτ) + 4p₁p₂) on an open grid of (0, π)."""
    if samples < 1:
        raise ConfigError("samples must be positive")
    for p1, p2 in spectra:
        if not (p1 > p2 > 0) or abs(p1 + p2 - 1) > 1e-10:
            raise ConfigError(f"invalid qubit spectrum ({p1}, {p2}): need p1 > p2 > 0, p1 + p2 = 1")
    header = ["a_tau"] + [f"gap_{p1:.6g}_{p2:.6g}" for p1, p2 in spectra]
    rows = []
    for j in range(1, samples + 1):
        x = math.pi * j / (samples + 1)
        row = [x]
        for p1, p2 in spectra:
            F = (p1 - p2) ** 2 * math.cos(x) ** 2 + 4 * p1 * p2
            row.append(x - math.acos(math.sqrt(min(1.0, F))))
        rows.append(row)
    return header, rows


def _parse_spectrum(text: str) -> tuple[float, float]:
    try:
        parts = tuple(_num(s.strip()) for s in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse spectrum {text!r}") from exc
    if len(parts) != 2:
        raise ConfigError(f"spectrum {text!r} must have two entries")
    return parts


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    return "" if x is None else format(x, ".17g")


def cmd_bounds(args) -> int:
    raws = _load_configs(args.config)
    configs = [RunConfig.from_dict(_apply_overrides(r, args)) for r in raws]
    # runs are independent; results are collected in config order
    with ThreadPoolExecutor(max(1, min(args.workers, len(configs)))) as pool:
        results = list(pool.map(run_bounds, configs))
    _emit_json(results[0] if len(results) == 1 else results)
    if args.csv:
        fields = BoundsReport.CSV_FIELDS
        flags = sorted(results[0]["flags"])
        rows = [[_fmt(r[f]) for f in fields] + [r["flags"][k] for k in flags] for r in results]
        _write_csv(args.csv, list(fields) + [f"flag_{k}" for k in flags], rows)
    return EXIT_OK


def cmd_geodesic(args) -> int:
    raws = _load_configs(args.config)
    if raws == [{}]:
        raise ConfigError("the geodesic command needs --config with rho0/spectrum and rho1")
    configs = [RunConfig.from_dict(_apply_overrides(r, args)) for r in raws]
    results = [run_geodesic(c, args.csv if len(configs) == 1 else None) for c in configs]
    _emit_json(results[0] if len(results) == 1 else results)
    return EXIT_OK


def cmd_figure_gap(args) -> int:
    spectra = [_parse_spectrum(s) for s in args.spectrum] if args.spectrum else list(DEFAULT_GAP_SPECTRA)
    header, rows = gap_table(spectra, args.samples)
    if args.json:
        _emit_json({"columns": header, "rows": rows})
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(x) for x in r] for r in rows])
        sys.stdout.write(buf.getvalue())
    if args.csv:
        _write_csv(args.csv, header, [[_fmt(x) for x in r] for r in rows])
    return EXIT_OK


def cmd_validate(args) -> int:
    names = args.suite or list(SUITES)
    for name in names:
        if name not in SUITES:
            raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    checks = [c for name in names for c in run_suite(name, args.seed)]
    failed = sum(not c.passed for c in checks)
    if args.json:
        _emit_json({"checks": [c.to_dict() for c in checks], "failed": failed, "total": len(checks)})
    else:
        for c in checks:
            print(c.line())
        print(f"{len(checks) - failed}/{len(checks)} checks passed")
    if args.csv:
        _write_csv(args.csv, ["suite", "name", "residual", "threshold", "passed"],
                   [[c.suite, c.name, _fmt(c.residual), _fmt(c.threshold), c.passed] for c in checks])
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON file (an object or a list of objects)")
    common.add_argument("--seed", type=int)
    common.add_argument("--steps", type=int)
    common.add_argument("--hbar", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--csv", help="also write CSV output to this path")
    common.add_argument("--json", action="store_true", help="print JSON instead of text or CSV")

    parser = argparse.ArgumentParser(prog="mixedqsl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bounds", parents=[common], help="speed-limit report for an evolution")
    p.add_argument("--workers", type=int, default=1, help="threads for config batches")
    p.set_defaults(func=cmd_bounds)
    p = sub.add_parser("geodesic", parents=[common], help="shortest geodesic and optimal Hamiltonian")
    p.set_defaults(func=cmd_geodesic)
    p = sub.add_parser("figure-gap", parents=[common], help="distance minus Bures angle for qubit spectra")
    p.add_argument("--spectrum", action="append", help="p1,p2 (fractions allowed); repeatable")
    p.add_argument("--samples", type=int, default=199)
    p.set_defaults(func=cmd_figure_gap)
    p = sub.add_parser("validate", parents=[common], help="run the invariant batteries")
    p.add_argument("suite", nargs="*", help=f"suites to run (default: all of {', '.join(SUITES)})")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundViolation, ShootingError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
