from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from mixedqsl.cli import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, RunConfig, gap_table, main
from mixedqsl.states import Spectrum, matrix_to_json, random_density


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_bounds_qubit_example(capsys, tmp_path):
    csv_path = tmp_path / "row.csv"
    code, out, _ = _run(["bounds", "--csv", str(csv_path)], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["mt_geometric"] == pytest.approx(math.pi / 4, rel=1e-9)
    assert rep["flags"]["mt_geometric"] == "saturated"
    assert rep["distance_method"] == "qubit"
    rows = list(csv.reader(open(csv_path)))
    assert rows[0][0] == "tau" and len(rows) == 2


def test_bounds_swap4(capsys, tmp_path):
    cfg = _write(tmp_path, "swap.json", {"hamiltonian": {"builtin": "swap4", "E": 2.0}})
    code, out, _ = _run(["bounds", "--config", cfg], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["flags"]["ml"] == "saturated"
    assert rep["ml"] == pytest.approx(math.pi / 4)


def test_bounds_stationary(capsys, tmp_path):
    cfg = _write(tmp_path, "stat.json", {"hamiltonian": {"constant": [[1, 0], [0, 2]]},
                                         "rho0": [[0.7, 0], [0, 0.3]], "tau": 1.0})
    code, out, _ = _run(["bounds", "--config", cfg], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["distance"] == 0.0
    assert rep["flags"]["mt_geometric"] == "not-applicable"


def test_bounds_batch_order_and_determinism(capsys, tmp_path):
    cfgs = [{"hamiltonian": {"builtin": "qubit_example", "a": a}, "tau": 0.5} for a in (0.5, 1.0, 1.5)]
    path = _write(tmp_path, "batch.json", cfgs)
    _, out1, _ = _run(["bounds", "--config", path, "--workers", "3"], capsys)
    _, out2, _ = _run(["bounds", "--config", path], capsys)
    assert out1 == out2
    reps = json.loads(out1)
    assert [r["distance"] for r in reps] == pytest.approx([0.25, 0.5, 0.75])


@pytest.mark.parametrize("cfg, fragment", [
    ({"hamiltonian": {"builtin": "nope"}}, "unknown builtin"),
    ({"hamiltonian": {"builtin": "qubit_example", "p": [0.3, 0.7]}}, "p1 > p2"),
    ({"hamiltonian": {"constant": [[0, 1], [0, 0]]}, "tau": 1.0, "rho0": [[1, 0], [0, 0]]}, "hamiltonian"),
    ({"hamiltonian": {"constant": [[0, 1], [1, 0]]}, "tau": 1.0, "rho0": [[0.6, 0], [0, 0.6]]}, "rho0"),
    ({"bogus": 1}, "unknown configuration keys"),
    ({"steps": 0}, "steps"),
])
def test_config_errors_exit_1(capsys, tmp_path, cfg, fragment):
    code, _, err = _run(["bounds", "--config", _write(tmp_path, "bad.json", cfg)], capsys)
    assert code == EXIT_CONFIG and fragment in err


def test_missing_config_file(capsys):
    code, _, err = _run(["bounds", "--config", "/nonexistent.json"], capsys)
    assert code == EXIT_CONFIG and "cannot read" in err


def test_geodesic_command(capsys, tmp_path):
    sigma = Spectrum((0.5, 1 / 3, 1 / 6), (1, 1, 1))
    cfg = _write(tmp_path, "geo.json", {
        "spectrum": {"p": ["1/2", "1/3", "1/6"], "m": [1, 1, 1]}, "seed": 11,
        "rho1": matrix_to_json(random_density(sigma, 3, 12)), "steps": 400,
    })
    traj = tmp_path / "traj.csv"
    code, out, _ = _run(["geodesic", "--config", cfg, "--csv", str(traj)], capsys)
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["accepted"] and res["residual"] <= 1e-6
    assert res["saturation"] == pytest.approx(1.0, abs=1e-4)
    assert len(list(csv.reader(open(traj)))) == 402


def test_geodesic_identical_and_rank_deficient(capsys, tmp_path):
    rho = [[0.6, 0], [0, 0.4]]
    code, out, _ = _run(["geodesic", "--config", _write(tmp_path, "g.json", {"rho0": rho, "rho1": rho})], capsys)
    assert code == EXIT_OK and json.loads(out)["speed"] == 0.0
    sing = [[1, 0], [0, 0]]
    code, _, err = _run(["geodesic", "--config", _write(tmp_path, "s.json", {"rho0": sing, "rho1": sing})], capsys)
    assert code == EXIT_CONFIG and "invertible" in err


def test_figure_gap(capsys, tmp_path):
    code, out, _ = _run(["figure-gap", "--samples", "3"], capsys)
    rows = list(csv.reader(out.splitlines()))
    assert code == EXIT_OK and len(rows) == 4
    assert float(rows[2][0]) == pytest.approx(math.pi / 2)
    assert float(rows[2][1]) == pytest.approx(math.pi / 2 - math.acos(math.sqrt(8 / 9)))
    code, out, _ = _run(["figure-gap", "--samples", "5", "--spectrum", "3/5,2/5", "--json"], capsys)
    assert json.loads(out)["columns"] == ["a_tau", "gap_0.6_0.4"]
    code, _, err = _run(["figure-gap", "--spectrum", "0.2,0.8"], capsys)
    assert code == EXIT_CONFIG


def test_gap_vanishes_at_zero():
    _, rows = gap_table([(0.75, 0.25)], 100000)
    assert rows[0][1] < 1e-4 and all(r[1] > 0 for r in rows)


def test_validate_command(capsys):
    code, out, _ = _run(["validate", "qspeed", "ml", "--json"], capsys)
    res = json.loads(out)
    assert code == EXIT_OK and res["failed"] == 0 and res["total"] == 3
    code, _, err = _run(["validate", "nonsense"], capsys)
    assert code == EXIT_CONFIG


def test_validate_failure_exit_code(capsys, monkeypatch):
    from mixedqsl import cli, validation

    def broken(name, seed=None):
        return [validation.Check("x", "always fails", 1.0, 0.0, False)]

    monkeypatch.setattr(cli, "run_suite", broken)
    code, out, _ = _run(["validate", "qspeed"], capsys)
    assert code == EXIT_INVARIANT and "FAIL" in out


def test_run_config_defaults():
    cfg = RunConfig.from_dict({})
    H, rho0 = cfg.build()
    assert H.tau == pytest.approx(math.pi / 4) and np.allclose(rho0, np.diag([2 / 3, 1 / 3]))
