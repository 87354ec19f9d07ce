import json
import math

import numpy as np
import pytest

import compsolve

SIN_ROOT_AT_1 = 0.817619984193676483846678504141


def test_norms_and_duality_map():
    assert compsolve.lp_norm(np.array([3.0, 4.0]), 2.0) == pytest.approx(5.0)
    assert compsolve.lp_norm(np.ones(2), 4.0) == pytest.approx(2 ** 0.25)
    j = compsolve.duality_map(np.ones(2), 4.0)
    assert np.allclose(j, [2 ** -0.5, 2 ** -0.5])


def test_fixture_and_solve():
    d = compsolve.build_fixture({"problem": "sin-perturbed", "dim": 1, "radius": 4.0})
    assert d.dim == 1
    assert d.f1(np.array([0.5]))[0] == pytest.approx(0.25 * math.sin(0.5))
    result = compsolve.solve(d, 1.0)
    assert result["outcome"] == "Converged"
    assert abs(result["x"][0] - SIN_ROOT_AT_1) < 1e-8


def test_certify_identity():
    d = compsolve.build_fixture({"problem": "identity", "dim": 2, "radius": 1.0})
    report = compsolve.certify(d, {"n_sphere": 32, "n_radii": 4, "n_pairs": 256}, seed=3)
    assert report["verdict"] == "PASS"
    assert report["k"] == pytest.approx(1.0)
    assert report["seed"] == 3


def test_errors_surface_as_exceptions():
    with pytest.raises(compsolve.Error):
        compsolve.build_fixture({"problem": "no-such-problem"})


def test_run_command(tmp_path):
    desc = tmp_path / "input.json"
    desc.write_text(json.dumps({"problem": "neg-identity", "dim": 1, "radius": 10.0, "target": 0.5}))
    code, summary = compsolve.run("solve", desc, tmp_path)
    assert code == 2
    assert summary["outcome"] == "NonContractive"
    assert (tmp_path / "trace.csv").exists()
