import math

import numpy as np
import pytest

import sigmalab as sl


def test_mesh_and_linear_solve():
    mesh = sl.triangulate(sl.Domain.disk(), 0.1)
    assert mesh.valid()
    assert mesh.nodes.shape[1] == 2
    assert mesh.triangles.shape[1] == 3
    sol = sl.solve(mesh, sl.isotropic(), lambda x, y: x)
    assert sol.l2_error(lambda x, y: x) < 1e-12
    np.testing.assert_allclose(sol.values, mesh.nodes[:, 0], atol=1e-12)
    stream, loop = sol.stream_function(sl.isotropic())
    assert loop < 1e-12
    np.testing.assert_allclose(stream - stream[0], mesh.nodes[:, 1] - mesh.nodes[0, 1], atol=1e-10)


def test_mesh_text_round_trip():
    mesh = sl.triangulate(sl.domain({"type": "ellipse", "a": 1.5, "b": 1.0}), 0.2)
    again = sl.Mesh.from_text(mesh.to_text())
    np.testing.assert_array_equal(again.triangles, mesh.triangles)


def test_coefficients_and_dilatations():
    f = sl.meyers(2.0)
    assert f.K == pytest.approx(2.0)
    mu, nu = sl.complex_dilatations(f(1.0, 0.0))
    assert mu.real == pytest.approx(1.0 / 3.0)
    assert abs(nu) < 1e-15
    g = sl.smooth_random(seed=4, K=2.0, skew=0.5)
    assert not g.symmetric
    mu, nu = sl.complex_dilatations(g(0.2, -0.3))
    assert abs(mu) + abs(nu) <= 1.0 / 3.0 + 1e-12
    assert sl.coefficient({"family": "identity"}).K == 1.0


def test_meyers_jacobian_rate():
    alpha = 2.0
    mesh = sl.triangulate(sl.Domain.disk(), 0.027)
    report = sl.solve_map(mesh, sl.meyers(alpha),
                          lambda x, y: sl.meyers_map(alpha, x, y)["U"][0],
                          lambda x, y: sl.meyers_map(alpha, x, y)["U"][1])
    assert report.sign_changes == 0
    exponent, r2 = report.fit_exponent()
    assert exponent == pytest.approx(2.0, abs=0.15)
    assert r2 > 0.99


def test_oracles():
    assert sl.wood_map(1.0, 0.0, 0.0)["det"] == pytest.approx(3.0)
    assert sl.jin_kazdan_map(0.5, False, 0.1, 0.2, 1.0)["det"] == pytest.approx(0.75)
    assert sl.jin_kazdan_map(0.5, True, 0.1, 0.2, -0.5)["det"] == 0.0


def test_bounds():
    layout = sl.Layout(2, 1, [0, 1], [1.0, 2.0])
    A = np.eye(2)
    assert sl.wiener_bound(layout, A) == pytest.approx(8.0 / 3.0)
    assert sl.translation_bound(layout, A)["value"] == pytest.approx(17.0 / 6.0, rel=1e-6)
    chain = sl.bound_chain(sl.Layout.random(3, [1.0, 2.0, 5.0], 1), A, 4)
    assert chain["ordered"]
    assert chain["F0"] <= chain["F1"] <= chain["F2"] + 1e-9


def test_character():
    rep = sl.character({"type": "disk", "n_boundary": 1024})
    assert rep["certified"]
    assert rep["measured"]["D"] == pytest.approx(2.0, abs=1e-6)


def test_experiment_runs_and_errors():
    assert "identity" in sl.canned_names()
    report = sl.run_experiment("identity")
    assert report["passed"]
    assert report == sl.run_experiment(sl.canned_config("identity"), threads=2)
    with pytest.raises(sl.Error, match="ConfigError"):
        sl.run_experiment({"kind": "solve", "bogus": 1})
    with pytest.raises(sl.Error):
        sl.domain({"type": "disk", "n_boundary": 4})
    assert math.isfinite(sl.ellipticity_constant(np.diag([2.0, 0.5])))
