import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from spherefront import fixtures as fx
from spherefront.ambient import dot
from spherefront.curves import PeriodKind, make_helix
from spherefront.fronts import evaluate, tube_from_curve
from spherefront.transforms import (
    caustic,
    caustic_completeness_transfer,
    caustic_pointwise,
    caustic_tangency_residuals,
    central,
    dual,
    dual_involution_residual,
    example_frontal_fE,
    example_frontal_fH,
    frontal_fE_points,
    frontal_fH_points,
    grid_faces,
    hyperbolic_chart,
    integral_curve,
    inverse_caustic,
    lift_klein,
    mesh_from_grid,
    polar_band,
    project,
    sphere_point,
    stereographic,
    stereographic_inverse,
)

SQ = math.sqrt


@pytest.fixture(scope="module")
def helix_front():
    return fx.helix_tube(2.0, 0.5, level=0)


def test_caustic_pointwise_fixes_singular_nodes(helix_front):
    grid = evaluate(helix_front)
    pc = caustic_pointwise(grid)
    # at rho = 0 the caustic point is f itself
    assert np.allclose(pc.f[grid.singular], grid.f[grid.singular], atol=1e-6)
    # explicit formula away from rho = infinity
    rho = grid.rho[..., None]
    ref = (grid.f + rho * grid.nu) / np.sqrt(1 + rho**2)
    assert np.allclose(pc.f, ref, atol=1e-12)
    assert np.allclose(np.linalg.norm(pc.f, axis=-1), 1.0)


def test_caustic_tangent_to_center_tangent(helix_front):
    r = caustic_tangency_residuals(helix_front)
    assert r["f"] < 1e-12
    assert max(r["fs"], r["ft"]) < 10 * r["h"] ** 2


def test_caustic_center_is_unit_tangent(helix_front):
    caus = caustic(helix_front)
    to_s = caus.curve.params["base_parameter"]
    s_orig = to_s(caus.s)
    e = helix_front.curve.derivative(s_orig, 1)
    assert np.allclose(caus.frame.gamma, e, atol=1e-9)


def test_caustic_transfer_coorientable():
    front = fx.helix_tube(SQ(2.5), SQ(5 / 8), level=0)
    tr = caustic_completeness_transfer(front)
    assert tr.gamma_period.kind is PeriodKind.PERIODIC
    assert tr.periodic_transfer and tr.complete and tr.lift_witness
    assert tr.as_dict()["lift_min"] > 0


def _dense(curve, k=8):
    s = np.linspace(0, curve.length, k * curve.m, endpoint=False)
    return curve.derivative(s, 0)


def test_inverse_caustic_recovers_curve(helix_front):
    caus = caustic(helix_front)
    gamma0 = helix_front.curve.derivative(np.array([0.0]), 0)[0]
    inv = inverse_caustic(caus, gamma0)
    pts = inv.frame.gamma
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) < 1e-8
    d = cdist(pts, _dense(helix_front.curve, 16)).min(axis=1)
    assert d.max() < 1e-4


def test_inverse_caustic_default_start_is_regular(helix_front):
    caus = caustic(helix_front)
    E = caus.curve
    g = integral_curve(E)
    g0, g1 = g.derivatives(E.s, 1)
    En = E.derivative(E.s, 0)
    assert np.max(np.abs(np.linalg.norm(g0, axis=1) - 1)) < 1e-8
    assert np.max(np.abs(np.sum(g0 * En, axis=1))) < 1e-8
    # gamma' parallel to E with nonvanishing factor
    lam = np.sum(g1 * En, axis=1)
    assert np.allclose(g1, lam[:, None] * En, atol=1e-7)
    assert np.min(np.abs(lam)) > 1e-3


def test_inverse_caustic_great_circle_congruent():
    front = fx.great_circle_tube(level=0)
    caus = caustic(front)
    inv = inverse_caustic(caus)
    a = inv.frame.gamma
    b = _dense(front.curve, 1)[: len(a)]
    # both are great circles: equal distance matrices up to a shift of the start
    da = cdist(a, a)
    db = cdist(b, b)
    assert np.allclose(np.sort(da.ravel()), np.sort(db.ravel()), atol=1e-6)


def test_integral_curve_rejects_bad_start(helix_front):
    E = caustic(helix_front).curve
    with pytest.raises(ValueError):
        integral_curve(E, np.array([2.0, 0, 0, 0]))


def test_dual_incidence_and_frame(helix_front):
    d = dual(helix_front)
    inc = d.incidence
    assert inc["f_b"] < 1e-12
    assert max(inc["fs_b"], inc["ft_b"]) < 10 * inc["h"] ** 2
    assert np.allclose(d.center_curve, d.frenet.b)
    # constant torsion helix: the dual is a front everywhere
    assert len(d.flagged) == 0


def test_dual_involution(helix_front):
    assert dual_involution_residual(helix_front) < 1e-5
    assert dual_involution_residual(fx.tau_crossing_tube(level=0)) < 1e-5


def test_dual_requires_frenet():
    with pytest.raises(ValueError):
        dual(fx.great_circle_tube(level=0))


def test_stereographic_examples():
    assert np.allclose(stereographic(np.array([0.0, 0, 0, 1])), [0, 0, 1])
    assert np.allclose(stereographic(np.array([1.0, 0, 0, 0])), [1, 0, 0])
    assert np.allclose(stereographic(np.array([0.0, 1, 0, 0])), [0, 0, 0])


def test_stereographic_round_trip(rng):
    y = rng.standard_normal((1000, 3)) * 3
    x = stereographic_inverse(y)
    assert np.allclose(np.linalg.norm(x, axis=1), 1)
    assert np.allclose(stereographic(x), y, atol=1e-10)


def test_central_examples():
    assert np.allclose(central(np.array([0.0, 0, 0, 1])), 0)
    assert np.allclose(lift_klein(np.zeros(3)), [0, 0, 0, 1])
    with pytest.raises(ValueError):
        central(np.array([1.0, 0, 0, 0]))
    with pytest.raises(ValueError):
        central(np.array([0.0, 0, 0.6, -0.8]))


def _tiny_mesh_grid():
    return evaluate(fx.helix_tube(2.0, 0.5, level=0))


def test_projection_drops_antipode():
    grid = _tiny_mesh_grid()
    mesh = mesh_from_grid(grid)
    verts = mesh.vertices.copy()
    verts[0] = [0.0, -1.0, 0.0, 0.0]
    forged = replace(mesh, vertices=verts)
    out = project(forged, "stereo")
    assert out.dropped == 1
    assert len(out.vertices) == len(verts) - 1
    assert out.faces.max() < len(out.vertices)
    # faces touching the dropped vertex are gone
    assert len(out.faces) == len(mesh.faces) - int(np.any(mesh.faces == 0, axis=1).sum())
    with pytest.raises(ValueError):
        project(mesh, "orthographic")


def test_projection_none_keeps_everything():
    mesh = mesh_from_grid(_tiny_mesh_grid())
    out = project(mesh, "none")
    assert out.dropped == 0 and np.array_equal(out.vertices, mesh.vertices)


def test_grid_faces_winding():
    f = grid_faces(3, 4, wrap_cols=True)
    assert len(f) == 2 * 2 * 4
    assert f.min() == 0 and f.max() == 11
    assert f[:2].tolist() == [[0, 4, 5], [0, 5, 1]]
    # the wrapped quad uses column 0
    assert [3, 7, 4] in f.tolist()
    assert len(grid_faces(3, 4, wrap_cols=False)) == 2 * 2 * 3


def test_mesh_from_closed_tube_adds_end_row(helix_front):
    grid = evaluate(helix_front)
    mesh = mesh_from_grid(grid)
    rows = helix_front.m_s + (grid.end_row is not None)
    assert len(mesh.vertices) == rows * helix_front.m_x
    assert len(mesh.scalars["rho"]) == len(mesh.vertices)
    # consistent orientation: no directed edge repeats
    edges = np.concatenate([mesh.faces[:, [0, 1]], mesh.faces[:, [1, 2]], mesh.faces[:, [2, 0]]])
    fwd = {tuple(e) for e in edges.tolist()}
    assert len(fwd) == len(edges)


def test_fE_examples():
    f, nu = frontal_fE_points(np.array([0.0, 0.0, 1.0]))
    assert np.allclose(f, 0) and np.allclose(nu, [0, 0, 1])
    grid = example_frontal_fE(m_theta=33, m_phi=64)
    eq = 33 // 2
    # rank of df drops at the equator
    sv = np.linalg.svd(grid.df[eq], compute_uv=False)
    assert np.max(sv[:, -1]) < 1e-12
    assert np.min(np.linalg.svd(grid.df[eq - 4], compute_uv=False)[:, -1]) > 1e-2


def test_fH_on_hyperboloid(rng):
    x = rng.standard_normal((500, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    f, nu = frontal_fH_points(x)
    assert np.allclose(dot(f, f, "lorentzian"), -1.0, atol=1e-10)
    assert np.allclose(dot(f, nu, "lorentzian"), 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        hyperbolic_chart(np.array([1.0, 0.0]))


def test_reference_frontals_only_for_surfaces():
    with pytest.raises(NotImplementedError):
        example_frontal_fE(n=3)
    with pytest.raises(NotImplementedError):
        example_frontal_fH(n=3)


def test_polar_band_samples_equator():
    theta, phi = polar_band(33, 16, 0.3)
    assert theta[16] == math.pi / 2 and theta[0] == 0.3
    assert len(phi) == 16
    with pytest.raises(ValueError):
        polar_band(32, 16, 0.3)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    assert np.allclose(np.linalg.norm(sphere_point(T, P), axis=-1), 1)


def test_caustic_of_antiperiodic_is_antiperiodic():
    front = tube_from_curve(make_helix(SQ(5), SQ(5) / 3, 256), 128, 64)
    tr = caustic_completeness_transfer(front)
    assert tr.gamma_period.kind is PeriodKind.ANTIPERIODIC
    assert tr.center_period.kind is PeriodKind.ANTIPERIODIC
    assert tr.antiperiodic_transfer
