import math

import numpy as np
import pytest

from calmin import constructions as cn
from calmin import exterior as ext
from calmin import surfaces as sf
from calmin.errors import DegeneracyError, ShapeError


def flat_face(origin, span_u, span_v, domain=None, orientation=1, name="flat"):
    n = len(origin)
    patch = sf.Patch(
        sf.FlatMap(origin, span_u, span_v),
        domain or sf.RectangleDomain(0.0, 1.0, 0.0, 1.0),
    )
    q1 = np.asarray(span_u, dtype=float)
    q1 = q1 / np.linalg.norm(q1)
    w = np.asarray(span_v, dtype=float)
    w = w - np.dot(w, q1) * q1
    q2 = w / np.linalg.norm(w)
    cal = ext.plane_dual_form(ext.KFrame(np.stack([q1, q2])))
    return sf.Face(patch, orientation, cal, name)


@pytest.fixture(scope="module")
def face_d():
    return sf.Face(cn.holomorphic_patch(), +1, cn.kaehler_form(0.0), "D")


# ---------------------------------------------------------------------------
# frames and the area density


def test_tangent_frame_flat():
    f = flat_face([0, 0, 0], [1, 0, 0], [0, 1, 0])
    _, fr = sf.tangent_frame(f, 0.3, 0.8)
    assert np.allclose(fr.vectors, [[1, 0, 0], [0, 1, 0]])


def test_tangent_frame_holomorphic(face_d):
    u, v = 0.3, 0.2
    x, fr = sf.tangent_frame(face_d, u, v)
    assert np.allclose(x, [u, u * u - v * v, v, 2 * u * v])
    assert np.allclose(fr.vectors[0], [1, 2 * u, 0, 2 * v])
    assert np.allclose(fr.vectors[1], [0, -2 * v, 1, 2 * u])


def test_tangent_frame_orientation_swap(face_d):
    flipped = sf.Face(face_d.patch, -1, face_d.calibration, "Dneg")
    _, fr = sf.tangent_frame(face_d, 0.2, 0.1)
    _, fr2 = sf.tangent_frame(flipped, 0.2, 0.1)
    assert np.allclose(fr.vectors[0], fr2.vectors[1])
    assert np.allclose(fr.vectors[1], fr2.vectors[0])


def test_tangent_frame_outside_domain(face_d):
    with pytest.raises(ShapeError):
        sf.tangent_frame(face_d, 0.9, 0.9)


def test_area_element_values(face_d):
    flat = flat_face([0, 0, 0], [1, 0, 0], [0, 1, 0])
    assert sf.area_element(flat, 0.4, 0.6) == pytest.approx(1.0, abs=1e-15)
    u, v = 0.25, 0.3
    assert sf.area_element(face_d, u, v) == pytest.approx(
        1.0 + 4.0 * (u * u + v * v), abs=1e-12
    )
    c = 1.7
    scaled = flat_face([0, 0, 0], [c, 0, 0], [0, c, 0])
    assert sf.area_element(scaled, 0.4, 0.6) == pytest.approx(c * c, abs=1e-12)


def test_area_element_degeneracy():
    patch = sf.Patch(
        sf.FlatMap([0, 0, 0], [1, 0, 0], [1, 0, 0]),
        sf.RectangleDomain(0, 1, 0, 1),
    )
    face = sf.Face(patch, +1, ext.dx(3, 1, 2), "bad")
    with pytest.raises(DegeneracyError):
        sf.area_element(face, 0.5, 0.5)


# ---------------------------------------------------------------------------
# face areas


def test_face_area_quarter_disk():
    f = flat_face(
        [0, 0, 0], [1, 0, 0], [0, 1, 0], domain=sf.QuarterDiskDomain(1.0)
    )
    assert sf.face_area(f, 32) == pytest.approx(math.pi / 4, abs=1e-8)


def test_face_area_unit_square():
    f = flat_face([0, 0, 0], [1, 0, 0], [0, 1, 0])
    assert sf.face_area(f, 32) == pytest.approx(1.0, abs=1e-14)


def test_face_area_holomorphic_matches_radial_oracle(face_d):
    # closed form: (pi/2) * int_0^r (1 + 4 rho^2) rho drho = (pi/2)(1 - t/2),
    # with t = r^2 the positive root of t^2 + t = 1
    t = cn.HOLOMORPHIC_RADIUS_SQ
    oracle = 0.5 * math.pi * (1.0 - 0.5 * t)
    assert sf.face_area(face_d, 64) == pytest.approx(oracle, abs=1e-6)
    assert sf.face_area(face_d, 64) == pytest.approx(1.0853936, abs=1e-6)


def test_face_area_rectangle_additivity():
    whole = flat_face([0, 0, 0], [1, 0.2, 0], [0.1, 1, 0.3])
    left = flat_face(
        [0, 0, 0], [1, 0.2, 0], [0.1, 1, 0.3],
        domain=sf.RectangleDomain(0.0, 0.37, 0.0, 1.0),
    )
    right = flat_face(
        [0, 0, 0], [1, 0.2, 0], [0.1, 1, 0.3],
        domain=sf.RectangleDomain(0.37, 1.0, 0.0, 1.0),
    )
    total = sf.face_area(left, 32) + sf.face_area(right, 32)
    assert total == pytest.approx(sf.face_area(whole, 32), abs=1e-10)


def test_face_area_rejects_low_order(face_d):
    with pytest.raises(ShapeError):
        sf.face_area(face_d, 1)


def test_face_area_propagates_degeneracy():
    patch = sf.Patch(
        sf.FlatMap([0, 0, 0], [1, 0, 0], [1, 0, 0]),
        sf.RectangleDomain(0, 1, 0, 1),
    )
    face = sf.Face(patch, +1, ext.dx(3, 1, 2), "bad")
    with pytest.raises(DegeneracyError):
        sf.face_area(face, 8)


def test_quadrature_convergence_on_catalog_patches(face_d):
    sheared = flat_face([0, 0, 0, 0], [1, 0.3, 0, 0.1], [0, 0.4, 1, 0])
    iso = cn.rotation_about_plane((1, 3), 0.83)
    moved = sf.Face(
        sf.Patch(sf.TransformedMap(face_d.patch.map, iso), face_d.patch.domain),
        +1,
        ext.pushforward_isometry(face_d.calibration, iso),
        "moved",
    )
    tri = flat_face(
        [0, 0, 0], [1, 0, 0.2], [0, 1, 0],
        domain=sf.PolygonDomain(((0, 0), (1, 0), (0.4, 1.1))),
    )
    # catalog area integrands are polynomial, so the rule is exact at
    # every tested order and the differences are pure roundoff
    for face in (face_d, sheared, moved, tri):
        areas = {q: sf.face_area(face, q) for q in (8, 16, 32, 64)}
        diffs = [
            abs(areas[8] - areas[16]),
            abs(areas[16] - areas[32]),
            abs(areas[32] - areas[64]),
        ]
        slack = 2e-14 * max(1.0, areas[64])
        for a, b in zip(diffs, diffs[1:]):
            assert b <= a + slack


# ---------------------------------------------------------------------------
# flux


def test_flux_calibrated_equality(face_d):
    assert abs(
        sf.flux(face_d, cn.kaehler_form(0.0), 64) - sf.face_area(face_d, 64)
    ) <= 1e-8


def test_flux_zero_form_and_orientation(face_d):
    zero = ext.zero_form(4, 2)
    assert sf.flux(face_d, zero, 16) == 0.0
    flipped = sf.Face(face_d.patch, -1, face_d.calibration, "Dneg")
    w = cn.kaehler_form(0.9)
    assert sf.flux(flipped, w, 32) == -sf.flux(face_d, w, 32)


def test_flux_linearity(face_d):
    rng = np.random.default_rng(6)
    a = cn.kaehler_form(0.3)
    b = cn.kaehler_form(2.1)
    s, t = rng.standard_normal(2)
    combo = ext.linear_combine([(s, a), (t, b)])
    lhs = sf.flux(face_d, combo, 24)
    rhs = s * sf.flux(face_d, a, 24) + t * sf.flux(face_d, b, 24)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_calibration_bound_random_faces():
    rng = np.random.default_rng(14)
    for _ in range(8):
        span_u = rng.standard_normal(4)
        span_v = rng.standard_normal(4)
        if np.linalg.norm(np.cross(span_u[:3], span_v[:3])) < 1e-3:
            continue
        face = flat_face(rng.standard_normal(4), span_u, span_v, name="r")
        coeffs = {}
        import itertools

        for idx in itertools.combinations(range(1, 5), 2):
            coeffs[idx] = float(rng.standard_normal())
        w = ext.ConstantForm(4, 2, coeffs)
        bound = ext.comass(w, restarts=16, seed=3) * sf.face_area(face, 24)
        assert abs(sf.flux(face, w, 24)) <= bound + 1e-6


def test_flux_shape_error(face_d):
    with pytest.raises(ShapeError):
        sf.flux(face_d, ext.dx(3, 1, 2), 16)


# ---------------------------------------------------------------------------
# calibration residual


def test_calibration_residual_exact_identity(face_d):
    assert sf.calibration_residual(face_d, cn.kaehler_form(0.0), 10_000, 0) <= 1e-9


def test_calibration_residual_orientation_flip(face_d):
    flipped = sf.Face(face_d.patch, -1, face_d.calibration, "Dneg")
    res = sf.calibration_residual(flipped, cn.kaehler_form(0.0), 200, 0)
    assert res == pytest.approx(2.0, abs=1e-9)


def test_calibration_residual_flat_plane():
    f = flat_face([0, 0, 0], [1, 0, 0], [0, 1, 0])
    assert sf.calibration_residual(f, ext.dx(3, 1, 2), 100, 1) <= 1e-12


def test_calibration_residual_rejects_bad_input(face_d):
    with pytest.raises(ShapeError):
        sf.calibration_residual(face_d, cn.kaehler_form(0.0), 0, 0)


# ---------------------------------------------------------------------------
# boundary correspondence


def test_boundary_contains_base_parabola(face_d):
    corr = sf.boundary_contains(face_d, cn._edge_u_parabola())
    assert corr is not None
    assert corr.segment == "v=0"
    assert corr.direction == 1
    assert corr.max_distance <= 1e-9


def test_boundary_contains_rejects_off_face_curve(face_d):
    seg = sf.segment_curve([0, 0, 0, 0], [0, 0, 0, 1], "z")
    assert sf.boundary_contains(face_d, seg) is None


def test_boundary_contains_arc():
    f = flat_face(
        [0, 0, 0], [1, 0, 0], [0, 1, 0], domain=sf.QuarterDiskDomain(1.0)
    )
    arc = sf.ArcCurve([0, 0, 0], [1, 0, 0], [0, 1, 0], 1.0, 0.0, math.pi / 2, "arc")
    corr = sf.boundary_contains(f, arc)
    assert corr is not None and corr.segment == "arc"


# ---------------------------------------------------------------------------
# induced orientation signs


def test_induced_sign_convention_forced():
    # half-plane spanned by (u, t), edge = the line u = 0 with tangent t:
    # outward conormal is -u and (-u, t) is negative in the (u, t) plane
    f = flat_face([0, 0, 0], [1, 0, 0], [0, 0, 1])
    edge = sf.segment_curve([0, 0, 0], [0, 0, 1], "axis")
    assert sf.induced_edge_sign(f, edge, 0.5) == -1
    flipped = sf.Face(f.patch, -1, f.calibration, "f2")
    assert sf.induced_edge_sign(flipped, edge, 0.5) == +1


def test_induced_sign_odd_in_edge_direction():
    f = flat_face([0, 0, 0], [1, 0, 0], [0, 0, 1])
    fwd = sf.segment_curve([0, 0, 0], [0, 0, 1], "fwd")
    back = sf.segment_curve([0, 0, 1], [0, 0, 0], "back")
    assert sf.induced_edge_sign(f, fwd, 0.5) == -sf.induced_edge_sign(f, back, 0.5)


def test_induced_sign_rejects_interior_point(face_d):
    seg = sf.segment_curve([0, 0, 0, 0], [0, 0, 0, 1], "z")
    with pytest.raises(ShapeError):
        sf.induced_edge_sign(face_d, seg, 0.5)


def test_induced_signs_equal_on_shared_edge(sigma3):
    edge = sigma3.edges[0].edge
    signs = {
        sf.induced_edge_sign(sigma3.face(name), edge, s)
        for name in ("D1", "D2", "D3")
        for s in (0.2, 0.5, 0.8)
    }
    assert signs == {+1}


# ---------------------------------------------------------------------------
# distance queries


def test_distance_to_face_at_intersection(face_d):
    r = cn.HOLOMORPHIC_RADIUS
    p = np.array([0.3 * r, (0.3 * r) ** 2, 0.0, 0.0])
    assert sf.distance_to_face(p, face_d) <= 1e-10


def test_distance_to_face_offset(face_d):
    p = np.array([0.0, 0.0, 0.0, 0.5])
    d = sf.distance_to_face(p, face_d)
    assert 0.3 <= d <= 0.5
