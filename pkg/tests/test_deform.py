import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from calmin import constructions as cn
from calmin import criterion as cr
from calmin import deform as df
from calmin import exterior as ext
from calmin import surfaces as sf
from calmin.errors import DeformationError, ShapeError


def edge_bump(config, radius=0.42, direction=(0, 1, 0, 0), amplitude=5e-4, s=0.5):
    mid = config.edges[0].edge.point(s)
    bump = df.BumpField(tuple(mid), radius, direction, amplitude)
    return df.make_diffeo([bump], config)


# ---------------------------------------------------------------------------
# the bump profile


def test_profile_values():
    assert df.bump_profile(0.0) == 1.0
    assert df.bump_profile(1.0) == 0.0
    assert df.bump_profile(-1.2) == 0.0
    assert 0.0 < df.bump_profile(0.9) < 0.2


def test_profile_max_slope_against_scipy_oracle():
    res = minimize_scalar(
        lambda t: -abs(df.bump_profile_slope(t)),
        bounds=(0.0, 0.999999),
        method="bounded",
    )
    assert df.profile_max_slope() == pytest.approx(-res.fun, abs=1e-6)


# ---------------------------------------------------------------------------
# budgets and validity


def test_bump_budget_boundary():
    cap = df.PER_BUMP_BUDGET * 0.3 / df.profile_max_slope()
    df.BumpField((0, 0, 0), 0.3, (1, 0, 0), cap)  # exactly at the budget
    with pytest.raises(DeformationError):
        df.BumpField((0, 0, 0), 0.3, (1, 0, 0), cap * (1 + 1e-6))


def test_bump_normalizes_direction():
    b = df.BumpField((0, 0, 0), 0.3, (0, 2, 0), 0.01)
    assert b.direction == (0.0, 1.0, 0.0)
    with pytest.raises(ShapeError):
        df.BumpField((0, 0, 0), 0.3, (0, 0, 0), 0.01)


def test_diffeo_total_budget():
    cap = df.PER_BUMP_BUDGET * 0.3 / df.profile_max_slope()
    bump = df.BumpField((0, 0, 0), 0.3, (1, 0, 0), cap * 0.95)
    with pytest.raises(DeformationError):
        df.Diffeo((bump, bump))  # 0.95 total budget > 0.9


def test_make_diffeo_rejects_boundary_contact(book120):
    boundary_point = book120.boundary_samples()[0]
    bump = df.BumpField(tuple(boundary_point), 0.2, (0, 1, 0), 1e-3)
    with pytest.raises(DeformationError):
        df.make_diffeo([bump], book120)


def test_make_diffeo_empty_is_identity(book120):
    phi = df.make_diffeo([], book120)
    x = np.array([0.3, 0.1, 0.5])
    assert np.array_equal(phi.apply(x, 1.0), x)


# ---------------------------------------------------------------------------
# apply and jacobian


def test_apply_basics(book120):
    phi = edge_bump(book120, radius=0.35, direction=(0, 1, 0), amplitude=0.02)
    x = np.array([0.05, 0.02, 0.5])
    assert np.array_equal(phi.apply(x, 0.0), x)
    far = np.array([0.9, 0.9, 0.9])
    assert np.array_equal(phi.apply(far, 1.0), far)
    center = np.asarray(phi.bumps[0].center)
    moved = phi.apply(center, 1.0)
    assert np.allclose(moved, center + 0.02 * np.array([0, 1, 0]), atol=1e-15)


def test_jacobian_identity_and_center(book120):
    phi = df.identity_diffeo()
    assert np.array_equal(phi.jacobian([0.1, 0.2, 0.3], 1.0), np.eye(3))
    phi = edge_bump(book120, radius=0.35, direction=(0, 1, 0), amplitude=0.02)
    center = np.asarray(phi.bumps[0].center)
    assert np.allclose(phi.jacobian(center, 1.0), np.eye(3), atol=1e-15)


def test_jacobian_matches_finite_differences():
    # 1000 random (bump, point, time) triples, central differences
    rng = np.random.default_rng(3)
    h = 1e-5
    worst = 0.0
    for _ in range(1000):
        center = rng.standard_normal(4) * 0.3
        radius = float(rng.uniform(0.25, 0.6))
        cap = df.PER_BUMP_BUDGET * radius / df.profile_max_slope()
        bump = df.BumpField(
            tuple(center), radius, tuple(rng.standard_normal(4)),
            float(rng.uniform(-cap, cap)) * 0.5,
        )
        phi = df.Diffeo((bump,))
        t = float(rng.uniform(0, 1))
        x = center + rng.uniform(-0.5, 0.5, 4) * radius
        jac = phi.jacobian(x, t)
        fd = np.empty((4, 4))
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            fd[:, j] = (phi.apply(x + e, t) - phi.apply(x - e, t)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(jac - fd))))
    assert worst <= 1e-6


def test_boundary_points_are_fixed_exactly(sigma3, book120):
    for config in (sigma3, book120):
        direction = (0, 1, 0, 0)[: config.n]
        phi = edge_bump(config, radius=0.4, direction=direction, amplitude=0.02)
        boundary = config.boundary_samples()
        for t in (0.3, 1.0):
            for x in boundary[:: max(1, len(boundary) // 64)]:
                assert np.array_equal(phi.apply(x, t), x)


# ---------------------------------------------------------------------------
# deformed areas


def test_deformed_area_identity_is_bitwise(sigma3, book120):
    for config in (sigma3, book120):
        base = config.total_area(32)
        assert df.deformed_area(config, df.identity_diffeo(), 1.0, 32) == base
        assert df.deformed_area(config, df.identity_diffeo(), 0.37, 32) == base


def test_deformed_area_rejects_bad_t(sigma3):
    with pytest.raises(ShapeError):
        df.deformed_area(sigma3, df.identity_diffeo(), 1.5, 32)


def test_deformed_area_monotone_in_t_above_floor(book120):
    phi = edge_bump(book120, radius=0.4, direction=(0, 1, 0), amplitude=6e-5)
    base = book120.total_area(32)
    for t in (0.0, 0.5, 1.0):
        delta = df.deformed_area(book120, phi, t, 32) - base
        assert delta >= -df.NOISE_FLOOR


def test_deformed_area_increases_on_fan(sigma3):
    phi = edge_bump(sigma3, radius=0.42, direction=(0, 1, 0, 0), amplitude=0.03)
    base = sigma3.total_area(32)
    assert df.deformed_area(sigma3, phi, 1.0, 32) - base > 1e-4


# ---------------------------------------------------------------------------
# swept fluxes and the flux balance


def test_sweep_flux_identity_vanishes(sigma3):
    w = sigma3.face("D1").calibration
    assert df.sweep_flux(sigma3.edges[0].edge, df.identity_diffeo(), w, 32) == 0.0


def test_sweep_flux_witness_cancellation(sigma3):
    phi = edge_bump(
        sigma3, radius=0.42, direction=(0.3, 0.8, 0.1, 0.4), amplitude=0.03
    )
    result = cr.check_edge(sigma3, sigma3.edges[0])
    assert result.min_residual <= 1e-12
    total = 0.0
    for s, fname in zip(result.witness_signs, sigma3.edges[0].face_names):
        form = ext.scale(float(s), sigma3.face(fname).calibration)
        total += df.sweep_flux(sigma3.edges[0].edge, phi, form, 32)
    assert abs(total) <= 1e-12


def test_stokes_budget_flat_calibration_rig(book120, book_flat):
    # the sign convention was fixed once against flat faces; with a wrong
    # sign the residual would be O(swept flux), orders of magnitude above
    # the quadrature level asserted here
    phi = edge_bump(book120, radius=0.35, direction=(0, 1, 0), amplitude=5e-4)
    for face in book120.faces:
        r32 = df.stokes_budget(book120, face.name, phi, face.calibration, 32)
        r64 = df.stokes_budget(book120, face.name, phi, face.calibration, 64)
        assert abs(r32) <= 1e-6
        assert abs(r64) <= abs(r32) / 2
    phi2 = edge_bump(book_flat, radius=0.35, direction=(0, 1, 0), amplitude=0.02)
    for face in book_flat.faces:
        assert abs(
            df.stokes_budget(book_flat, face.name, phi2, face.calibration, 32)
        ) <= 1e-9


def test_stokes_budget_mixed_orientations(book120):
    # the balance must hold no matter how faces are stored-oriented
    faces = [
        sf.Face(f.patch, -1, ext.scale(-1.0, f.calibration), f.name)
        if f.name == "sheet1"
        else f
        for f in book120.faces
    ]
    edge = cr.declare_edge(faces, book120.edges[0].edge, [f.name for f in faces])
    config = cr.Configuration(faces, [edge])
    phi = edge_bump(config, radius=0.35, direction=(0, 1, 0), amplitude=5e-4)
    for face in config.faces:
        assert abs(
            df.stokes_budget(config, face.name, phi, face.calibration, 32)
        ) <= 1e-6


def test_stokes_budget_curved_faces(sigma3):
    phi = edge_bump(sigma3, radius=0.42, direction=(0, 1, 0, 0), amplitude=5e-4)
    forms = [sigma3.face("D1").calibration, cn.kaehler_form(1.234)]
    for w in forms:
        for name in ("D1", "D2", "D3"):
            r32 = df.stokes_budget(sigma3, name, phi, w, 32)
            r64 = df.stokes_budget(sigma3, name, phi, w, 64)
            assert abs(r32) <= 1e-6
            assert abs(r64) <= abs(r32) / 2


# ---------------------------------------------------------------------------
# random trials


def test_random_trials_deterministic(sigma3):
    a = df.random_trials(sigma3, 16, seed=9)
    b = df.random_trials(sigma3, 16, seed=9)
    assert a == b
    c = df.random_trials(sigma3, 16, seed=10)
    assert c != a


def test_random_trials_respect_floor(sigma3, book120):
    for config in (sigma3, book120):
        report = df.random_trials(config, 30, seed=3)
        assert report.min_delta >= -report.noise_floor
        assert report.identity_error == 0.0
        assert report.noise_floor == df.NOISE_FLOOR


def test_random_trials_detect_unbalanced_book(book_sectors_unbalanced):
    report = df.random_trials(book_sectors_unbalanced, 60, seed=7)
    assert report.violation


def test_random_trials_rejects_zero(sigma3):
    with pytest.raises(ShapeError):
        df.random_trials(sigma3, 0, seed=1)


# ---------------------------------------------------------------------------
# adversarial search


def test_adversarial_budget_one(book120):
    report = df.adversarial_search(book120, 1, seed=2)
    assert report.evaluations == 1
    assert report.best_diffeo is not None


def test_adversarial_finds_unbalanced_book_decrease(book_sectors_unbalanced):
    report = df.adversarial_search(book_sectors_unbalanced, 300, seed=11)
    assert report.best_delta <= -1e-3
    assert report.violation
    # the witness is a genuinely valid deformation
    df.make_diffeo(report.best_diffeo.bumps, book_sectors_unbalanced)


def test_adversarial_finds_nothing_on_balanced_book(book120):
    report = df.adversarial_search(book120, 200, seed=11)
    assert report.best_delta >= -report.noise_floor
    assert not report.violation


def test_adversarial_hand_witness(book_sectors_unbalanced):
    # frozen witness: push the binding toward the sum of the sheet
    # directions (the residual direction of the unbalanced edge)
    su = sum(
        np.array([math.cos(a), math.sin(a), 0.0])
        for a in (0.0, math.radians(100), math.radians(230))
    )
    direction = su / np.linalg.norm(su)
    cap = df.PER_BUMP_BUDGET * 0.45 / df.profile_max_slope()
    bump = df.BumpField((0.0, 0.0, 0.5), 0.45, tuple(direction), 0.6 * cap)
    phi = df.make_diffeo([bump], book_sectors_unbalanced)
    base32 = book_sectors_unbalanced.total_area(32)
    base96 = book_sectors_unbalanced.total_area(96)
    assert df.deformed_area(book_sectors_unbalanced, phi, 1.0, 32) - base32 <= -1e-3
    assert df.deformed_area(book_sectors_unbalanced, phi, 1.0, 96) - base96 <= -1e-3
