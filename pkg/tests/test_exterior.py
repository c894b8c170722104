import itertools
import math

import numpy as np
import pytest

from calmin import exterior as ext
from calmin.errors import ShapeError


def random_form(rng, n, k):
    coeffs = {}
    for idx in itertools.combinations(range(1, n + 1), k):
        coeffs[idx] = float(rng.standard_normal())
    return ext.ConstantForm(n, k, coeffs)


def random_isometry(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    return ext.LinearIsometry(q)


# ---------------------------------------------------------------------------
# evaluate


def test_evaluate_identity_minor():
    w = ext.dx(3, 1, 2)
    assert ext.evaluate(w, ext.frame([1, 0, 0], [0, 1, 0])) == 1.0


def test_evaluate_single_matching_index():
    w = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): 1.0})
    assert ext.evaluate(w, ext.frame([1, 0, 0, 0], [0, 0, 1, 0])) == 1.0


def test_evaluate_holomorphic_tangents():
    # 1 + 4(u^2 + v^2) at (0.3, 0.2), expanded symbolically
    u, v = 0.3, 0.2
    w = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): 1.0})
    fr = ext.frame([1, 2 * u, 0, 2 * v], [0, -2 * v, 1, 2 * u])
    assert ext.evaluate(w, fr) == pytest.approx(1.52, abs=1e-14)


def test_evaluate_shape_errors():
    w = ext.dx(3, 1, 2)
    with pytest.raises(ShapeError):
        ext.evaluate(w, ext.frame([1, 0, 0]))
    with pytest.raises(ShapeError):
        ext.evaluate(w, ext.frame([1, 0], [0, 1]))


def test_evaluate_alternating_and_multilinear():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(3, 6))
        k = int(rng.integers(2, min(n, 4)))
        w = random_form(rng, n, k)
        vecs = rng.standard_normal((k, n))
        fr = ext.KFrame(vecs)
        val = ext.evaluate(w, fr)
        a, b = sorted(rng.choice(k, size=2, replace=False))
        assert ext.evaluate(w, fr.swapped(a, b)) == pytest.approx(-val, abs=1e-14)
        # linearity in slot a
        s, t = rng.standard_normal(2)
        extra = rng.standard_normal(n)
        combo = vecs.copy()
        combo[a] = s * vecs[a] + t * extra
        replaced = vecs.copy()
        replaced[a] = extra
        lhs = ext.evaluate(w, ext.KFrame(combo))
        rhs = s * val + t * ext.evaluate(w, ext.KFrame(replaced))
        assert lhs == pytest.approx(rhs, abs=1e-12)


# ---------------------------------------------------------------------------
# wedge / linear_combine


def test_wedge_basis():
    assert ext.wedge(ext.dx(3, 1), ext.dx(3, 2)).coeffs == {(1, 2): 1.0}
    assert ext.wedge(ext.dx(3, 2), ext.dx(3, 1)).coeffs == {(1, 2): -1.0}


def test_wedge_hand_expansion():
    a = ext.linear_combine([(1, ext.dx(3, 1)), (1, ext.dx(3, 3))])
    out = ext.wedge(a, ext.dx(3, 2))
    assert out.coeffs == {(1, 2): 1.0, (2, 3): -1.0}


def test_wedge_degree_overflow():
    with pytest.raises(ShapeError):
        ext.wedge(ext.dx(3, 1, 2), ext.dx(3, 2, 3))


def test_wedge_graded_commutativity():
    rng = np.random.default_rng(5)
    for ka, kb in ((1, 1), (1, 2), (2, 2), (2, 3)):
        n = 6
        a = random_form(rng, n, ka)
        b = random_form(rng, n, kb)
        ab = ext.wedge(a, b)
        ba = ext.wedge(b, a)
        sign = (-1.0) ** (ka * kb)
        for idx in set(ab.coeffs) | set(ba.coeffs):
            assert ab.coefficient(idx) == pytest.approx(
                sign * ba.coefficient(idx), abs=1e-12
            )


def test_linear_combine_cancellation_and_scaling():
    w = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): -0.5})
    assert ext.linear_combine([(1, w), (-1, w)]).is_zero()
    out = ext.linear_combine([(2, ext.dx(4, 1, 2))])
    assert out.coeffs == {(1, 2): 2.0}
    with pytest.raises(ShapeError):
        ext.linear_combine([(1, ext.dx(3, 1, 2)), (1, ext.dx(4, 1, 2))])
    with pytest.raises(ShapeError):
        ext.linear_combine([])


# ---------------------------------------------------------------------------
# pushforward


def test_pushforward_identity():
    rng = np.random.default_rng(2)
    w = random_form(rng, 4, 2)
    out = ext.pushforward_isometry(w, ext.LinearIsometry(np.eye(4)))
    for idx in set(w.coeffs) | set(out.coeffs):
        assert out.coefficient(idx) == pytest.approx(w.coefficient(idx), abs=1e-15)


def test_pushforward_quarter_turn():
    th = math.pi / 2
    rot = np.eye(3)
    rot[0, 0] = rot[2, 2] = math.cos(th)
    rot[0, 2] = -math.sin(th)
    rot[2, 0] = math.sin(th)
    out = ext.pushforward_isometry(ext.dx(3, 1, 2), ext.LinearIsometry(rot))
    assert out.coefficient(2, 3) == pytest.approx(-1.0, abs=1e-15)
    assert out.coefficient(1, 2) == pytest.approx(0.0, abs=1e-15)


def test_pushforward_34_rotation_formula():
    th = 0.7313
    rot = np.eye(4)
    rot[2, 2] = rot[3, 3] = math.cos(th)
    rot[2, 3] = -math.sin(th)
    rot[3, 2] = math.sin(th)
    base = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): 1.0})
    out = ext.pushforward_isometry(base, ext.LinearIsometry(rot))
    expect = {
        (1, 3): math.cos(th),
        (2, 4): math.cos(th),
        (1, 4): math.sin(th),
        (2, 3): -math.sin(th),
    }
    for idx, c in expect.items():
        assert out.coefficient(idx) == pytest.approx(c, abs=1e-14)


def test_pushforward_conjugation_oracle():
    # evaluate(R# w, R v) == evaluate(w, v) on random frames
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(3, 6))
        k = int(rng.integers(1, 3))
        w = random_form(rng, n, k)
        iso = random_isometry(rng, n)
        pushed = ext.pushforward_isometry(w, iso)
        vecs = rng.standard_normal((k, n))
        moved = vecs @ iso.matrix.T
        assert ext.evaluate(pushed, ext.KFrame(moved)) == pytest.approx(
            ext.evaluate(w, ext.KFrame(vecs)), abs=1e-10
        )


def test_isometry_rejects_non_orthogonal():
    with pytest.raises(ShapeError):
        ext.LinearIsometry(np.array([[1.0, 0.1], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# plane duals


def test_plane_dual_basis_and_reversal():
    assert ext.plane_dual_form(ext.frame([1, 0, 0], [0, 1, 0])).coeffs == {(1, 2): 1.0}
    assert ext.plane_dual_form(ext.frame([0, 1, 0], [1, 0, 0])).coeffs == {(1, 2): -1.0}


def test_plane_dual_tilted():
    s = 1.0 / math.sqrt(2.0)
    out = ext.plane_dual_form(ext.frame([s, s, 0], [0, 0, 1]))
    assert out.coefficient(1, 3) == pytest.approx(s, abs=1e-15)
    assert out.coefficient(2, 3) == pytest.approx(s, abs=1e-15)


def test_plane_dual_unit_value_and_rejection():
    rng = np.random.default_rng(3)
    vecs = np.linalg.qr(rng.standard_normal((5, 2)))[0].T
    fr = ext.KFrame(vecs)
    assert ext.evaluate(ext.plane_dual_form(fr), fr) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ShapeError):
        ext.plane_dual_form(ext.frame([1, 0, 0], [1, 1, 0]))


# ---------------------------------------------------------------------------
# comass


def test_comass_unit_plane():
    assert ext.comass(ext.dx(3, 1, 2), restarts=8, seed=0) == pytest.approx(
        1.0, abs=1e-6
    )


def test_comass_standard_two_form():
    w = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): 1.0})
    assert ext.comass(w, restarts=16, seed=0) == pytest.approx(1.0, abs=1e-6)


def test_comass_unequal_blocks():
    w = ext.ConstantForm(4, 2, {(1, 2): 2.0, (3, 4): 1.0})
    assert ext.comass(w, restarts=16, seed=0) == pytest.approx(2.0, abs=1e-6)


def test_comass_rejects_bad_degree():
    with pytest.raises(ShapeError):
        ext.comass(ext.dx(3, 1, 2, 3), restarts=4)
    with pytest.raises(ShapeError):
        ext.comass(ext.ConstantForm(3, 2, {}), restarts=0)


def test_comass_homogeneity_and_isometry_invariance():
    rng = np.random.default_rng(17)
    for _ in range(5):
        w = random_form(rng, 4, 2)
        base = ext.comass(w, restarts=24, seed=1)
        c = float(rng.uniform(0.3, 3.0))
        assert ext.comass(ext.scale(c, w), restarts=24, seed=1) == pytest.approx(
            c * base, abs=1e-5
        )
        iso = random_isometry(rng, 4)
        moved = ext.pushforward_isometry(w, iso)
        assert ext.comass(moved, restarts=24, seed=1) == pytest.approx(
            base, abs=1e-5
        )


def test_comass_of_plane_duals_is_one():
    rng = np.random.default_rng(23)
    for n in (3, 4, 5):
        vecs = np.linalg.qr(rng.standard_normal((n, 2)))[0].T
        w = ext.plane_dual_form(ext.KFrame(vecs))
        assert ext.comass(w, restarts=16, seed=2) == pytest.approx(1.0, abs=1e-6)


def test_comass_general_degree_path():
    # k = 3 in R^4: dual of a coordinate 3-plane has comass 1
    w = ext.dx(4, 1, 2, 3)
    assert ext.comass(w, restarts=6, seed=0) == pytest.approx(1.0, abs=1e-5)


def test_comass_determinism():
    w = ext.ConstantForm(4, 2, {(1, 3): 0.8, (1, 4): -0.3, (2, 3): 0.1})
    a = ext.comass(w, restarts=12, seed=9)
    b = ext.comass(w, restarts=12, seed=9)
    assert a == b


# ---------------------------------------------------------------------------
# spectral oracle


def test_oracle_values():
    w1 = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): 1.0})
    assert ext.comass_2form_r4_oracle(w1) == pytest.approx(1.0, abs=1e-12)
    assert ext.comass_2form_r4_oracle(ext.dx(4, 1, 2)) == pytest.approx(1.0, abs=1e-12)
    two = ext.ConstantForm(4, 2, {(1, 2): 2.0, (3, 4): 1.0})
    assert ext.comass_2form_r4_oracle(two) == pytest.approx(2.0, abs=1e-12)


def test_oracle_rejects_wrong_shape():
    with pytest.raises(ShapeError):
        ext.comass_2form_r4_oracle(ext.dx(3, 1, 2))
    with pytest.raises(ShapeError):
        ext.comass_2form_r4_oracle(ext.dx(4, 1))


def test_comass_matches_oracle_on_random_forms():
    rng = np.random.default_rng(31)
    for _ in range(20):
        w = random_form(rng, 4, 2)
        est = ext.comass(w, restarts=64, seed=4)
        assert abs(est - ext.comass_2form_r4_oracle(w)) <= 1e-4


def test_sampled_lower_bound_is_a_lower_bound():
    w = ext.ConstantForm(4, 2, {(1, 3): 1.0, (2, 4): 1.0})
    bound = ext.sampled_comass_lower_bound(w, 100_000, seed=12)
    assert bound <= ext.comass_2form_r4_oracle(w) + 1e-9
    assert bound >= 0.99
