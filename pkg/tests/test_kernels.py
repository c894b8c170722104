import os
import subprocess
import sys

import numpy as np
import pytest

from calmin import kernels
from calmin.kernels import pyfallback

try:
    from calmin.kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def bump_arrays(rng, count, n):
    centers = rng.standard_normal((count, n)) * 0.3
    radii = rng.uniform(0.4, 1.0, count)
    dirs = rng.standard_normal((count, n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    amps = rng.uniform(-0.05, 0.05, count)
    return centers, radii, dirs, amps


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_env_override_selects_fallback():
    code = "from calmin import kernels; print(kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={**os.environ, "CALMIN_KERNELS": "python"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


@needs_core
def test_eval2_and_gram_parity():
    rng = np.random.default_rng(0)
    du = rng.standard_normal((400, 4))
    dv = rng.standard_normal((400, 4))
    rows = np.array([0, 1, 0], dtype=np.int64)
    cols = np.array([2, 3, 3], dtype=np.int64)
    vals = np.array([1.0, -0.5, 2.0])
    a = pyfallback.eval2_values(du, dv, rows, cols, vals)
    b = _core.eval2_values(du, dv, rows, cols, vals)
    assert np.max(np.abs(a - b)) <= 1e-13
    ga = pyfallback.gram_values(du, dv)
    gb = _core.gram_values(du, dv)
    assert np.max(np.abs(ga - gb)) <= 1e-12


@needs_core
def test_weighted_sums_parity():
    rng = np.random.default_rng(1)
    w = rng.random(1000)
    vals = rng.standard_normal(1000)
    g = rng.random(1000)
    assert pyfallback.weighted_sum(w, vals) == pytest.approx(
        _core.weighted_sum(w, vals), abs=1e-12
    )
    assert pyfallback.weighted_sqrt_sum(w, g) == pytest.approx(
        _core.weighted_sqrt_sum(w, g), abs=1e-12
    )


@needs_core
def test_bump_kernels_parity():
    rng = np.random.default_rng(2)
    n = 4
    x = rng.standard_normal((300, n)) * 0.5
    du = rng.standard_normal((300, n))
    dv = rng.standard_normal((300, n))
    t = rng.random(300)
    packed = bump_arrays(rng, 3, n)
    da = pyfallback.displacements(x, t, *packed)
    db = _core.displacements(x, t, *packed)
    assert np.max(np.abs(da - db)) <= 1e-15
    ua, va = pyfallback.pushed_frames(x, du, dv, t, *packed)
    ub, vb = _core.pushed_frames(x, du, dv, t, *packed)
    assert np.max(np.abs(ua - ub)) <= 1e-13
    assert np.max(np.abs(va - vb)) <= 1e-13


@needs_core
def test_no_bump_frames_are_bitwise_copies():
    rng = np.random.default_rng(3)
    n = 4
    x = rng.standard_normal((50, n))
    du = rng.standard_normal((50, n))
    dv = rng.standard_normal((50, n))
    t = rng.random(50)
    empty = (np.empty((0, n)), np.empty(0), np.empty((0, n)), np.empty(0))
    for impl in (pyfallback, _core):
        u2, v2 = impl.pushed_frames(x, du, dv, t, *empty)
        assert np.array_equal(u2, du)
        assert np.array_equal(v2, dv)


@needs_core
def test_orthonormalize_parity():
    rng = np.random.default_rng(4)
    frames = rng.standard_normal((200, 5, 2))
    qa = pyfallback.orthonormalize_2frames(frames)
    qb = _core.orthonormalize_2frames(frames)
    assert np.max(np.abs(qa - qb)) <= 1e-13


@needs_core
def test_ascent_parity():
    rng = np.random.default_rng(5)
    rows = np.array([0, 1], dtype=np.int64)
    cols = np.array([2, 3], dtype=np.int64)
    vals = np.array([1.0, 1.0])
    starts = rng.standard_normal((24, 4, 2))
    va, _ = pyfallback.ascent_2form(rows, cols, vals, 4, starts,
                                    1e-6, 1e-10, 500, 0.5, 1e-9)
    vb, _ = _core.ascent_2form(rows, cols, vals, 4, starts,
                               1e-6, 1e-10, 500, 0.5, 1e-9)
    assert np.max(np.abs(va - vb)) <= 1e-8
    assert max(va) == pytest.approx(1.0, abs=1e-6)
