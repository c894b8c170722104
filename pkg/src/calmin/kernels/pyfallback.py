"""NumPy implementations of the hot numerical kernels.

This backend is selected when the compiled extension is unavailable or
when ``CALMIN_KERNELS=python`` is set.  Both backends implement the same
algorithms with the same per-node arithmetic; accumulation order is fixed
per backend, so repeated runs on one backend are deterministic.

Array conventions (float64, C-contiguous):
    X        (N, n)   evaluation points
    DU, DV   (N, n)   first/second tangent vectors at each point
    W        (N,)     quadrature weights
    T        (N,)     homotopy parameter per node
    rows, cols, vals  sparse degree-2 form: sum of vals[t] * dx_rows[t] ^ dx_cols[t]
    centers (B, n), radii (B,), dirs (B, n), amps (B,)  bump fields
"""

from __future__ import annotations

import numpy as np


def eval2_values(du, dv, rows, cols, vals):
    """Evaluate a constant 2-form on a batch of (du, dv) frames."""
    out = np.zeros(du.shape[0])
    for r, c, v in zip(rows, cols, vals):
        out += v * (du[:, r] * dv[:, c] - du[:, c] * dv[:, r])
    return out


def gram_values(du, dv):
    """Squared parallelogram area |du|^2 |dv|^2 - (du.dv)^2, clipped at 0."""
    g11 = np.einsum("ij,ij->i", du, du)
    g22 = np.einsum("ij,ij->i", dv, dv)
    g12 = np.einsum("ij,ij->i", du, dv)
    return np.maximum(g11 * g22 - g12 * g12, 0.0)


def weighted_sum(w, vals):
    return float(np.dot(w, vals))


def weighted_sqrt_sum(w, g):
    return float(np.dot(w, np.sqrt(g)))


def _profile(s2):
    """Bump profile exp(1 - 1/(1 - t^2)) evaluated from t^2; 0 outside."""
    out = np.zeros_like(s2)
    inside = s2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
    return out


def displacements(x, t, centers, radii, dirs, amps):
    """Displacement field of the homotopy: phi_t(x) - x."""
    disp = np.zeros_like(x)
    for b in range(len(radii)):
        diff = x - centers[b]
        s2 = np.einsum("ij,ij->i", diff, diff) / (radii[b] * radii[b])
        prof = _profile(s2)
        disp += (t * amps[b] * prof)[:, None] * dirs[b]
    return disp


def pushed_frames(x, du, dv, t, centers, radii, dirs, amps):
    """Apply the homotopy differential D(phi_t)(x) to tangent frames.

    With no bumps this returns exact copies of the inputs, which keeps the
    undeformed and identity-deformed quadrature paths bit-identical.
    """
    du2 = du.copy()
    dv2 = dv.copy()
    for b in range(len(radii)):
        diff = x - centers[b]
        rad2 = radii[b] * radii[b]
        s2 = np.einsum("ij,ij->i", diff, diff) / rad2
        inside = s2 < 1.0
        if not inside.any():
            continue
        s2i = s2[inside]
        prof = np.exp(1.0 - 1.0 / (1.0 - s2i))
        # d/dx of profile(|x-c|/r) along u is  (b'(s)/s) * (diff.u) / r^2,
        # and b'(s)/s = -2 prof / (1-s^2)^2, smooth through s = 0.
        coef = t[inside] * amps[b] * (-2.0) * prof / ((1.0 - s2i) ** 2 * rad2)
        proj_u = np.einsum("ij,ij->i", diff[inside], du[inside])
        proj_v = np.einsum("ij,ij->i", diff[inside], dv[inside])
        du2[inside] += (coef * proj_u)[:, None] * dirs[b]
        dv2[inside] += (coef * proj_v)[:, None] * dirs[b]
    return du2, dv2


def orthonormalize_2frames(frames):
    """Gram-Schmidt on a batch of 2-frames, preserving order and span.

    frames: (N, n, 2).  Degenerate inputs are not detected here; callers
    gate on gram_values first.
    """
    q = np.empty_like(frames)
    a = frames[:, :, 0]
    b = frames[:, :, 1]
    na = np.sqrt(np.einsum("ij,ij->i", a, a))
    q0 = a / np.maximum(na, 1e-300)[:, None]
    w = b - np.einsum("ij,ij->i", b, q0)[:, None] * q0
    nw = np.sqrt(np.einsum("ij,ij->i", w, w))
    q[:, :, 0] = q0
    q[:, :, 1] = w / np.maximum(nw, 1e-300)[:, None]
    return q


def _eval2_frames(q, rows, cols, vals):
    out = np.zeros(q.shape[0])
    for r, c, v in zip(rows, cols, vals):
        out += v * (q[:, r, 0] * q[:, c, 1] - q[:, c, 0] * q[:, r, 1])
    return out


def ascent_2form(rows, cols, vals, n, starts, fd_step, tol, max_iter, step0, step_min):
    """Projected-ascent maximization of a 2-form over orthonormal 2-frames.

    Runs all restarts in lockstep (vectorized over the restart axis):
    central finite-difference gradient in the n*2 frame entries, a trial
    step of fixed length along the normalized gradient with
    re-orthonormalization, and step halving on non-improvement.

    Returns (values, frames): per-restart final value and frame.
    """
    nrest = starts.shape[0]
    q = orthonormalize_2frames(starts)
    f = _eval2_frames(q, rows, cols, vals)
    step = np.full(nrest, step0)
    active = np.ones(nrest, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        grad = np.empty((nrest, n, 2))
        for i in range(n):
            for j in range(2):
                qp = q.copy()
                qp[:, i, j] += fd_step
                fp = _eval2_frames(orthonormalize_2frames(qp), rows, cols, vals)
                qm = q.copy()
                qm[:, i, j] -= fd_step
                fm = _eval2_frames(orthonormalize_2frames(qm), rows, cols, vals)
                grad[:, i, j] = (fp - fm) / (2.0 * fd_step)
        gn = np.sqrt(np.einsum("ijk,ijk->i", grad, grad))
        stalled = gn < 1e-14
        direction = grad / np.maximum(gn, 1e-300)[:, None, None]
        qt = orthonormalize_2frames(q + step[:, None, None] * direction)
        ft = _eval2_frames(qt, rows, cols, vals)
        improved = active & ~stalled & (ft > f + tol)
        q[improved] = qt[improved]
        f[improved] = ft[improved]
        shrink = active & ~improved
        step[shrink] *= 0.5
        active &= ~stalled & (step >= step_min)
    return f, q
