# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the NumPy kernel fallback.

Same algorithms and per-node arithmetic as ``pyfallback``; plain C loops
with fixed accumulation order.  See the fallback module for the array
conventions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()


def eval2_values(double[:, :] du, double[:, :] dv,
                 long[::1] rows, long[::1] cols, double[::1] vals):
    cdef Py_ssize_t npts = du.shape[0]
    cdef Py_ssize_t nterms = rows.shape[0]
    out_arr = np.zeros(npts)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t p, t
    cdef long r, c
    cdef double v
    for t in range(nterms):
        r = rows[t]
        c = cols[t]
        v = vals[t]
        for p in range(npts):
            out[p] += v * (du[p, r] * dv[p, c] - du[p, c] * dv[p, r])
    return out_arr


def gram_values(double[:, :] du, double[:, :] dv):
    cdef Py_ssize_t npts = du.shape[0]
    cdef Py_ssize_t n = du.shape[1]
    out_arr = np.empty(npts)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t p, i
    cdef double g11, g22, g12, g
    for p in range(npts):
        g11 = 0.0
        g22 = 0.0
        g12 = 0.0
        for i in range(n):
            g11 += du[p, i] * du[p, i]
            g22 += dv[p, i] * dv[p, i]
            g12 += du[p, i] * dv[p, i]
        g = g11 * g22 - g12 * g12
        out[p] = g if g > 0.0 else 0.0
    return out_arr


def weighted_sum(double[:] w, double[:] vals):
    cdef Py_ssize_t npts = w.shape[0]
    cdef double acc = 0.0
    cdef Py_ssize_t p
    for p in range(npts):
        acc += w[p] * vals[p]
    return acc


def weighted_sqrt_sum(double[:] w, double[:] g):
    cdef Py_ssize_t npts = w.shape[0]
    cdef double acc = 0.0
    cdef Py_ssize_t p
    for p in range(npts):
        acc += w[p] * sqrt(g[p])
    return acc


def displacements(double[:, ::1] x, double[::1] t,
                  double[:, ::1] centers, double[::1] radii,
                  double[:, ::1] dirs, double[::1] amps):
    cdef Py_ssize_t npts = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t nb = radii.shape[0]
    disp_arr = np.zeros((npts, n))
    cdef double[:, ::1] disp = disp_arr
    cdef Py_ssize_t p, b, i
    cdef double r2, s2, prof, coef, rad2
    for b in range(nb):
        rad2 = radii[b] * radii[b]
        for p in range(npts):
            r2 = 0.0
            for i in range(n):
                r2 += (x[p, i] - centers[b, i]) * (x[p, i] - centers[b, i])
            s2 = r2 / rad2
            if s2 >= 1.0:
                continue
            prof = exp(1.0 - 1.0 / (1.0 - s2))
            coef = t[p] * amps[b] * prof
            for i in range(n):
                disp[p, i] += coef * dirs[b, i]
    return disp_arr


def pushed_frames(double[:, ::1] x, double[:, ::1] du, double[:, ::1] dv,
                  double[::1] t,
                  double[:, ::1] centers, double[::1] radii,
                  double[:, ::1] dirs, double[::1] amps):
    cdef Py_ssize_t npts = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t nb = radii.shape[0]
    du2_arr = np.array(du, copy=True)
    dv2_arr = np.array(dv, copy=True)
    cdef double[:, ::1] du2 = du2_arr
    cdef double[:, ::1] dv2 = dv2_arr
    cdef Py_ssize_t p, b, i
    cdef double r2, s2, prof, coef, one, pu, pv, rad2, diff
    for b in range(nb):
        rad2 = radii[b] * radii[b]
        for p in range(npts):
            r2 = 0.0
            pu = 0.0
            pv = 0.0
            for i in range(n):
                diff = x[p, i] - centers[b, i]
                r2 += diff * diff
                pu += diff * du[p, i]
                pv += diff * dv[p, i]
            s2 = r2 / rad2
            if s2 >= 1.0:
                continue
            prof = exp(1.0 - 1.0 / (1.0 - s2))
            one = 1.0 - s2
            coef = t[p] * amps[b] * (-2.0) * prof / (one * one * rad2)
            for i in range(n):
                du2[p, i] += coef * pu * dirs[b, i]
                dv2[p, i] += coef * pv * dirs[b, i]
    return du2_arr, dv2_arr


def orthonormalize_2frames(double[:, :, ::1] frames):
    cdef Py_ssize_t npts = frames.shape[0]
    cdef Py_ssize_t n = frames.shape[1]
    q_arr = np.empty((npts, n, 2))
    cdef double[:, :, ::1] q = q_arr
    _mgs(frames, q)
    return q_arr


cdef void _mgs(double[:, :, ::1] frames, double[:, :, ::1] q) noexcept nogil:
    cdef Py_ssize_t npts = frames.shape[0]
    cdef Py_ssize_t n = frames.shape[1]
    cdef Py_ssize_t p, i
    cdef double na, dot, nw
    for p in range(npts):
        na = 0.0
        for i in range(n):
            na += frames[p, i, 0] * frames[p, i, 0]
        na = sqrt(na)
        if na < 1e-300:
            na = 1e-300
        for i in range(n):
            q[p, i, 0] = frames[p, i, 0] / na
        dot = 0.0
        for i in range(n):
            dot += frames[p, i, 1] * q[p, i, 0]
        nw = 0.0
        for i in range(n):
            q[p, i, 1] = frames[p, i, 1] - dot * q[p, i, 0]
            nw += q[p, i, 1] * q[p, i, 1]
        nw = sqrt(nw)
        if nw < 1e-300:
            nw = 1e-300
        for i in range(n):
            q[p, i, 1] /= nw


cdef double _eval_frame(double[:, ::1] q_single,
                        long[::1] rows, long[::1] cols,
                        double[::1] vals) noexcept nogil:
    cdef Py_ssize_t nterms = rows.shape[0]
    cdef Py_ssize_t t
    cdef double acc = 0.0
    cdef long r, c
    for t in range(nterms):
        r = rows[t]
        c = cols[t]
        acc += vals[t] * (q_single[r, 0] * q_single[c, 1]
                          - q_single[c, 0] * q_single[r, 1])
    return acc


cdef void _orth_single(double[:, ::1] raw, double[:, ::1] q) noexcept nogil:
    cdef Py_ssize_t n = raw.shape[0]
    cdef Py_ssize_t i
    cdef double na = 0.0, dot = 0.0, nw = 0.0
    for i in range(n):
        na += raw[i, 0] * raw[i, 0]
    na = sqrt(na)
    if na < 1e-300:
        na = 1e-300
    for i in range(n):
        q[i, 0] = raw[i, 0] / na
    for i in range(n):
        dot += raw[i, 1] * q[i, 0]
    for i in range(n):
        q[i, 1] = raw[i, 1] - dot * q[i, 0]
        nw += q[i, 1] * q[i, 1]
    nw = sqrt(nw)
    if nw < 1e-300:
        nw = 1e-300
    for i in range(n):
        q[i, 1] /= nw


def ascent_2form(long[::1] rows, long[::1] cols, double[::1] vals,
                 Py_ssize_t n, double[:, :, ::1] starts,
                 double fd_step, double tol, int max_iter,
                 double step0, double step_min):
    """Per-restart projected ascent; same update rule as the fallback."""
    cdef Py_ssize_t nrest = starts.shape[0]
    values_arr = np.empty(nrest)
    frames_arr = np.empty((nrest, n, 2))
    cdef double[::1] values = values_arr
    cdef double[:, :, ::1] frames = frames_arr
    q_arr = np.empty((n, 2))
    qt_arr = np.empty((n, 2))
    probe_arr = np.empty((n, 2))
    scratch_arr = np.empty((n, 2))
    grad_arr = np.empty((n, 2))
    cdef double[:, ::1] q = q_arr
    cdef double[:, ::1] qt = qt_arr
    cdef double[:, ::1] probe = probe_arr
    cdef double[:, ::1] scratch = scratch_arr
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t r, i, j, it
    cdef double f, step, gn, fp, fm, ft
    for r in range(nrest):
        _orth_single(starts[r], q)
        f = _eval_frame(q, rows, cols, vals)
        step = step0
        for it in range(max_iter):
            gn = 0.0
            for i in range(n):
                for j in range(2):
                    for_copy(q, probe)
                    probe[i, j] += fd_step
                    _orth_single(probe, scratch)
                    fp = _eval_frame(scratch, rows, cols, vals)
                    for_copy(q, probe)
                    probe[i, j] -= fd_step
                    _orth_single(probe, scratch)
                    fm = _eval_frame(scratch, rows, cols, vals)
                    grad[i, j] = (fp - fm) / (2.0 * fd_step)
                    gn += grad[i, j] * grad[i, j]
            gn = sqrt(gn)
            if gn < 1e-14:
                break
            for i in range(n):
                for j in range(2):
                    probe[i, j] = q[i, j] + step * grad[i, j] / gn
            _orth_single(probe, qt)
            ft = _eval_frame(qt, rows, cols, vals)
            if ft > f + tol:
                for_copy(qt, q)
                f = ft
            else:
                step *= 0.5
                if step < step_min:
                    break
        values[r] = f
        for i in range(n):
            frames[r, i, 0] = q[i, 0]
            frames[r, i, 1] = q[i, 1]
    return values_arr, frames_arr


cdef void for_copy(double[:, ::1] src, double[:, ::1] dst) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(src.shape[0]):
        for j in range(2):
            dst[i, j] = src[i, j]
