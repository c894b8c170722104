"""Constant-coefficient exterior algebra on R^n.

Forms are sparse maps from strictly increasing multi-indices (1-based) to
real coefficients.  Constant coefficients make every form closed, which
is what lets a form of comass <= 1 act as a calibration.  The module
provides evaluation on k-frames, wedge products, linear combination with
coefficient pruning, pushforward along linear isometries, and a numerical
comass estimator with an exact spectral cross-check for 2-forms on R^4.

All values are immutable after construction and every operation is a pure
function, so they are safe to share across threads.  The comass estimate
reduces its restarts in fixed index order, keeping results deterministic
for a given seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ShapeError
from . import kernels

# Multi-indices are plain tuples of strictly increasing 1-based integers.
MultiIndex = tuple

COEFF_PRUNE_TOL = 1e-15
ORTHONORMAL_TOL = 1e-10
ISOMETRY_TOL = 1e-12

# Comass ascent parameters (finite-difference step, improvement tolerance,
# iteration cap per restart, initial/minimal step length).
COMASS_FD_STEP = 1e-6
COMASS_ASCENT_TOL = 1e-10
COMASS_MAX_ITER = 500
COMASS_STEP0 = 0.5
COMASS_STEP_MIN = 1e-9


def _check_multi_index(idx, n, k):
    if len(idx) != k:
        raise ShapeError(f"multi-index {idx} has length {len(idx)}, expected {k}")
    prev = 0
    for i in idx:
        if not isinstance(i, (int, np.integer)):
            raise ShapeError(f"multi-index {idx} has non-integer entry {i!r}")
        if i <= prev:
            raise ShapeError(f"multi-index {idx} is not strictly increasing")
        prev = int(i)
    if prev > n:
        raise ShapeError(f"multi-index {idx} exceeds ambient dimension {n}")


@dataclass(frozen=True, eq=False)
class ConstantForm:
    """A degree-k alternating form on R^n with constant coefficients.

    coeffs maps strictly increasing multi-indices to scalars; absent
    indices are zero.  Keys are stored sorted so iteration order (and
    hence accumulation order) is fixed.
    """

    n: int
    k: int
    coeffs: Mapping[MultiIndex, float]

    def __post_init__(self):
        if self.k < 0 or self.k > self.n:
            raise ShapeError(f"degree {self.k} invalid in dimension {self.n}")
        clean = {}
        for idx, c in self.coeffs.items():
            idx = tuple(int(i) for i in idx)
            _check_multi_index(idx, self.n, self.k)
            clean[idx] = float(c)
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def coefficient(self, *idx) -> float:
        if len(idx) == 1 and isinstance(idx[0], tuple):
            idx = idx[0]
        return self.coeffs.get(tuple(idx), 0.0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def key(self):
        """Hashable identity of the form (used for caching)."""
        return (self.n, self.k, tuple(self.coeffs.items()))

    def pair_arrays(self):
        """(rows, cols, vals) arrays, 0-based, for the degree-2 kernels."""
        if self.k != 2:
            raise ShapeError("pair_arrays requires a degree-2 form")
        rows = np.array([i - 1 for (i, _) in self.coeffs], dtype=np.int64)
        cols = np.array([j - 1 for (_, j) in self.coeffs], dtype=np.int64)
        vals = np.array(list(self.coeffs.values()), dtype=np.float64)
        return rows, cols, vals

    def skew_matrix(self) -> np.ndarray:
        """The n x n skew matrix A with A[i,j] = form(e_i, e_j), degree 2."""
        if self.k != 2:
            raise ShapeError("skew_matrix requires a degree-2 form")
        a = np.zeros((self.n, self.n))
        for (i, j), c in self.coeffs.items():
            a[i - 1, j - 1] = c
            a[j - 1, i - 1] = -c
        return a

    def __repr__(self):
        if not self.coeffs:
            return f"ConstantForm(n={self.n}, k={self.k}, 0)"
        terms = " + ".join(
            f"{c:g}*dx{''.join(map(str, idx))}" for idx, c in self.coeffs.items()
        )
        return f"ConstantForm(n={self.n}, k={self.k}, {terms})"


def zero_form(n, k) -> ConstantForm:
    return ConstantForm(n, k, {})


def dx(n, *indices) -> ConstantForm:
    """Basis form dx_{i1...ik} on R^n; unsorted indices contribute a sign."""
    idx = list(indices)
    sign = 1.0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] == idx[b]:
                return zero_form(n, len(idx))
            if idx[a] > idx[b]:
                idx[a], idx[b] = idx[b], idx[a]
                sign = -sign
    return ConstantForm(n, len(indices), {tuple(idx): sign})


@dataclass(frozen=True, eq=False)
class KFrame:
    """An ordered list of k vectors in R^n (rows of ``vectors``)."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        object.__setattr__(self, "vectors", v)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        """n x k matrix whose columns are the frame vectors."""
        return self.vectors.T

    def swapped(self, a, b) -> "KFrame":
        v = self.vectors.copy()
        v[[a, b]] = v[[b, a]]
        return KFrame(v)


def frame(*vectors) -> KFrame:
    return KFrame(np.array(vectors, dtype=float))


def _is_orthonormal(mat, tol):
    k = mat.shape[1]
    return np.max(np.abs(mat.T @ mat - np.eye(k))) <= tol


@dataclass(frozen=True, eq=False)
class LinearIsometry:
    """An n x n real matrix R with R^T R = I (within 1e-12)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"isometry matrix must be square, got {m.shape}")
        if not _is_orthonormal(m, ISOMETRY_TOL):
            raise ShapeError("matrix is not orthogonal within 1e-12")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> "LinearIsometry":
        return LinearIsometry(self.matrix.T)

    def compose(self, other: "LinearIsometry") -> "LinearIsometry":
        """self after other: (self.compose(other))(x) = self(other(x))."""
        return LinearIsometry(self.matrix @ other.matrix)

    def apply(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)


def _minor_det(mat, idx):
    sub = mat[[i - 1 for i in idx], :]
    k = len(idx)
    if k == 1:
        return sub[0, 0]
    if k == 2:
        return sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
    return float(np.linalg.det(sub))


def evaluate(form: ConstantForm, fr: KFrame) -> float:
    """Evaluate form(v_1, ..., v_k): sum of coeff * k x k frame minors."""
    if fr.k != form.k:
        raise ShapeError(f"frame has {fr.k} vectors, form degree is {form.k}")
    if fr.n != form.n:
        raise ShapeError(f"frame dimension {fr.n} != form dimension {form.n}")
    mat = fr.matrix
    total = 0.0
    for idx, c in form.coeffs.items():
        total += c * _minor_det(mat, idx)
    return total


def _merge_sign(idx_a, idx_b):
    """Sign of sorting the concatenation of two disjoint increasing tuples."""
    inversions = 0
    for b in idx_b:
        inversions += sum(1 for a in idx_a if a > b)
    return -1.0 if inversions % 2 else 1.0


def wedge(form_a: ConstantForm, form_b: ConstantForm) -> ConstantForm:
    """Wedge product; coefficients carry the shuffle sign."""
    if form_a.n != form_b.n:
        raise ShapeError("wedge operands live in different dimensions")
    k = form_a.k + form_b.k
    if k > form_a.n:
        raise ShapeError(f"wedge degree {k} exceeds dimension {form_a.n}")
    out: dict = {}
    for ia, ca in form_a.coeffs.items():
        sa = set(ia)
        for ib, cb in form_b.coeffs.items():
            if sa & set(ib):
                continue
            merged = tuple(sorted(ia + ib))
            out[merged] = out.get(merged, 0.0) + ca * cb * _merge_sign(ia, ib)
    out = {idx: c for idx, c in out.items() if c != 0.0}
    return ConstantForm(form_a.n, k, out)


def linear_combine(terms: Sequence[tuple[float, ConstantForm]]) -> ConstantForm:
    """Coefficient-wise combination; entries below 1e-15 magnitude pruned.

    The pruning makes an exactly vanishing sum representable as the zero
    form, so "the calibrations cancel" is a crisp emptiness test.
    """
    if not terms:
        raise ShapeError("linear_combine needs at least one term")
    n, k = terms[0][1].n, terms[0][1].k
    acc: dict = {}
    for scale, f in terms:
        if (f.n, f.k) != (n, k):
            raise ShapeError("linear_combine operands disagree in (n, k)")
        for idx, c in f.coeffs.items():
            acc[idx] = acc.get(idx, 0.0) + float(scale) * c
    acc = {idx: c for idx, c in acc.items() if abs(c) >= COEFF_PRUNE_TOL}
    return ConstantForm(n, k, acc)


def scale(c: float, form: ConstantForm) -> ConstantForm:
    return linear_combine([(c, form)])


def pushforward_isometry(form: ConstantForm, iso: LinearIsometry) -> ConstantForm:
    """The unique constant form with (R#w)(v_1..v_k) = w(R^-1 v_1..R^-1 v_k).

    Computed by evaluating the right-hand side on every increasing basis
    frame; R^-1 e_j is row j of R.
    """
    if iso.n != form.n:
        raise ShapeError("isometry dimension does not match form")
    rt = iso.matrix  # columns of rt.T are R^-1 e_j
    out = {}
    for idx in itertools.combinations(range(1, form.n + 1), form.k):
        cols = np.stack([rt[j - 1, :] for j in idx], axis=1)
        c = 0.0
        for sidx, sc in form.coeffs.items():
            c += sc * _minor_det(cols, sidx)
        if abs(c) >= COEFF_PRUNE_TOL:
            out[idx] = c
    return ConstantForm(form.n, form.k, out)


def plane_dual_form(fr: KFrame) -> ConstantForm:
    """Wedge of the metric duals of an orthonormal frame.

    The result evaluates to +1 on the frame itself: it is the constant
    calibration of the oriented plane the frame spans.
    """
    if not _is_orthonormal(fr.matrix, ORTHONORMAL_TOL):
        raise ShapeError("plane_dual_form requires an orthonormal frame (1e-10)")
    n = fr.n
    result = None
    for row in fr.vectors:
        one = ConstantForm(n, 1, {(i + 1,): row[i] for i in range(n) if row[i] != 0.0})
        result = one if result is None else wedge(result, one)
    if result is None:
        raise ShapeError("empty frame")
    return result


def comass_2form_r4_oracle(form: ConstantForm) -> float:
    """Exact comass of a 2-form on R^4 via the skew coefficient matrix.

    The eigenvalues of the skew matrix come in pairs +-i*l1, +-i*l2; the
    comass equals max(l1, l2), i.e. the largest eigenvalue magnitude
    (equivalently the largest singular value).
    """
    if form.n != 4 or form.k != 2:
        raise ShapeError("spectral oracle applies to 2-forms on R^4 only")
    sv = np.linalg.svd(form.skew_matrix(), compute_uv=False)
    return float(sv[0])


def _orthonormalize_general(mat):
    """Column-wise modified Gram-Schmidt for an n x k matrix."""
    q = mat.copy()
    k = q.shape[1]
    for j in range(k):
        for i in range(j):
            q[:, j] -= np.dot(q[:, i], q[:, j]) * q[:, i]
        norm = np.linalg.norm(q[:, j])
        q[:, j] /= max(norm, 1e-300)
    return q


def _ascent_general(form, start):
    """Single-restart projected ascent for arbitrary degree k."""
    n, k = form.n, form.k

    def value(mat):
        total = 0.0
        for idx, c in form.coeffs.items():
            total += c * _minor_det(mat, idx)
        return total

    q = _orthonormalize_general(start)
    f = value(q)
    step = COMASS_STEP0
    for _ in range(COMASS_MAX_ITER):
        grad = np.empty((n, k))
        for i in range(n):
            for j in range(k):
                qp = q.copy()
                qp[i, j] += COMASS_FD_STEP
                qm = q.copy()
                qm[i, j] -= COMASS_FD_STEP
                fp = value(_orthonormalize_general(qp))
                fm = value(_orthonormalize_general(qm))
                grad[i, j] = (fp - fm) / (2.0 * COMASS_FD_STEP)
        gn = np.linalg.norm(grad)
        if gn < 1e-14:
            break
        qt = _orthonormalize_general(q + step * grad / gn)
        ft = value(qt)
        if ft > f + COMASS_ASCENT_TOL:
            q, f = qt, ft
        else:
            step *= 0.5
            if step < COMASS_STEP_MIN:
                break
    return f


def comass(form: ConstantForm, restarts: int = 64, seed: int = 0) -> float:
    """Numerical comass: sup of the form over simple unit k-vectors.

    Multi-start projected ascent on orthonormal k-frames (finite-difference
    gradient, re-orthonormalization after every step, step halving on
    non-improvement).  The returned value is a certified lower bound on the
    true comass and in practice a sharp estimate of it; the restart
    reduction scans results in fixed index order, so the output is
    deterministic for a given seed.
    """
    if not 1 <= form.k < form.n:
        raise ShapeError(f"comass requires 1 <= k < n, got k={form.k}, n={form.n}")
    if restarts < 1:
        raise ShapeError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((restarts, form.n, form.k))
    if form.k == 2:
        rows, cols, vals = form.pair_arrays()
        values, _ = kernels.ascent_2form(
            rows,
            cols,
            vals,
            form.n,
            starts,
            COMASS_FD_STEP,
            COMASS_ASCENT_TOL,
            COMASS_MAX_ITER,
            COMASS_STEP0,
            COMASS_STEP_MIN,
        )
    else:
        values = [_ascent_general(form, starts[r]) for r in range(restarts)]
    best = values[0]
    for v in values[1:]:
        if v > best:
            best = v
    return float(best)


def sampled_comass_lower_bound(
    form: ConstantForm, samples: int, seed: int = 0, chunk: int = 200_000
) -> float:
    """Max of the form over random orthonormal k-frames (independent oracle).

    Deliberately avoids the kernel evaluation path: degree-2 forms are
    evaluated through the skew coefficient matrix and frames come from
    batched QR, so this bound exercises none of the ascent machinery.
    """
    if not 1 <= form.k < form.n:
        raise ShapeError("sampling requires 1 <= k < n")
    rng = np.random.default_rng(seed)
    best = -math.inf
    remaining = samples
    skew = form.skew_matrix() if form.k == 2 else None
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        g = rng.standard_normal((m, form.n, form.k))
        q, _ = np.linalg.qr(g)
        if skew is not None:
            vals = np.einsum("pi,ij,pj->p", q[:, :, 0], skew, q[:, :, 1])
        else:
            vals = np.zeros(m)
            for idx, c in form.coeffs.items():
                sel = [i - 1 for i in idx]
                vals += c * np.linalg.det(q[:, sel, :])
        vmax = float(np.max(np.abs(vals)))
        if vmax > best:
            best = vmax
    return best
