"""Oriented parametrized 2-faces in R^n with quadrature and edge geometry.

Patches come from a small analytic catalog (flat affine patches, the
holomorphic z = w^2 patch, and any catalog patch composed with a linear
isometry plus translation), each with exact derivatives; parameter
domains are rectangles, quarter-disks, or convex polygons.  On top of
those the module computes face areas and form fluxes by tensor
Gauss-Legendre quadrature, pointwise calibration residuals, boundary
correspondences between edge curves and parameter-domain boundary
segments, and induced edge-orientation signs in the outward-conormal-
first convention.

Everything here is a pure function over immutable values; quadrature
sums are accumulated in fixed node order for deterministic output.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize

from .errors import DegeneracyError, ShapeError
from .exterior import ConstantForm, KFrame, LinearIsometry
from . import kernels

DEGENERACY_TOL = 1e-14
EDGE_MEMBERSHIP_TOL = 1e-9
DEFAULT_QUAD_ORDER = 32


# ---------------------------------------------------------------------------
# Parameter domains


@dataclass(frozen=True)
class RectangleDomain:
    """[u_min, u_max] x [v_min, v_max]."""

    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.u_max > self.u_min and self.v_max > self.v_min):
            raise ShapeError("rectangle domain must have positive measure")


@dataclass(frozen=True)
class QuarterDiskDomain:
    """{(u, v): u >= 0, v >= 0, u^2 + v^2 <= radius^2}."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ShapeError("quarter-disk radius must be positive")


@dataclass(frozen=True)
class PolygonDomain:
    """Convex polygon with counterclockwise vertices."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ShapeError("polygon needs at least 3 vertices")
        area2 = 0.0
        m = len(verts)
        for i in range(m):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % m]
            area2 += x0 * y1 - x1 * y0
        if area2 <= 0:
            raise ShapeError("polygon vertices must be counterclockwise")
        for i in range(m):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % m]
            cx, cy = verts[(i + 2) % m]
            if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) < -1e-12:
                raise ShapeError("polygon must be convex")
        object.__setattr__(self, "vertices", verts)


Domain = object  # RectangleDomain | QuarterDiskDomain | PolygonDomain


@functools.lru_cache(maxsize=None)
def _gauss_01(order):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@functools.lru_cache(maxsize=256)
def domain_quadrature(domain, order):
    """Quadrature nodes (U, V) and weights W integrating over the domain.

    Rectangles use a tensor rule; quarter-disks a polar tensor rule with
    the radial Jacobian; polygons a fan triangulation with a per-triangle
    tensor rule (the collapsed-square map has Jacobian linear in one
    variable, so smooth integrands converge at the usual rate).
    """
    if order < 2:
        raise ShapeError("quadrature order must be >= 2")
    x, w = _gauss_01(order)
    if isinstance(domain, RectangleDomain):
        us = domain.u_min + (domain.u_max - domain.u_min) * x
        vs = domain.v_min + (domain.v_max - domain.v_min) * x
        scale = (domain.u_max - domain.u_min) * (domain.v_max - domain.v_min)
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        ww = scale * np.outer(w, w)
        return uu.ravel(), vv.ravel(), ww.ravel()
    if isinstance(domain, QuarterDiskDomain):
        rho = domain.radius * x
        theta = 0.5 * math.pi * x
        rr, tt = np.meshgrid(rho, theta, indexing="ij")
        uu = rr * np.cos(tt)
        vv = rr * np.sin(tt)
        ww = domain.radius * 0.5 * math.pi * np.outer(w, w) * rr
        return uu.ravel(), vv.ravel(), ww.ravel()
    if isinstance(domain, PolygonDomain):
        verts = np.asarray(domain.vertices)
        us, vs, ws = [], [], []
        a = verts[0]
        # fixed node order: fan-triangle index outer, then tensor order;
        # (s, t) in [0,1]^2 -> a + s(b - a) + s t (c - b) has |J| = s * 2 Area
        for i in range(1, len(verts) - 1):
            b, c = verts[i], verts[i + 1]
            ss, tt = np.meshgrid(x, x, indexing="ij")
            pts = a + ss[..., None] * (b - a) + (ss * tt)[..., None] * (c - b)
            jac = ss * abs(
                (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            )
            us.append(pts[..., 0].ravel())
            vs.append(pts[..., 1].ravel())
            ws.append((np.outer(w, w) * jac).ravel())
        return np.concatenate(us), np.concatenate(vs), np.concatenate(ws)
    raise ShapeError(f"unknown domain type {type(domain).__name__}")


def domain_contains(domain, u, v, tol=1e-12):
    if isinstance(domain, RectangleDomain):
        return (
            domain.u_min - tol <= u <= domain.u_max + tol
            and domain.v_min - tol <= v <= domain.v_max + tol
        )
    if isinstance(domain, QuarterDiskDomain):
        return u >= -tol and v >= -tol and u * u + v * v <= domain.radius**2 + tol
    if isinstance(domain, PolygonDomain):
        verts = domain.vertices
        m = len(verts)
        for i in range(m):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % m]
            if (bx - ax) * (v - ay) - (by - ay) * (u - ax) < -tol:
                return False
        return True
    raise ShapeError(f"unknown domain type {type(domain).__name__}")


@dataclass(frozen=True, eq=False)
class BoundarySegment:
    """One smooth piece of a parameter-domain boundary.

    ``point``/``velocity`` parametrize the piece over [0, 1] following the
    counterclockwise orientation of the domain; ``outward`` is the outward
    unit normal in parameter space.  ``straight`` marks affine pieces (all
    but the quarter-disk arc), which admit closed-form projections under
    affine patch maps.
    """

    name: str
    point: Callable[[float], tuple]
    velocity: Callable[[float], tuple]
    outward: Callable[[float], tuple]
    straight: bool = False


def _segment(name, p0, p1, outward):
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    return BoundarySegment(
        name,
        point=lambda s: tuple(p0 + s * d),
        velocity=lambda s: tuple(d),
        outward=lambda s: outward,
        straight=True,
    )


def domain_boundary_segments(domain):
    """Boundary pieces in counterclockwise order."""
    if isinstance(domain, RectangleDomain):
        a, b, c, d = domain.u_min, domain.u_max, domain.v_min, domain.v_max
        return (
            _segment("v=min", (a, c), (b, c), (0.0, -1.0)),
            _segment("u=max", (b, c), (b, d), (1.0, 0.0)),
            _segment("v=max", (b, d), (a, d), (0.0, 1.0)),
            _segment("u=min", (a, d), (a, c), (-1.0, 0.0)),
        )
    if isinstance(domain, QuarterDiskDomain):
        r = domain.radius
        half_pi = 0.5 * math.pi

        def arc_point(s):
            return (r * math.cos(half_pi * s), r * math.sin(half_pi * s))

        def arc_velocity(s):
            return (
                -r * half_pi * math.sin(half_pi * s),
                r * half_pi * math.cos(half_pi * s),
            )

        def arc_outward(s):
            return (math.cos(half_pi * s), math.sin(half_pi * s))

        return (
            _segment("v=0", (0.0, 0.0), (r, 0.0), (0.0, -1.0)),
            BoundarySegment("arc", arc_point, arc_velocity, arc_outward),
            _segment("u=0", (0.0, r), (0.0, 0.0), (-1.0, 0.0)),
        )
    if isinstance(domain, PolygonDomain):
        verts = domain.vertices
        m = len(verts)
        segs = []
        for i in range(m):
            p0 = np.asarray(verts[i])
            p1 = np.asarray(verts[(i + 1) % m])
            d = p1 - p0
            length = math.hypot(*d)
            outward = (d[1] / length, -d[0] / length)
            segs.append(_segment(f"side{i}", p0, p1, outward))
        return tuple(segs)
    raise ShapeError(f"unknown domain type {type(domain).__name__}")


def domain_sample_interior(domain, rng, count):
    """Uniform-ish interior samples; returns (U, V) arrays."""
    if isinstance(domain, RectangleDomain):
        u = rng.uniform(domain.u_min, domain.u_max, count)
        v = rng.uniform(domain.v_min, domain.v_max, count)
        return u, v
    if isinstance(domain, QuarterDiskDomain):
        rho = domain.radius * np.sqrt(rng.uniform(0.0, 1.0, count))
        theta = rng.uniform(0.0, 0.5 * math.pi, count)
        return rho * np.cos(theta), rho * np.sin(theta)
    if isinstance(domain, PolygonDomain):
        verts = np.asarray(domain.vertices)
        a = verts[0]
        tris = [(a, verts[i], verts[i + 1]) for i in range(1, len(verts) - 1)]
        areas = np.array(
            [
                0.5
                * abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
                for a, b, c in tris
            ]
        )
        pick = rng.choice(len(tris), size=count, p=areas / areas.sum())
        r1 = np.sqrt(rng.uniform(0.0, 1.0, count))
        r2 = rng.uniform(0.0, 1.0, count)
        us = np.empty(count)
        vs = np.empty(count)
        for i, (ta, tb, tc) in enumerate(tris):
            sel = pick == i
            p = (
                (1 - r1[sel])[:, None] * ta
                + (r1[sel] * (1 - r2[sel]))[:, None] * tb
                + (r1[sel] * r2[sel])[:, None] * tc
            )
            us[sel] = p[:, 0]
            vs[sel] = p[:, 1]
        return us, vs
    raise ShapeError(f"unknown domain type {type(domain).__name__}")


def domain_grid(domain, res):
    """res x res parameter grid covering the domain (for mesh export)."""
    if res < 2:
        raise ShapeError("grid resolution must be >= 2")
    t = np.linspace(0.0, 1.0, res)
    if isinstance(domain, RectangleDomain):
        us = domain.u_min + (domain.u_max - domain.u_min) * t
        vs = domain.v_min + (domain.v_max - domain.v_min) * t
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        return uu, vv
    if isinstance(domain, QuarterDiskDomain):
        rr, tt = np.meshgrid(domain.radius * t, 0.5 * math.pi * t, indexing="ij")
        return rr * np.cos(tt), rr * np.sin(tt)
    if isinstance(domain, PolygonDomain):
        # radial blend: centroid out to the arclength-parametrized boundary
        verts = np.asarray(domain.vertices)
        centroid = verts.mean(axis=0)
        lengths = np.array(
            [
                np.linalg.norm(verts[(i + 1) % len(verts)] - verts[i])
                for i in range(len(verts))
            ]
        )
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        total = cum[-1]
        bpts = np.empty((res, 2))
        for j, tj in enumerate(t):
            s = min(tj * total, total - 1e-15)
            i = int(np.searchsorted(cum, s, side="right") - 1)
            local = (s - cum[i]) / lengths[i]
            bpts[j] = verts[i] + local * (verts[(i + 1) % len(verts)] - verts[i])
        uu = np.empty((res, res))
        vv = np.empty((res, res))
        for i, ri in enumerate(t):
            p = centroid + ri * (bpts - centroid)
            uu[i] = p[:, 0]
            vv[i] = p[:, 1]
        return uu, vv
    raise ShapeError(f"unknown domain type {type(domain).__name__}")


# ---------------------------------------------------------------------------
# Patch maps (analytic catalog)


class FlatMap:
    """Affine patch (u, v) -> origin + u * span_u + v * span_v."""

    is_affine = True

    def __init__(self, origin, span_u, span_v):
        self.origin = np.asarray(origin, dtype=float)
        self.span_u = np.asarray(span_u, dtype=float)
        self.span_v = np.asarray(span_v, dtype=float)
        if not (self.origin.shape == self.span_u.shape == self.span_v.shape):
            raise ShapeError("flat map vectors disagree in dimension")
        self.n = self.origin.shape[0]
        self.catalog_id = "flat"

    def chart(self, u, v):
        x = self.origin + u * self.span_u + v * self.span_v
        return x, self.span_u.copy(), self.span_v.copy()

    def chart_batch(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        x = self.origin + np.outer(u, self.span_u) + np.outer(v, self.span_v)
        du = np.broadcast_to(self.span_u, x.shape).copy()
        dv = np.broadcast_to(self.span_v, x.shape).copy()
        return x, du, dv


class HolomorphicMap:
    """The complex curve z = w^2 in R^4: (u, v) -> (u, u^2 - v^2, v, 2uv)."""

    n = 4
    catalog_id = "holomorphic"
    is_affine = False

    def chart(self, u, v):
        x = np.array([u, u * u - v * v, v, 2.0 * u * v])
        du = np.array([1.0, 2.0 * u, 0.0, 2.0 * v])
        dv = np.array([0.0, -2.0 * v, 1.0, 2.0 * u])
        return x, du, dv

    def chart_batch(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        zero = np.zeros_like(u)
        one = np.ones_like(u)
        x = np.stack([u, u * u - v * v, v, 2.0 * u * v], axis=1)
        du = np.stack([one, 2.0 * u, zero, 2.0 * v], axis=1)
        dv = np.stack([zero, -2.0 * v, one, 2.0 * u], axis=1)
        return x, du, dv


class TransformedMap:
    """A catalog map composed with a linear isometry and a translation."""

    def __init__(self, base, isometry: LinearIsometry, shift=None):
        self.base = base
        self.isometry = isometry
        self.shift = (
            np.zeros(isometry.n) if shift is None else np.asarray(shift, dtype=float)
        )
        if isometry.n != base.n or self.shift.shape[0] != base.n:
            raise ShapeError("transform dimension does not match base map")
        self.n = base.n
        self.catalog_id = f"moved({base.catalog_id})"
        self.is_affine = base.is_affine

    def chart(self, u, v):
        x, du, dv = self.base.chart(u, v)
        m = self.isometry.matrix
        return m @ x + self.shift, m @ du, m @ dv

    def chart_batch(self, u, v):
        x, du, dv = self.base.chart_batch(u, v)
        mt = self.isometry.matrix.T
        return x @ mt + self.shift, du @ mt, dv @ mt


@dataclass(frozen=True, eq=False)
class Patch:
    """A catalog map restricted to a parameter domain."""

    map: object
    domain: object

    @property
    def n(self) -> int:
        return self.map.n

    @property
    def catalog_id(self) -> str:
        return self.map.catalog_id


@dataclass(frozen=True, eq=False)
class Face:
    """An oriented patch with an assigned degree-2 calibration."""

    patch: Patch
    orientation: int
    calibration: ConstantForm
    name: str

    def __post_init__(self):
        if self.orientation not in (+1, -1):
            raise ShapeError("orientation must be +1 or -1")
        if self.calibration.k != 2 or self.calibration.n != self.patch.n:
            raise ShapeError(
                f"face {self.name!r}: calibration degree/dimension mismatch"
            )

    @property
    def n(self) -> int:
        return self.patch.n


# ---------------------------------------------------------------------------
# Edge curves


class PolynomialCurve:
    """s -> sum_d coeffs[d] * s^d on [0, 1]; covers segments and parabolas."""

    def __init__(self, coeffs, name=""):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        self.name = name
        self.n = self.coeffs.shape[1]

    def point(self, s):
        powers = s ** np.arange(self.coeffs.shape[0])
        return powers @ self.coeffs

    def velocity(self, s):
        deg = self.coeffs.shape[0]
        if deg == 1:
            return np.zeros(self.n)
        powers = np.arange(1, deg) * s ** np.arange(0, deg - 1)
        return powers @ self.coeffs[1:]

    def points(self, s):
        s = np.asarray(s, dtype=float)
        powers = s[:, None] ** np.arange(self.coeffs.shape[0])
        return powers @ self.coeffs

    def velocities(self, s):
        s = np.asarray(s, dtype=float)
        deg = self.coeffs.shape[0]
        if deg == 1:
            return np.zeros((len(s), self.n))
        powers = np.arange(1, deg) * s[:, None] ** np.arange(0, deg - 1)
        return powers @ self.coeffs[1:]

    def transformed(self, isometry: LinearIsometry, shift=None, name=""):
        coeffs = self.coeffs @ isometry.matrix.T
        if shift is not None:
            coeffs = coeffs.copy()
            coeffs[0] += np.asarray(shift, dtype=float)
        return PolynomialCurve(coeffs, name or self.name)


class ArcCurve:
    """s -> center + r cos(a0 + s da) e0 + r sin(a0 + s da) e1 on [0, 1]."""

    def __init__(self, center, axis0, axis1, radius, angle0, angle1, name=""):
        self.center = np.asarray(center, dtype=float)
        self.axis0 = np.asarray(axis0, dtype=float)
        self.axis1 = np.asarray(axis1, dtype=float)
        self.radius = float(radius)
        self.angle0 = float(angle0)
        self.angle1 = float(angle1)
        self.name = name
        self.n = self.center.shape[0]

    def _angle(self, s):
        return self.angle0 + s * (self.angle1 - self.angle0)

    def point(self, s):
        a = self._angle(s)
        return self.center + self.radius * (
            math.cos(a) * self.axis0 + math.sin(a) * self.axis1
        )

    def velocity(self, s):
        a = self._angle(s)
        da = self.angle1 - self.angle0
        return self.radius * da * (-math.sin(a) * self.axis0 + math.cos(a) * self.axis1)

    def points(self, s):
        s = np.asarray(s, dtype=float)
        a = self.angle0 + s * (self.angle1 - self.angle0)
        return self.center + self.radius * (
            np.outer(np.cos(a), self.axis0) + np.outer(np.sin(a), self.axis1)
        )

    def velocities(self, s):
        s = np.asarray(s, dtype=float)
        a = self.angle0 + s * (self.angle1 - self.angle0)
        da = self.angle1 - self.angle0
        return self.radius * da * (
            np.outer(-np.sin(a), self.axis0) + np.outer(np.cos(a), self.axis1)
        )


EdgeCurve = object  # PolynomialCurve | ArcCurve


def segment_curve(p0, p1, name="") -> PolynomialCurve:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return PolynomialCurve(np.stack([p0, p1 - p0]), name)


def edge_is_regular(edge, samples=64, tol=1e-9):
    s = np.linspace(0.0, 1.0, samples)
    vel = edge.velocities(s)
    return float(np.min(np.linalg.norm(vel, axis=1))) > tol


# ---------------------------------------------------------------------------
# Pointwise frames, area, flux


@functools.lru_cache(maxsize=256)
def _face_quad_arrays(face, order):
    """(X, DU, DV, W) on the face's quadrature nodes (cached per face)."""
    u, v, w = domain_quadrature(face.patch.domain, order)
    x, du, dv = face.patch.map.chart_batch(u, v)
    return (
        np.ascontiguousarray(x),
        np.ascontiguousarray(du),
        np.ascontiguousarray(dv),
        np.ascontiguousarray(w),
    )


def tangent_frame(face: Face, u: float, v: float):
    """Point and ordered tangent frame (d_u, d_v); order flips with orientation."""
    if not domain_contains(face.patch.domain, u, v):
        raise ShapeError(f"parameter ({u}, {v}) outside domain of {face.name!r}")
    x, du, dv = face.patch.map.chart(u, v)
    if face.orientation == -1:
        du, dv = dv, du
    return x, KFrame(np.stack([du, dv]))


def area_element(face: Face, u: float, v: float) -> float:
    """Gram-determinant area density sqrt(|du|^2 |dv|^2 - (du.dv)^2)."""
    _, fr = tangent_frame(face, u, v)
    du, dv = fr.vectors
    g = np.dot(du, du) * np.dot(dv, dv) - np.dot(du, dv) ** 2
    val = math.sqrt(max(g, 0.0))
    if val < DEGENERACY_TOL:
        raise DegeneracyError(
            f"degenerate tangent frame on {face.name!r} at ({u}, {v})"
        )
    return val


def _checked_gram(face, du, dv):
    g = kernels.gram_values(du, dv)
    if g.size and float(np.min(g)) < DEGENERACY_TOL**2:
        raise DegeneracyError(f"degenerate tangent frame on face {face.name!r}")
    return g


def face_area(face: Face, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """Area of the face by Gauss-Legendre quadrature of the Gram density."""
    _, du, dv, w = _face_quad_arrays(face, quad_order)
    g = _checked_gram(face, du, dv)
    return kernels.weighted_sqrt_sum(w, g)


def flux(face: Face, form: ConstantForm, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """Integral of the 2-form over the oriented face."""
    if form.k != 2 or form.n != face.n:
        raise ShapeError("flux needs a degree-2 form matching the face dimension")
    _, du, dv, w = _face_quad_arrays(face, quad_order)
    rows, cols, vals = form.pair_arrays()
    values = kernels.eval2_values(du, dv, rows, cols, vals)
    return face.orientation * kernels.weighted_sum(w, values)


def oriented_unit_frames(face, du, dv):
    """Orthonormalized oriented tangent 2-frames for batches of derivatives."""
    if face.orientation == -1:
        du, dv = dv, du
    frames = np.stack([du, dv], axis=2)
    return kernels.orthonormalize_2frames(frames)


def calibration_residual(
    face: Face, form: ConstantForm, samples: int = 1000, seed: int = 0
) -> float:
    """Max over sampled interior points of |form(unit tangent frame) - 1|.

    The frame is orthonormalized preserving orientation before evaluation,
    so the value is exactly the pointwise calibration defect.
    """
    if samples < 1:
        raise ShapeError("samples must be >= 1")
    if form.k != 2 or form.n != face.n:
        raise ShapeError("calibration residual needs a matching degree-2 form")
    rng = np.random.default_rng(seed)
    u, v = domain_sample_interior(face.patch.domain, rng, samples)
    _, du, dv = face.patch.map.chart_batch(u, v)
    _checked_gram(face, du, dv)
    q = oriented_unit_frames(face, du, dv)
    rows, cols, vals = form.pair_arrays()
    values = kernels.eval2_values(q[:, :, 0], q[:, :, 1], rows, cols, vals)
    return float(np.max(np.abs(values - 1.0)))


# ---------------------------------------------------------------------------
# Edge-on-boundary correspondence and induced orientation signs


@dataclass(frozen=True)
class BoundaryCorrespondence:
    """Monotone match between an edge curve and one boundary segment."""

    segment: str
    edge_params: tuple
    segment_params: tuple
    direction: int
    max_distance: float


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(objective, lo, hi, iters=90, width=1e-13):
    """Golden-section minimization (plain scalar minimizers bottom out at
    sqrt(eps) relative accuracy, too coarse for 1e-9 membership tests)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = objective(d)
        if b - a < width:
            break
    t = c if fc < fd else d
    return t, min(fc, fd)


def _project_to_segment(face, seg, target, coarse=None):
    """min over t of |patch(seg(t)) - target|; returns (t, distance)."""
    if seg.straight and face.patch.map.is_affine:
        # affine image of a straight segment: exact least-squares projection
        u0, v0 = seg.point(0.0)
        u1, v1 = seg.point(1.0)
        x0, _, _ = face.patch.map.chart(u0, v0)
        x1, _, _ = face.patch.map.chart(u1, v1)
        d = x1 - x0
        denom = float(np.dot(d, d))
        t = 0.0 if denom == 0.0 else float(np.dot(target - x0, d) / denom)
        t = min(max(t, 0.0), 1.0)
        diff = x0 + t * d - target
        return t, math.sqrt(float(np.dot(diff, diff)))
    if coarse is None:
        coarse = np.linspace(0.0, 1.0, 65)
    pts = np.array([seg.point(t) for t in coarse])
    x, _, _ = face.patch.map.chart_batch(pts[:, 0], pts[:, 1])
    d2 = np.einsum("ij,ij->i", x - target, x - target)
    i = int(np.argmin(d2))
    lo = coarse[max(i - 1, 0)]
    hi = coarse[min(i + 1, len(coarse) - 1)]

    def objective(t):
        u, v = seg.point(t)
        x, _, _ = face.patch.map.chart(u, v)
        diff = x - target
        return float(np.dot(diff, diff))

    t, ft = _golden_min(objective, lo, hi)
    best = min((objective(lo), lo), (objective(hi), hi), (ft, t))
    return best[1], math.sqrt(max(best[0], 0.0))


def boundary_contains(
    face: Face,
    edge,
    tol: float = EDGE_MEMBERSHIP_TOL,
    samples: int = 16,
) -> Optional[BoundaryCorrespondence]:
    """Match an edge curve against the image of the domain boundary.

    Samples the edge and projects each sample onto each boundary segment;
    succeeds when one segment matches every sample within tol with a
    strictly monotone parameter correspondence.  Returns None otherwise.
    """
    if tol <= 0:
        raise ShapeError("tolerance must be positive")
    svals = np.linspace(0.0, 1.0, samples)
    targets = edge.points(svals)
    best = None
    for seg in domain_boundary_segments(face.patch.domain):
        tparams = []
        worst = 0.0
        ok = True
        for s, target in zip(svals, targets):
            t, dist = _project_to_segment(face, seg, target)
            if dist > tol:
                ok = False
                break
            tparams.append(t)
            worst = max(worst, dist)
        if not ok:
            continue
        diffs = np.diff(tparams)
        if np.all(diffs > 0):
            direction = +1
        elif np.all(diffs < 0):
            direction = -1
        else:
            continue
        cand = BoundaryCorrespondence(
            seg.name, tuple(map(float, svals)), tuple(map(float, tparams)), direction, worst
        )
        if best is None or cand.max_distance < best.max_distance:
            best = cand
    return best


@functools.lru_cache(maxsize=4096)
def _cached_correspondence(face, edge, tol, samples):
    return boundary_contains(face, edge, tol, samples)


def induced_edge_sign(
    face: Face,
    edge,
    s: float,
    tol: float = EDGE_MEMBERSHIP_TOL,
) -> int:
    """Orientation the face induces on the edge, outward-conormal-first.

    Returns +1 when the edge's reference tangent at parameter s agrees
    with the boundary orientation induced by the face: that is, when
    (outward conormal, edge tangent) is positively oriented in the
    oriented face tangent plane.
    """
    corr = _cached_correspondence(face, edge, tol, 16)
    if corr is None:
        raise ShapeError(
            f"edge {getattr(edge, 'name', '?')!r} is not on the boundary of "
            f"face {face.name!r}"
        )
    seg = next(
        seg
        for seg in domain_boundary_segments(face.patch.domain)
        if seg.name == corr.segment
    )
    target = edge.point(s)
    t, dist = _project_to_segment(face, seg, np.asarray(target, dtype=float))
    if dist > tol:
        raise ShapeError(
            f"edge point at parameter {s} is not on the boundary of {face.name!r}"
        )
    u0, v0 = seg.point(t)
    x, du, dv = face.patch.map.chart(u0, v0)
    frames = oriented_unit_frames(
        face, du[None, :], dv[None, :]
    )
    q1, q2 = frames[0, :, 0], frames[0, :, 1]
    nu_par = seg.outward(t)
    w = nu_par[0] * du + nu_par[1] * dv
    tau = np.asarray(edge.velocity(s), dtype=float)
    tau_c = np.array([np.dot(tau, q1), np.dot(tau, q2)])
    tau_norm = np.linalg.norm(tau_c)
    if tau_norm < 1e-13:
        raise DegeneracyError("edge tangent is degenerate in the face plane")
    tau_c /= tau_norm
    w_c = np.array([np.dot(w, q1), np.dot(w, q2)])
    nu_c = w_c - np.dot(w_c, tau_c) * tau_c
    nu_norm = np.linalg.norm(nu_c)
    if nu_norm < 1e-13:
        raise DegeneracyError("outward conormal is parallel to the edge")
    nu_c /= nu_norm
    det = nu_c[0] * tau_c[1] - nu_c[1] * tau_c[0]
    return +1 if det > 0 else -1


# ---------------------------------------------------------------------------
# Point-to-face distance (used by configuration validation)


def _domain_box_map(domain):
    """[0,1]^2 charts onto the domain, each with its 2x2 Jacobian.

    Returns a list of (map, jacobian) pairs; used to run box-constrained
    minimization over the whole domain.
    """
    if isinstance(domain, RectangleDomain):
        du = domain.u_max - domain.u_min
        dv = domain.v_max - domain.v_min

        def rect(a, b):
            return domain.u_min + a * du, domain.v_min + b * dv

        def rect_jac(a, b):
            return np.array([[du, 0.0], [0.0, dv]])

        return [(rect, rect_jac)]
    if isinstance(domain, QuarterDiskDomain):
        r = domain.radius
        half_pi = 0.5 * math.pi

        def polar(a, b):
            return r * a * math.cos(half_pi * b), r * a * math.sin(half_pi * b)

        def polar_jac(a, b):
            c, s = math.cos(half_pi * b), math.sin(half_pi * b)
            return np.array(
                [[r * c, -r * a * half_pi * s], [r * s, r * a * half_pi * c]]
            )

        return [(polar, polar_jac)]
    if isinstance(domain, PolygonDomain):
        verts = np.asarray(domain.vertices)
        a0 = verts[0]
        maps = []
        for i in range(1, len(verts) - 1):
            b0, c0 = verts[i], verts[i + 1]

            def tri(a, b, pa=a0, pb=b0, pc=c0):
                p = pa + a * (pb - pa) + a * b * (pc - pb)
                return p[0], p[1]

            def tri_jac(a, b, pa=a0, pb=b0, pc=c0):
                col0 = (pb - pa) + b * (pc - pb)
                col1 = a * (pc - pb)
                return np.stack([col0, col1], axis=1)

            maps.append((tri, tri_jac))
        return maps
    raise ShapeError(f"unknown domain type {type(domain).__name__}")


@functools.lru_cache(maxsize=256)
def _face_point_cloud(face, grid):
    """Cached (box params, box index, chart points) covering the face."""
    t = np.linspace(0.0, 1.0, grid)
    aa, bb = np.meshgrid(t, t, indexing="ij")
    ab = np.stack([aa.ravel(), bb.ravel()], axis=1)
    boxes = _domain_box_map(face.patch.domain)
    params, index, points = [], [], []
    for bi, (box_map, _) in enumerate(boxes):
        uv = np.array([box_map(a, b) for a, b in ab])
        x, _, _ = face.patch.map.chart_batch(uv[:, 0], uv[:, 1])
        params.append(ab)
        index.append(np.full(len(ab), bi))
        points.append(x)
    return np.concatenate(params), np.concatenate(index), np.concatenate(points)


def distance_to_face(point, face: Face, grid: int = 24) -> float:
    """min over the face of |face(u, v) - point| (cached cloud + local refine)."""
    point = np.asarray(point, dtype=float)
    params, index, cloud = _face_point_cloud(face, grid)
    d2 = np.einsum("ij,ij->i", cloud - point, cloud - point)
    i = int(np.argmin(d2))
    box_map, box_jac = _domain_box_map(face.patch.domain)[int(index[i])]
    x0 = params[i]

    def objective(ab):
        u, v = box_map(ab[0], ab[1])
        x, du, dv = face.patch.map.chart(u, v)
        diff = x - point
        jac_uv = box_jac(ab[0], ab[1])
        grad_x = np.stack([du, dv], axis=1) @ jac_uv
        return float(np.dot(diff, diff)), 2.0 * diff @ grad_x

    res = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, 1.0), (0.0, 1.0)],
        options={"ftol": 1e-20, "gtol": 1e-16, "maxiter": 200},
    )
    return min(math.sqrt(max(res.fun, 0.0)), math.sqrt(d2[i]))
