"""Builders for the example configurations.

Two families live here.  The planar family: books of flat sheets sharing
a line, and cones over the edge skeleton of a right prism (both with
plane-dual calibrations).  The holomorphic family in R^4: the complex
curve z = w^2 clipped to the unit ball, rotated into fans by isometries
that fix one of two coordinate planes, with the matching rotated Kaehler
forms as calibrations.  Every builder returns a ready Configuration with
its singular edges declared and boundary correspondences computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError
from .exterior import (
    ConstantForm,
    KFrame,
    LinearIsometry,
    plane_dual_form,
    pushforward_isometry,
)
from .surfaces import (
    Face,
    FlatMap,
    HolomorphicMap,
    Patch,
    PolygonDomain,
    PolynomialCurve,
    QuarterDiskDomain,
    RectangleDomain,
    TransformedMap,
    segment_curve,
)
from .criterion import Configuration, declare_edge

# Parameter-domain radius of the clipped holomorphic patch: the point
# (w, w^2) has |.|^2 = rho^2 + rho^4 with rho = |w|, so the unit ball
# clips the parameter quarter-disk at the positive root of r^2 + r^4 = 1.
HOLOMORPHIC_RADIUS_SQ = (math.sqrt(5.0) - 1.0) / 2.0
HOLOMORPHIC_RADIUS = math.sqrt(HOLOMORPHIC_RADIUS_SQ)


def rotation_about_plane(fixed_plane_axes, theta: float) -> LinearIsometry:
    """Rotation of R^4 fixing two coordinate axes.

    The two axes not in fixed_plane_axes span the rotation plane; on it
    (ordered by increasing index) the map is the standard rotation by
    theta, and the fixed plane is left pointwise fixed.
    """
    i, j = fixed_plane_axes
    if not (1 <= i < j <= 4):
        raise ShapeError(f"fixed plane axes {fixed_plane_axes} invalid for R^4")
    p, q = [a for a in (1, 2, 3, 4) if a not in (i, j)]
    m = np.eye(4)
    c, s = math.cos(theta), math.sin(theta)
    m[p - 1, p - 1] = c
    m[p - 1, q - 1] = -s
    m[q - 1, p - 1] = s
    m[q - 1, q - 1] = c
    return LinearIsometry(m)


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """An orthogonal complex structure on R^4 (J^2 = -I)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ShapeError("complex structure must be 4x4")
        if np.max(np.abs(m @ m + np.eye(4))) > 1e-12:
            raise ShapeError("matrix does not square to -identity")
        if np.max(np.abs(m.T @ m - np.eye(4))) > 1e-12:
            raise ShapeError("complex structure must be orthogonal")
        object.__setattr__(self, "matrix", m)


def complex_structure(theta: float) -> ComplexStructure:
    """The complex structure sending e1, e2 to the theta-rotated e3, e4.

    J e1 = cos(t) e3 + sin(t) e4 and J e2 = -sin(t) e3 + cos(t) e4; the
    images of e3, e4 are then forced by J^2 = -I.  Equals the conjugate
    of the standard structure by the rotation acting on the (x3, x4)
    plane.
    """
    c, s = math.cos(theta), math.sin(theta)
    m = np.array(
        [
            [0.0, 0.0, -c, -s],
            [0.0, 0.0, s, -c],
            [c, -s, 0.0, 0.0],
            [s, c, 0.0, 0.0],
        ]
    )
    return ComplexStructure(m)


def kaehler_form(theta: float) -> ConstantForm:
    """The 2-form w(u, v) = <J_theta u, v>.

    Expands to cos(t)(dx13 + dx24) + sin(t)(dx14 - dx23); at t = 0 it
    evaluates to +1 on the oriented tangent frames of the holomorphic
    patch, which fixes the sign convention.
    """
    j = complex_structure(theta).matrix
    coeffs = {}
    for a in range(4):
        for b in range(a + 1, 4):
            c = j[b, a]  # <J e_{a+1}, e_{b+1}>
            if abs(c) >= 1e-15:
                coeffs[(a + 1, b + 1)] = c
    return ConstantForm(4, 2, coeffs)


def holomorphic_patch() -> Patch:
    """The clipped complex curve: (u, v) -> (u, u^2 - v^2, v, 2uv).

    Parameter domain: quarter-disk of radius sqrt((sqrt 5 - 1) / 2) in the
    closed first quadrant, the preimage of the unit ball.
    """
    return Patch(HolomorphicMap(), QuarterDiskDomain(HOLOMORPHIC_RADIUS))


def _edge_u_parabola() -> PolynomialCurve:
    """The v = 0 boundary of the holomorphic patch: s -> (s r, (s r)^2, 0, 0)."""
    r = HOLOMORPHIC_RADIUS
    coeffs = np.zeros((3, 4))
    coeffs[1, 0] = r
    coeffs[2, 1] = r * r
    return PolynomialCurve(coeffs, "E")


def _edge_v_parabola() -> PolynomialCurve:
    """The u = 0 boundary of the holomorphic patch: s -> (0, -(s r)^2, s r, 0)."""
    r = HOLOMORPHIC_RADIUS
    coeffs = np.zeros((3, 4))
    coeffs[1, 2] = r
    coeffs[2, 1] = -r * r
    return PolynomialCurve(coeffs, "Eprime")


def build_sigma(n: int) -> Configuration:
    """Fan of n copies of the holomorphic patch around one parabolic edge.

    Face i is the image of the base patch under the rotation by
    (i - 1) * 2 pi / n acting on the (x3, x4) plane, calibrated by the
    matching rotated Kaehler form with the complex orientation.  All
    faces share the edge E (fixed pointwise by the rotations); the
    rotated copies of the other parabola and the outer arcs form the
    boundary.
    """
    if n < 2:
        raise ShapeError("the fan needs n >= 2 sheets")
    alpha = 2.0 * math.pi / n
    base = holomorphic_patch()
    faces = []
    for i in range(1, n + 1):
        theta = (i - 1) * alpha
        if i == 1:
            patch = base
        else:
            patch = Patch(
                TransformedMap(base.map, rotation_about_plane((1, 2), theta)),
                base.domain,
            )
        faces.append(Face(patch, +1, kaehler_form(theta), f"D{i}"))
    edge = declare_edge(faces, _edge_u_parabola(), [f.name for f in faces])
    return Configuration(faces, [edge])


def build_sigma_prime(n: int, m: int) -> Configuration:
    """Union of m copies of the n-fan, rotated about the (x2, x3) plane.

    Copy j applies the rotation S_j by (j - 1) * 2 pi / m acting on the
    (x1, x4) plane; its faces carry the pushforward calibrations.  The m
    rotated copies of the edge E stay singular (each shared by the n
    faces of its copy), and the second parabola Eprime, fixed pointwise
    by the S_j, is shared by the m copies of the base face.
    """
    if n < 2 or m < 2:
        raise ShapeError("the union needs n >= 2 and m >= 2")
    alpha = 2.0 * math.pi / n
    beta = 2.0 * math.pi / m
    base = holomorphic_patch()
    faces = []
    for j in range(1, m + 1):
        s_rot = rotation_about_plane((2, 3), (j - 1) * beta)
        for i in range(1, n + 1):
            theta = (i - 1) * alpha
            r_rot = rotation_about_plane((1, 2), theta)
            iso = s_rot.compose(r_rot)
            patch = (
                base
                if (i == 1 and j == 1)
                else Patch(TransformedMap(base.map, iso), base.domain)
            )
            faces.append(
                Face(
                    patch,
                    +1,
                    pushforward_isometry(kaehler_form(theta), s_rot),
                    f"S{j}D{i}",
                )
            )
    edges = []
    for j in range(1, m + 1):
        s_rot = rotation_about_plane((2, 3), (j - 1) * beta)
        curve = _edge_u_parabola().transformed(s_rot, name=f"E{j}")
        edges.append(
            declare_edge(faces, curve, [f"S{j}D{i}" for i in range(1, n + 1)])
        )
    edges.append(
        declare_edge(
            faces, _edge_v_parabola(), [f"S{j}D1" for j in range(1, m + 1)]
        )
    )
    return Configuration(faces, edges)


def build_sigma_intermediate(n: int, m: int) -> Configuration:
    """The two-edge set: the n-fan plus the m - 1 rotated copies of its base.

    Faces: D1..Dn as in the fan, plus the images of D1 under the
    rotations about the (x2, x3) plane.  Edges: E (shared by D1..Dn) and
    Eprime (shared by D1 and its rotated copies).
    """
    if n < 2 or m < 2:
        raise ShapeError("the intermediate set needs n >= 2 and m >= 2")
    config = build_sigma(n)
    faces = list(config.faces)
    beta = 2.0 * math.pi / m
    base = holomorphic_patch()
    prime_names = ["D1"]
    for j in range(2, m + 1):
        s_rot = rotation_about_plane((2, 3), (j - 1) * beta)
        patch = Patch(TransformedMap(base.map, s_rot), base.domain)
        faces.append(
            Face(
                patch,
                +1,
                pushforward_isometry(kaehler_form(0.0), s_rot),
                f"Dp{j}",
            )
        )
        prime_names.append(f"Dp{j}")
    edges = [
        declare_edge(faces, _edge_u_parabola(), [f"D{i}" for i in range(1, n + 1)]),
        declare_edge(faces, _edge_v_parabola(), prime_names),
    ]
    return Configuration(faces, edges)


def build_book(azimuths) -> Configuration:
    """Unit-square sheets in R^3 sharing the segment from 0 to e3.

    Sheet i is spanned by (u_i, e3) with u_i = (cos a_i, sin a_i, 0) and is
    calibrated by the plane dual of that frame; the shared segment is the
    declared edge.
    """
    azimuths = [float(a) for a in azimuths]
    if len(azimuths) < 2:
        raise ShapeError("a book needs at least 2 sheets")
    for a in range(len(azimuths)):
        for b in range(a + 1, len(azimuths)):
            gap = (azimuths[a] - azimuths[b]) % (2.0 * math.pi)
            if min(gap, 2.0 * math.pi - gap) < 1e-12:
                raise ConfigurationError("coincident sheets: equal azimuths")
    e3 = np.array([0.0, 0.0, 1.0])
    faces = []
    for i, a in enumerate(azimuths, start=1):
        u = np.array([math.cos(a), math.sin(a), 0.0])
        patch = Patch(FlatMap(np.zeros(3), u, e3), RectangleDomain(0, 1, 0, 1))
        faces.append(
            Face(patch, +1, plane_dual_form(KFrame(np.stack([u, e3]))), f"sheet{i}")
        )
    binding = segment_curve((0, 0, 0), (0, 0, 1), "binding")
    edge = declare_edge(faces, binding, [f.name for f in faces])
    return Configuration(faces, [edge])


def book_from_sectors(sectors) -> Configuration:
    """Book specified by consecutive sector angles (must sum to 2 pi)."""
    sectors = [float(s) for s in sectors]
    if abs(sum(sectors) - 2.0 * math.pi) > 1e-9:
        raise ShapeError("sector angles must sum to a full turn")
    azimuths = [0.0]
    for s in sectors[:-1]:
        azimuths.append(azimuths[-1] + s)
    return build_book(azimuths)


def _unit(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ConfigurationError("degenerate span in cone construction")
    return v / norm


def _triangle_face(name, apex, x, y):
    su = x - apex
    sv = y - apex
    q1 = _unit(su)
    q2v = sv - np.dot(sv, q1) * q1
    q2 = _unit(q2v)
    patch = Patch(
        FlatMap(apex, su, sv), PolygonDomain(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
    )
    return Face(patch, +1, plane_dual_form(KFrame(np.stack([q1, q2]))), name)


def build_prism_cone(sides: int, radius: float, height: float, apex=None) -> Configuration:
    """Cone from an interior apex over the edge skeleton of a right prism.

    One planar triangle per skeleton edge (3p faces for a p-gonal prism),
    each calibrated by its plane dual.  The 2p segments from the apex to
    the prism vertices are the singular edges (each shared by exactly 3
    triangles); the skeleton edges themselves form the boundary.

    The cone-over-skeleton shape is one reading of the classic prism
    pictures, which fix no proportions; apex and proportions are exposed
    so `tune` can search the family (the triangular prism balances at
    height/radius = 1/sqrt(2), the square one at sqrt(2)).
    """
    if sides < 3:
        raise ShapeError("prism needs at least 3 sides")
    if radius <= 0 or height <= 0:
        raise ShapeError("prism radius and height must be positive")
    p = sides
    apex = (
        np.array([0.0, 0.0, height / 2.0])
        if apex is None
        else np.asarray(apex, dtype=float)
    )
    if apex.shape != (3,):
        raise ShapeError("apex must be a point in R^3")
    apothem = radius * math.cos(math.pi / p)
    if not (0.0 < apex[2] < height) or math.hypot(apex[0], apex[1]) >= apothem - 1e-12:
        raise ConfigurationError("apex must lie strictly inside the prism")
    bottom = [
        np.array(
            [radius * math.cos(2 * math.pi * k / p), radius * math.sin(2 * math.pi * k / p), 0.0]
        )
        for k in range(p)
    ]
    top = [b + np.array([0.0, 0.0, height]) for b in bottom]
    faces = []
    for k in range(p):
        faces.append(_triangle_face(f"bot{k}", apex, bottom[k], bottom[(k + 1) % p]))
    for k in range(p):
        faces.append(_triangle_face(f"top{k}", apex, top[k], top[(k + 1) % p]))
    for k in range(p):
        faces.append(_triangle_face(f"side{k}", apex, bottom[k], top[k]))
    edges = []
    for k in range(p):
        curve = segment_curve(apex, bottom[k], f"cb{k}")
        incident = [f"bot{(k - 1) % p}", f"bot{k}", f"side{k}"]
        edges.append(declare_edge(faces, curve, incident))
    for k in range(p):
        curve = segment_curve(apex, top[k], f"ct{k}")
        incident = [f"top{(k - 1) % p}", f"top{k}", f"side{k}"]
        edges.append(declare_edge(faces, curve, incident))
    return Configuration(faces, edges)
