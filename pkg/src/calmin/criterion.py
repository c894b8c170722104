"""The minimality criterion checker.

A configuration is a finite union of calibrated faces together with its
declared singular edges.  The criterion holds when, edge by edge, the
incident faces can be reoriented so that (i) they all induce the same
orientation on the edge and (ii) the correspondingly signed calibrations
sum to zero.  A configuration whose faces are genuinely calibrated and
which passes every edge is area-minimizing under boundary-fixing
diffeomorphisms; for flat-face (polyhedral) configurations a failure is
evidence of non-minimality, since the criterion is also necessary there.

Signs are chosen per edge, independently across edges: a face shared by
several edges may be reoriented differently in different edge checks.
That per-edge quantifier is exactly what is verified here; no globally
consistent orientation assignment is sought.

Faces and edges can be checked independently (pure functions); the report
is assembled in declaration order so output is deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, OrientationError, ShapeError
from .exterior import comass, linear_combine
from . import surfaces
from .surfaces import (
    Face,
    boundary_contains,
    calibration_residual,
    distance_to_face,
    domain_boundary_segments,
    edge_is_regular,
    face_area,
    induced_edge_sign,
)

MAX_EDGE_FACES = 16  # exhaustive 2^k sign search


@dataclass(frozen=True, eq=False)
class EdgeIncidence:
    """A singular edge with the faces whose boundary contains it."""

    edge: object
    face_names: tuple
    correspondences: tuple

    def __post_init__(self):
        names = tuple(self.face_names)
        if len(names) < 2:
            raise ConfigurationError(
                f"edge {getattr(self.edge, 'name', '?')!r} needs >= 2 incident faces"
            )
        if len(set(names)) != len(names):
            raise ConfigurationError("edge incidence lists a face twice")
        corr = tuple(self.correspondences)
        if len(corr) != len(names) or any(c is None for c in corr):
            raise ConfigurationError(
                f"edge {getattr(self.edge, 'name', '?')!r} is missing a boundary "
                "correspondence"
            )
        object.__setattr__(self, "face_names", names)
        object.__setattr__(self, "correspondences", corr)

    @property
    def name(self) -> str:
        return self.edge.name


class Configuration:
    """Named faces plus declared singular edges, with derived incidences."""

    def __init__(self, faces: Sequence[Face], edges: Sequence[EdgeIncidence]):
        self.faces = tuple(faces)
        names = [f.name for f in self.faces]
        if len(set(names)) != len(names):
            raise ConfigurationError("face names must be unique")
        self._by_name = {f.name: f for f in self.faces}
        self.edges = tuple(edges)
        enames = [e.name for e in self.edges]
        if len(set(enames)) != len(enames):
            raise ConfigurationError("edge names must be unique")
        for e in self.edges:
            for fname in e.face_names:
                if fname not in self._by_name:
                    raise ConfigurationError(
                        f"edge {e.name!r} references unknown face {fname!r}"
                    )
        face_edges: dict = {f.name: [] for f in self.faces}
        for e in self.edges:
            for fname in e.face_names:
                face_edges[fname].append(e.name)
        self.face_edges = {k: tuple(v) for k, v in face_edges.items()}
        self._boundary_cache: dict = {}

    def face(self, name: str) -> Face:
        try:
            return self._by_name[name]
        except KeyError:
            raise ConfigurationError(f"unknown face {name!r}") from None

    def edge(self, name: str) -> EdgeIncidence:
        for e in self.edges:
            if e.name == name:
                return e
        raise ConfigurationError(f"unknown edge {name!r}")

    def total_area(self, quad_order: int = surfaces.DEFAULT_QUAD_ORDER) -> float:
        total = 0.0
        for f in self.faces:
            total += face_area(f, quad_order)
        return total

    def scale(self) -> float:
        """Typical linear size (max face cloud diameter); used by deformers."""
        best = 0.0
        for f in self.faces:
            _, _, cloud = surfaces._face_point_cloud(f, 12)
            ext = cloud.max(axis=0) - cloud.min(axis=0)
            best = max(best, float(np.linalg.norm(ext)))
        return best

    def boundary_samples(self, per_segment: int = 192) -> np.ndarray:
        """Points sampling the boundary (face edges not on singular edges).

        For each face, every parameter-boundary segment is sampled except
        the sub-ranges matched by declared edge correspondences.
        """
        if per_segment in self._boundary_cache:
            return self._boundary_cache[per_segment]
        pts = []
        for f in self.faces:
            covered: dict = {}
            for e in self.edges:
                if f.name not in e.face_names:
                    continue
                corr = e.correspondences[e.face_names.index(f.name)]
                lo = min(corr.segment_params)
                hi = max(corr.segment_params)
                covered.setdefault(corr.segment, []).append((lo, hi))
            ts = np.linspace(0.0, 1.0, per_segment)
            for seg in domain_boundary_segments(f.patch.domain):
                keep = np.ones_like(ts, dtype=bool)
                for lo, hi in covered.get(seg.name, []):
                    keep &= ~((ts >= lo - 1e-12) & (ts <= hi + 1e-12))
                if not keep.any():
                    continue
                uv = np.array([seg.point(t) for t in ts[keep]])
                x, _, _ = f.patch.map.chart_batch(uv[:, 0], uv[:, 1])
                pts.append(x)
        out = (
            np.concatenate(pts)
            if pts
            else np.empty((0, self.faces[0].n if self.faces else 0))
        )
        self._boundary_cache[per_segment] = out
        return out

    @property
    def n(self) -> int:
        return self.faces[0].n


def declare_edge(
    config_faces: Sequence[Face],
    edge,
    face_names: Sequence[str],
    tol: float = surfaces.EDGE_MEMBERSHIP_TOL,
    samples: int = 16,
) -> EdgeIncidence:
    """Build an EdgeIncidence, computing the boundary correspondences."""
    by_name = {f.name: f for f in config_faces}
    corr = []
    for fname in face_names:
        c = boundary_contains(by_name[fname], edge, tol, samples)
        if c is None:
            raise ConfigurationError(
                f"edge {getattr(edge, 'name', '?')!r} is not on the boundary of "
                f"face {fname!r}"
            )
        corr.append(c)
    return EdgeIncidence(edge, tuple(face_names), tuple(corr))


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    subject: str
    message: str


def validate_configuration(
    config: Configuration,
    tol: float = 1e-9,
    seed: int = 0,
) -> list:
    """Structural and geometric checks; returns findings (errors/warnings).

    Errors: an edge curve that is not regular, or an edge that fails to
    lie on an incident face's boundary.  Warnings: an undeclared
    near-coincidence, meaning two faces that share no declared edge come
    within tol of each other at a point that does not itself lie on a
    declared edge curve (faces meeting only at declared-edge endpoints,
    such as a common cone apex, are expected and not flagged).
    """
    findings: list = []
    for e in config.edges:
        if not edge_is_regular(e.edge):
            findings.append(
                Finding("error", "irregular-edge", e.name, "edge velocity vanishes")
            )
        for fname in e.face_names:
            corr = boundary_contains(config.face(fname), e.edge, tol)
            if corr is None:
                findings.append(
                    Finding(
                        "error",
                        "edge-not-on-boundary",
                        f"{e.name}/{fname}",
                        f"edge {e.name!r} does not lie on the boundary of "
                        f"face {fname!r} within {tol}",
                    )
                )
    shared = set()
    for e in config.edges:
        for a, b in itertools.combinations(sorted(e.face_names), 2):
            shared.add((a, b))
    margin = 1e-3 * max(config.scale(), 1e-12)
    for fa, fb in itertools.combinations(config.faces, 2):
        key = tuple(sorted((fa.name, fb.name)))
        if key in shared:
            continue
        if _clouds_far_apart(fa, fb, tol):
            continue
        closest, witness = _closest_approach(fa, fb)
        if closest >= tol:
            continue
        if any(_distance_to_curve(witness, e.edge) <= margin for e in config.edges):
            continue
        findings.append(
            Finding(
                "warning",
                "undeclared-coincidence",
                f"{key[0]}/{key[1]}",
                f"faces {key[0]!r} and {key[1]!r} come within {closest:.3e} "
                "of each other but share no declared edge",
            )
        )
    return findings


def _closest_approach(fa: Face, fb: Face):
    """Global minimum of |fa(u, v) - nearest point of fb| and its witness.

    Simplex minimization over fa's box parameters (clamped to the box),
    started from the closest cloud pair; every objective call runs the
    inner point-to-face refinement.
    """
    params_a, index_a, cloud_a = surfaces._face_point_cloud(fa, 12)
    _, _, cloud_b = surfaces._face_point_cloud(fb, 12)
    d2 = np.einsum(
        "ijk,ijk->ij",
        cloud_a[:, None, :] - cloud_b[None, :, :],
        cloud_a[:, None, :] - cloud_b[None, :, :],
    )
    ia = int(np.argmin(np.min(d2, axis=1)))
    boxes = surfaces._domain_box_map(fa.patch.domain)
    box_map, _ = boxes[int(index_a[ia])]

    best = {"d": math.inf, "x": cloud_a[ia]}

    def objective(ab):
        a = min(max(float(ab[0]), 0.0), 1.0)
        b = min(max(float(ab[1]), 0.0), 1.0)
        u, v = box_map(a, b)
        x, _, _ = fa.patch.map.chart(u, v)
        d = distance_to_face(x, fb)
        if d < best["d"]:
            best["d"] = d
            best["x"] = x
        return d

    simplex = [np.array(params_a[ia], dtype=float)]
    for step in ((0.08, 0.0), (0.0, 0.08)):
        simplex.append(np.clip(simplex[0] + step, 0.0, 1.0))
    values = [objective(p) for p in simplex]
    for _ in range(60):
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if values[0] < 1e-12 or abs(values[-1] - values[0]) < 1e-13:
            break
        centroid = (simplex[0] + simplex[1]) / 2.0
        reflected = centroid + (centroid - simplex[-1])
        fr = objective(reflected)
        if fr < values[0]:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            fe = objective(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
        else:
            contracted = centroid + 0.5 * (simplex[-1] - centroid)
            fc = objective(contracted)
            if fc < values[-1]:
                simplex[-1], values[-1] = contracted, fc
            else:
                for i in (1, 2):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = objective(simplex[i])
    return best["d"], best["x"]


def _distance_to_curve(point, edge, samples=129):
    s = np.linspace(0.0, 1.0, samples)
    pts = edge.points(s)
    d2 = np.einsum("ij,ij->i", pts - point, pts - point)
    i = int(np.argmin(d2))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, samples - 1)]

    def objective(t):
        diff = np.asarray(edge.point(t)) - point
        return float(np.dot(diff, diff))

    t, ft = surfaces._golden_min(objective, lo, hi, iters=60)
    return math.sqrt(max(min(ft, d2[i]), 0.0))


def _clouds_far_apart(fa: Face, fb: Face, tol: float) -> bool:
    """Conservative prefilter: skip pairs whose sample clouds stay far apart."""
    _, _, ca = surfaces._face_point_cloud(fa, 12)
    _, _, cb = surfaces._face_point_cloud(fb, 12)
    da = float(np.linalg.norm(ca.max(axis=0) - ca.min(axis=0)))
    db = float(np.linalg.norm(cb.max(axis=0) - cb.min(axis=0)))
    spacing = (da + db) / 12.0
    d2 = np.min(
        np.einsum("ijk,ijk->ij", ca[:, None, :] - cb[None, :, :],
                  ca[:, None, :] - cb[None, :, :])
    )
    return float(np.sqrt(d2)) > max(4.0 * spacing, 10.0 * tol)


# ---------------------------------------------------------------------------
# Sign search and per-edge balance


def feasible_edge_signs(
    config: Configuration, edge_inc: EdgeIncidence, samples: int = 16
) -> list:
    """All sign vectors making the reoriented faces agree along the edge.

    Exhaustive search over {+1, -1}^k: a vector s is feasible when
    s_i * (induced sign of face i) is the same for every incident face at
    every sampled edge parameter.  The result is closed under global
    negation.  A face whose induced sign varies along the edge makes the
    correspondence inconsistent and is rejected.
    """
    k = len(edge_inc.face_names)
    if k > MAX_EDGE_FACES:
        raise ShapeError(f"edge has {k} faces; exhaustive search capped at 16")
    params = [(q + 0.5) / samples for q in range(samples)]
    base_signs = []
    for fname in edge_inc.face_names:
        f = config.face(fname)
        signs = {induced_edge_sign(f, edge_inc.edge, s) for s in params}
        if len(signs) != 1:
            raise OrientationError(
                f"induced sign of face {fname!r} varies along edge "
                f"{edge_inc.name!r}"
            )
        base_signs.append(signs.pop())
    feasible = []
    for cand in itertools.product((+1, -1), repeat=k):
        ref = cand[0] * base_signs[0]
        if all(c * b == ref for c, b in zip(cand, base_signs)):
            feasible.append(cand)
    return feasible


@dataclass(frozen=True)
class EdgeCheck:
    name: str
    face_names: tuple
    status: str  # "ok" | "orientation-inconsistent" | "not-on-boundary"
    feasible: tuple
    witness_signs: Optional[tuple]
    min_residual: float
    passed: bool

    @property
    def feasible_count(self) -> int:
        return len(self.feasible)


def check_edge(
    config: Configuration,
    edge_inc: EdgeIncidence,
    tol_sum: float = 1e-10,
    samples: int = 16,
) -> EdgeCheck:
    """Balance test for one edge: minimal sum-residual over feasible signs.

    The residual of a sign vector is the max-abs coefficient of the signed
    sum of the incident calibrations; the edge passes when the minimum
    over feasible sign vectors is at most tol_sum.
    """
    if len(edge_inc.face_names) > MAX_EDGE_FACES:
        raise ShapeError("edge exceeds the exhaustive sign-search cap of 16 faces")
    try:
        feasible = feasible_edge_signs(config, edge_inc, samples)
    except OrientationError:
        return EdgeCheck(
            edge_inc.name,
            edge_inc.face_names,
            "orientation-inconsistent",
            (),
            None,
            float("inf"),
            False,
        )
    except ShapeError:
        return EdgeCheck(
            edge_inc.name,
            edge_inc.face_names,
            "not-on-boundary",
            (),
            None,
            float("inf"),
            False,
        )
    best = None
    best_res = float("inf")
    for cand in feasible:
        combined = linear_combine(
            [
                (s, config.face(fname).calibration)
                for s, fname in zip(cand, edge_inc.face_names)
            ]
        )
        res = combined.max_abs_coeff()
        if res < best_res:
            best_res = res
            best = cand
    return EdgeCheck(
        edge_inc.name,
        edge_inc.face_names,
        "ok",
        tuple(feasible),
        best,
        best_res,
        best_res <= tol_sum,
    )


# ---------------------------------------------------------------------------
# Whole-configuration check


@dataclass(frozen=True)
class Tolerances:
    sum_tol: float = 1e-10
    calibration_tol: float = 1e-8
    comass_tol: float = 1e-4
    edge_samples: int = 16
    boundary_tol: float = 1e-9
    residual_samples: int = 1000
    comass_restarts: int = 16
    seed: int = 0


@dataclass(frozen=True)
class FaceCheck:
    name: str
    residual: float
    residual_ok: bool
    comass_estimate: float
    comass_ok: bool
    passed: bool


NOTES = (
    "comass values are multi-start ascent estimates: certified lower bounds "
    "on the true comass (status: estimated)",
    "a pass certifies, up to the stated tolerances, the hypotheses of the "
    "edge-balance criterion: calibrated faces, consistent induced edge "
    "orientations, and vanishing signed calibration sums",
    "for configurations of flat faces the criterion is also necessary, so a "
    "failing verdict is evidence of non-minimality",
)


@dataclass(frozen=True)
class CriterionReport:
    faces: tuple
    edges: tuple
    findings: tuple
    tolerances: Tolerances
    overall_pass: bool
    notes: tuple = NOTES

    @property
    def errors(self):
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self):
        return tuple(f for f in self.findings if f.severity == "warning")


def check_configuration(
    config: Configuration, tolerances: Tolerances = Tolerances()
) -> CriterionReport:
    """Run validation, per-face calibration checks, and per-edge balance.

    Per face: the sampled calibration residual must stay within
    calibration_tol and the comass estimate within 1 + comass_tol.  Per
    edge: check_edge at sum_tol.  Overall pass means every face and edge
    passed and validation reported no errors (warnings do not block).
    """
    findings = tuple(
        validate_configuration(
            config, tolerances.boundary_tol, seed=tolerances.seed
        )
    )
    comass_cache: dict = {}
    face_checks = []
    for f in config.faces:
        res = calibration_residual(
            f, f.calibration, tolerances.residual_samples, tolerances.seed
        )
        key = f.calibration.key()
        if key not in comass_cache:
            comass_cache[key] = comass(
                f.calibration, tolerances.comass_restarts, tolerances.seed
            )
        cm = comass_cache[key]
        res_ok = res <= tolerances.calibration_tol
        cm_ok = cm <= 1.0 + tolerances.comass_tol
        face_checks.append(FaceCheck(f.name, res, res_ok, cm, cm_ok, res_ok and cm_ok))
    edge_checks = [
        check_edge(config, e, tolerances.sum_tol, tolerances.edge_samples)
        for e in config.edges
    ]
    overall = (
        all(fc.passed for fc in face_checks)
        and all(ec.passed for ec in edge_checks)
        and not any(f.severity == "error" for f in findings)
    )
    return CriterionReport(
        tuple(face_checks), tuple(edge_checks), findings, tolerances, overall
    )
