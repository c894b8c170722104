"""Boundary-fixing deformations and minimality stress tests.

A deformation is the identity plus a sum of compactly supported bump
vector fields, each amplitude * profile(|x - center| / radius) *
direction with the standard smooth bump profile exp(1 - 1/(1 - t^2)).
Two structural guarantees replace pointwise checks: the summed Lipschitz
budget stays below 1, so id + t * psi is a diffeomorphism for every
t in [0, 1] (the linear homotopy), and every support ball must clear the
configuration's sampled boundary, so boundary fixing is exact.

On top of that the module computes deformed areas and fluxes with the
same quadrature path as the undeformed ones (identity deformations
reproduce areas bit for bit), the flux swept by an edge under the
homotopy, seeded random minimality trials, and a derivative-free
adversarial search for area-decreasing deformations.

Bump sums are a strict subclass of all boundary-fixing diffeomorphisms,
so trials and searches probe a necessary consequence of minimality, never
the full hypothesis class; failure of the search proves nothing, and its
report says so.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DeformationError, DegeneracyError, ShapeError
from .exterior import ConstantForm
from .criterion import Configuration
from . import surfaces
from .surfaces import Face, induced_edge_sign
from . import kernels

PER_BUMP_BUDGET = 0.5
TOTAL_BUDGET = 0.9
BUDGET_SLACK = 1e-12
BOUNDARY_GAP = 1e-3  # support must clear the boundary by radius * this
NOISE_FLOOR = 5e-7


def bump_profile(t: float) -> float:
    """The smooth bump exp(1 - 1/(1 - t^2)) on (-1, 1), zero outside."""
    if abs(t) >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - t * t))


def bump_profile_slope(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    one = 1.0 - t * t
    return -2.0 * t / (one * one) * bump_profile(t)


@functools.lru_cache(maxsize=1)
def profile_max_slope() -> float:
    """Max |b'| of the bump profile, by scan plus golden-section refinement."""
    ts = np.linspace(0.0, 1.0 - 1e-9, 4097)
    vals = np.abs([bump_profile_slope(t) for t in ts])
    i = int(np.argmax(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    for _ in range(200):
        if abs(bump_profile_slope(c)) > abs(bump_profile_slope(d)):
            b, d = d, c
            c = b - phi * (b - a)
        else:
            a, c = c, d
            d = a + phi * (b - a)
        if b - a < 1e-14:
            break
    return abs(bump_profile_slope(0.5 * (a + b)))


@dataclass(frozen=True, eq=False)
class BumpField:
    """One compactly supported bump: amplitude * b(|x - c| / r) * direction."""

    center: tuple
    radius: float
    direction: tuple
    amplitude: float

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        direction = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            raise ShapeError("bump direction must be nonzero")
        direction = tuple(direction / norm)
        if len(direction) != len(center):
            raise ShapeError("bump center and direction disagree in dimension")
        if not self.radius > 0:
            raise ShapeError("bump radius must be positive")
        if self.lipschitz(self.amplitude, self.radius) > PER_BUMP_BUDGET + BUDGET_SLACK:
            raise DeformationError(
                "bump exceeds the per-bump Lipschitz budget "
                f"(|amp| * L / radius <= {PER_BUMP_BUDGET})"
            )
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @staticmethod
    def lipschitz(amplitude: float, radius: float) -> float:
        return abs(amplitude) * profile_max_slope() / radius

    @property
    def n(self) -> int:
        return len(self.center)


def _pack(bumps, n):
    centers = np.array([b.center for b in bumps], dtype=float).reshape(len(bumps), n)
    radii = np.array([b.radius for b in bumps], dtype=float)
    dirs = np.array([b.direction for b in bumps], dtype=float).reshape(len(bumps), n)
    amps = np.array([b.amplitude for b in bumps], dtype=float)
    return centers, radii, dirs, amps


@dataclass(frozen=True, eq=False)
class Diffeo:
    """id + psi with psi a sum of bumps; total Lipschitz budget < 1.

    The budget certifies that every id + t * psi, t in [0, 1], is a
    diffeomorphism, so the whole linear homotopy stays admissible.
    """

    bumps: tuple

    def __post_init__(self):
        bumps = tuple(self.bumps)
        total = sum(BumpField.lipschitz(b.amplitude, b.radius) for b in bumps)
        if total > TOTAL_BUDGET + BUDGET_SLACK:
            raise DeformationError(
                f"total Lipschitz budget {total:.6f} exceeds {TOTAL_BUDGET}"
            )
        if bumps and len({b.n for b in bumps}) != 1:
            raise ShapeError("bumps live in different dimensions")
        object.__setattr__(self, "bumps", bumps)

    def lipschitz_total(self) -> float:
        return sum(BumpField.lipschitz(b.amplitude, b.radius) for b in self.bumps)

    def apply(self, x, t: float = 1.0) -> np.ndarray:
        """phi_t(x) = x + t * psi(x)."""
        x = np.asarray(x, dtype=float)
        if not self.bumps:
            return x.copy()
        disp = kernels.displacements(
            np.ascontiguousarray(x[None, :]), np.array([float(t)]), *_pack(self.bumps, len(x))
        )
        return x + disp[0]

    def jacobian(self, x, t: float = 1.0) -> np.ndarray:
        """Analytic derivative of phi_t at x (identity + t * bump Jacobians)."""
        x = np.asarray(x, dtype=float)
        n = len(x)
        jac = np.eye(n)
        for b in self.bumps:
            diff = x - np.asarray(b.center)
            s2 = float(np.dot(diff, diff)) / (b.radius * b.radius)
            if s2 >= 1.0:
                continue
            prof = math.exp(1.0 - 1.0 / (1.0 - s2))
            coef = t * b.amplitude * (-2.0) * prof / ((1.0 - s2) ** 2 * b.radius**2)
            jac += coef * np.outer(np.asarray(b.direction), diff)
        return jac


def identity_diffeo() -> Diffeo:
    return Diffeo(())


def make_diffeo(bumps: Sequence[BumpField], config: Configuration) -> Diffeo:
    """Validate bumps against a configuration and wrap them.

    Beyond the Lipschitz budgets (checked by the types), every support
    ball must keep a distance of at least radius * 1e-3 from every
    sampled boundary point of the configuration.
    """
    diffeo = Diffeo(tuple(bumps))
    boundary = config.boundary_samples()
    for b in diffeo.bumps:
        if boundary.size == 0:
            continue
        center = np.asarray(b.center)
        dmin = float(np.min(np.linalg.norm(boundary - center, axis=1)))
        if dmin < b.radius * (1.0 + BOUNDARY_GAP):
            raise DeformationError(
                f"bump support (radius {b.radius:.4g}) comes within "
                f"{dmin - b.radius:.4g} of the sampled boundary"
            )
    return diffeo


# ---------------------------------------------------------------------------
# Deformed areas and fluxes


def _deformed_face_arrays(face: Face, diffeo: Diffeo, t: float, quad_order: int):
    x, du, dv, w = surfaces._face_quad_arrays(face, quad_order)
    tarr = np.full(x.shape[0], float(t))
    du2, dv2 = kernels.pushed_frames(x, du, dv, tarr, *_pack(diffeo.bumps, face.n))
    return x, du2, dv2, w


def deformed_area(
    config: Configuration, diffeo: Diffeo, t: float = 1.0, quad_order: int = 32
) -> float:
    """Total area of phi_t applied to the configuration.

    Uses the same nodes, weights, and accumulation order as the
    undeformed total area, so the identity deformation reproduces it bit
    for bit.
    """
    if not 0.0 <= t <= 1.0:
        raise ShapeError("homotopy parameter must lie in [0, 1]")
    total = 0.0
    for face in config.faces:
        _, du2, dv2, w = _deformed_face_arrays(face, diffeo, t, quad_order)
        g = kernels.gram_values(du2, dv2)
        if g.size and float(np.min(g)) < surfaces.DEGENERACY_TOL**2:
            raise DegeneracyError(
                f"deformed tangent frame degenerates on face {face.name!r}"
            )
        total += kernels.weighted_sqrt_sum(w, g)
    return total


def deformed_flux(
    face: Face,
    diffeo: Diffeo,
    form: ConstantForm,
    t: float = 1.0,
    quad_order: int = 32,
) -> float:
    """Flux of the form through phi_t(face), with the face's orientation."""
    if form.k != 2 or form.n != face.n:
        raise ShapeError("flux needs a degree-2 form matching the face")
    _, du2, dv2, w = _deformed_face_arrays(face, diffeo, t, quad_order)
    rows, cols, vals = form.pair_arrays()
    values = kernels.eval2_values(du2, dv2, rows, cols, vals)
    return face.orientation * kernels.weighted_sum(w, values)


def sweep_flux(edge, diffeo: Diffeo, form: ConstantForm, quad_order: int = 32) -> float:
    """Flux of the form through the surface swept by an edge.

    The sweep is (s, t) -> phi_t(edge(s)) on [0, 1]^2, oriented by
    (d_s, d_t).  The identity deformation sweeps a degenerate surface and
    gives zero.
    """
    if form.k != 2:
        raise ShapeError("sweep flux needs a degree-2 form")
    nodes, weights = surfaces._gauss_01(quad_order)
    ss, tt = np.meshgrid(nodes, nodes, indexing="ij")
    ww = np.outer(weights, weights).ravel()
    s = np.ascontiguousarray(ss.ravel())
    t = np.ascontiguousarray(tt.ravel())
    x = np.ascontiguousarray(edge.points(s))
    ds = np.ascontiguousarray(edge.velocities(s))
    packed = _pack(diffeo.bumps, x.shape[1])
    ds2, _ = kernels.pushed_frames(x, ds, ds, t, *packed)
    dt = kernels.displacements(x, np.ones_like(t), *packed)
    rows, cols, vals = form.pair_arrays()
    values = kernels.eval2_values(ds2, dt, rows, cols, vals)
    return kernels.weighted_sum(np.ascontiguousarray(ww), values)


def stokes_budget(
    config: Configuration,
    face_name: str,
    diffeo: Diffeo,
    form: ConstantForm,
    quad_order: int = 32,
) -> float:
    """Closed-form flux balance over the homotopy cylinder of one face.

    For a closed (constant) form, flux(phi(F)) - flux(F) plus the signed
    sum of the swept-edge fluxes must vanish; boundary pieces fixed by
    the deformation sweep degenerate surfaces and drop out.  The edge
    sign is the orientation the face induces on the edge
    (outward-conormal-first), times the face's stored orientation; the
    overall sign convention was fixed once against a flat test face.
    Returns the residual of the identity.
    """
    face = config.face(face_name)
    base = surfaces.flux(face, form, quad_order)
    moved = deformed_flux(face, diffeo, form, 1.0, quad_order)
    swept = 0.0
    for edge_name in config.face_edges.get(face_name, ()):
        inc = config.edge(edge_name)
        # induced_edge_sign already reflects the face's stored orientation
        sign = induced_edge_sign(face, inc.edge, 0.5)
        swept += sign * sweep_flux(inc.edge, diffeo, form, quad_order)
    return moved - base + swept


# ---------------------------------------------------------------------------
# Random minimality trials


@dataclass(frozen=True)
class TrialResult:
    index: int
    bump_count: int
    delta: float


@dataclass(frozen=True)
class TrialReport:
    trials: int
    seed: int
    quad_order: int
    base_area: float
    identity_error: float
    noise_floor: float
    results: tuple
    min_delta: float
    mean_delta: float

    @property
    def violation(self) -> bool:
        return self.min_delta < -self.noise_floor


# Bump radii are drawn from this band (times the configuration scale).
# The floor keeps several quadrature nodes across every bump at order 32;
# narrower bumps make the area quadrature noisier than the 5e-7 floor.
RADIUS_BAND = (0.22, 0.27)

# Trial amplitudes are capped at this fraction of the bump radius.  The
# order-32 quadrature error of a bump integrand is about 3e-3 * amplitude
# at the radius floor (measured), and a tangential bump on a flat face
# changes the true area not at all, so keeping reported deltas above the
# 5e-7 noise floor needs amplitude well under 5e-7 / 3e-3.  Violations of
# minimality are first-order in amplitude and remain well over an order
# of magnitude above the floor at this cap.
TRIAL_AMP_PER_RADIUS = 1.5e-4


def _draw_bump(config, rng, per_bump_budget, scale, boundary, n, near_edges=False):
    """One valid bump, or None if placement keeps failing."""
    slope = profile_max_slope()
    lo = RADIUS_BAND[0] * scale
    for _ in range(30):
        if near_edges and config.edges:
            inc = config.edges[int(rng.integers(0, len(config.edges)))]
            s = float(rng.uniform(0.15, 0.85))
            x = np.asarray(inc.edge.point(s), dtype=float)
        else:
            face = config.faces[int(rng.integers(0, len(config.faces)))]
            u, v = surfaces.domain_sample_interior(face.patch.domain, rng, 1)
            x, _, _ = face.patch.map.chart(float(u[0]), float(v[0]))
        radius = float(rng.uniform(*RADIUS_BAND)) * scale
        offset = rng.standard_normal(n)
        offset /= max(float(np.linalg.norm(offset)), 1e-300)
        center = x + float(rng.uniform(0.0, 0.3)) * radius * offset
        if boundary.size:
            dmin = float(np.min(np.linalg.norm(boundary - center, axis=1)))
            max_radius = dmin / (1.0 + 2.0 * BOUNDARY_GAP)
            if max_radius < lo:
                continue
            radius = min(radius, max_radius)
        direction = rng.standard_normal(n)
        cap = min(
            per_bump_budget * radius / slope, TRIAL_AMP_PER_RADIUS * radius
        ) * 0.999
        amplitude = float(rng.uniform(-cap, cap))
        return BumpField(tuple(center), radius, tuple(direction), amplitude)
    return None


def random_trials(
    config: Configuration, trials: int, seed: int, quad_order: int = 32
) -> TrialReport:
    """Seeded random boundary-fixing deformations; reports area changes.

    Each trial draws 1-3 bumps (centers near the faces, directions
    uniform on the sphere, amplitudes uniform within the trial budget:
    the Lipschitz cap tightened so quadrature noise at order 32 stays
    under the reported floor) from a per-trial derived seed and
    accumulates results in trial order, so reports are identical for
    identical inputs.  The noise floor is max(measured identity
    round-trip error, 5e-7).
    """
    if trials < 1:
        raise ShapeError("trials must be >= 1")
    base = config.total_area(quad_order)
    identity_error = abs(
        deformed_area(config, identity_diffeo(), 1.0, quad_order) - base
    )
    floor = max(identity_error, NOISE_FLOOR)
    scale = config.scale()
    boundary = config.boundary_samples()
    n = config.n
    results = []
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        count = int(rng.integers(1, 4))
        bumps = []
        for _ in range(count):
            bump = _draw_bump(config, rng, min(PER_BUMP_BUDGET, TOTAL_BUDGET / count),
                              scale, boundary, n)
            if bump is not None:
                bumps.append(bump)
        diffeo = make_diffeo(bumps, config)
        delta = deformed_area(config, diffeo, 1.0, quad_order) - base
        results.append(TrialResult(i, len(bumps), delta))
    deltas = [r.delta for r in results]
    return TrialReport(
        trials,
        seed,
        quad_order,
        base,
        identity_error,
        floor,
        tuple(results),
        min(deltas),
        sum(deltas) / len(deltas),
    )


# ---------------------------------------------------------------------------
# Adversarial search for area decrease


@dataclass(frozen=True)
class AttackReport:
    budget: int
    evaluations: int
    starts: int
    seed: int
    quad_order: int
    rescore_order: int
    base_area: float
    noise_floor: float
    search_best_score: float
    best_delta: float
    best_diffeo: Optional[Diffeo]

    @property
    def violation(self) -> bool:
        return self.best_delta < -self.noise_floor


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    @property
    def exhausted(self):
        return self.used >= self.limit


def _imbalance_direction(config, edge_inc):
    """First-order area-decreasing direction for an unbalanced edge.

    Translating an edge by X changes total area at first order by minus
    the edge integral of the residual form contracted with X, so the
    contraction of the residual with the edge tangent is the steepest
    direction.  Returns None when the edge is balanced.
    """
    from .criterion import check_edge

    ec = check_edge(config, edge_inc)
    if ec.witness_signs is None or ec.min_residual < 1e-9:
        return None
    from .exterior import linear_combine

    residual = linear_combine(
        [
            (s, config.face(f).calibration)
            for s, f in zip(ec.witness_signs, edge_inc.face_names)
        ]
    )
    tau = np.asarray(edge_inc.edge.velocity(0.5), dtype=float)
    tau /= max(float(np.linalg.norm(tau)), 1e-300)
    direction = residual.skew_matrix() @ tau
    norm = float(np.linalg.norm(direction))
    return direction / norm if norm > 1e-9 else None


def _project_params(vec, radii, boundary, per_bump_budget, n):
    """Clamp raw optimizer parameters back into the validity region."""
    slope = profile_max_slope()
    bumps = []
    stride = 2 * n + 1
    for b, radius in enumerate(radii):
        chunk = vec[b * stride : (b + 1) * stride]
        center = np.array(chunk[:n], dtype=float)
        direction = np.array(chunk[n : 2 * n], dtype=float)
        amplitude = float(chunk[2 * n])
        if np.linalg.norm(direction) < 1e-12:
            direction = np.zeros(n)
            direction[0] = 1.0
        inert = False
        if boundary.size:
            for _ in range(8):
                diff = boundary - center
                d = np.linalg.norm(diff, axis=1)
                i = int(np.argmin(d))
                need = radius * (1.0 + 2.0 * BOUNDARY_GAP)
                if d[i] >= need:
                    break
                away = center - boundary[i]
                nrm = float(np.linalg.norm(away))
                if nrm < 1e-12:
                    away = np.zeros(n)
                    away[0] = 1.0
                    nrm = 1.0
                center = boundary[i] + away / nrm * need * 1.01
            else:
                inert = True
        cap = per_bump_budget * radius / slope * 0.999
        amplitude = 0.0 if inert else float(np.clip(amplitude, -cap, cap))
        bumps.append(BumpField(tuple(center), radius, tuple(direction), amplitude))
    return bumps


def _nelder_mead(objective, x0, steps, budget, fatol=1e-9, max_iter=400):
    """Simplex-reflection minimization with a hard evaluation budget."""
    dim = len(x0)
    simplex = [np.array(x0, dtype=float)]
    for i in range(dim):
        pt = np.array(x0, dtype=float)
        pt[i] += steps[i]
        simplex.append(pt)
    values = []
    for pt in simplex:
        if budget.exhausted:
            return
        values.append(objective(pt))
    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if abs(values[-1] - values[0]) < fatol or budget.exhausted:
            return
        centroid = np.mean(simplex[:-1], axis=0)
        reflected = centroid + (centroid - simplex[-1])
        fr = objective(reflected)
        if fr < values[0] and not budget.exhausted:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            fe = objective(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
            continue
        if budget.exhausted:
            return
        contracted = centroid + 0.5 * (simplex[-1] - centroid)
        fc = objective(contracted)
        if fc < values[-1]:
            simplex[-1], values[-1] = contracted, fc
            continue
        for i in range(1, dim + 1):
            if budget.exhausted:
                return
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            values[i] = objective(simplex[i])


def adversarial_search(
    config: Configuration, budget: int, seed: int, quad_order: int = 32
) -> AttackReport:
    """Derivative-free search for an area-decreasing valid deformation.

    Multi-start simplex reflection over center/direction/amplitude of up
    to two bumps (radius fixed per start); parameters are re-projected
    into the validity region before every evaluation, and starts are
    biased toward the declared singular edges, the only places a
    first-order decrease can occur.  Candidates are scored at
    quad_order; the best few are then re-evaluated at triple the order,
    and the most negative re-scored change is reported with its witness
    (the cheap score alone can dip below the noise floor on bumps the
    coarse rule under-resolves).  A reported delta below the floor is
    evidence of non-minimality; finding nothing proves nothing.
    """
    if budget < 1:
        raise ShapeError("budget must be >= 1")
    rescore_order = 3 * quad_order
    base = config.total_area(quad_order)
    base_fine = config.total_area(rescore_order)
    identity_error = abs(
        deformed_area(config, identity_diffeo(), 1.0, rescore_order) - base_fine
    )
    floor = max(identity_error, NOISE_FLOOR)
    scale = config.scale()
    boundary = config.boundary_samples()
    n = config.n
    tracker = _Budget(budget)
    finalists: list = []  # (score, insertion order, diffeo), at most 8
    starts = 0

    def evaluate(vec, radii, per_bump):
        bumps = _project_params(vec, radii, boundary, per_bump, n)
        diffeo = Diffeo(tuple(bumps))
        tracker.used += 1
        delta = deformed_area(config, diffeo, 1.0, quad_order) - base
        finalists.append((delta, tracker.used, diffeo))
        finalists.sort(key=lambda item: (item[0], item[1]))
        del finalists[8:]
        return delta

    # warm starts: one bump per unbalanced edge, pushed along the
    # residual-form direction (both amplitude signs)
    warm = []
    for inc in config.edges:
        direction = _imbalance_direction(config, inc)
        if direction is None:
            continue
        mid = np.asarray(inc.edge.point(0.5), dtype=float)
        if boundary.size:
            dmin = float(np.min(np.linalg.norm(boundary - mid, axis=1)))
            radius = min(0.27 * scale, dmin / (1.0 + 2.0 * BOUNDARY_GAP))
            if radius < 0.1 * scale:
                continue
        else:
            radius = 0.25 * scale
        cap = PER_BUMP_BUDGET * radius / profile_max_slope() * 0.999
        for sign in (+1.0, -1.0):
            warm.append(
                BumpField(tuple(mid), radius, tuple(direction), sign * 0.5 * cap)
            )

    failed_draws = 0
    while not tracker.exhausted and failed_draws < 200:
        if starts < len(warm):
            bumps = [warm[starts]]
        else:
            rng = np.random.default_rng([seed, 7919, starts])
            count = 1 if starts % 2 == 0 else 2
            per_bump = min(PER_BUMP_BUDGET, TOTAL_BUDGET / count)
            bumps = []
            for _ in range(count):
                bump = _draw_bump(
                    config, rng, per_bump, scale, boundary, n,
                    near_edges=(starts % 3 != 2),
                )
                if bump is None:
                    break
                bumps.append(bump)
            if len(bumps) != count:
                starts += 1
                failed_draws += 1
                continue
        failed_draws = 0
        per_bump = min(PER_BUMP_BUDGET, TOTAL_BUDGET / len(bumps))
        radii = [b.radius for b in bumps]
        x0 = np.concatenate(
            [
                np.concatenate([b.center, b.direction, [b.amplitude]])
                for b in bumps
            ]
        )
        steps = np.concatenate(
            [
                np.concatenate(
                    [
                        np.full(n, 0.15 * b.radius),
                        np.full(n, 0.4),
                        [0.4 * per_bump * b.radius / profile_max_slope()],
                    ]
                )
                for b in bumps
            ]
        )
        _nelder_mead(
            lambda vec: evaluate(vec, radii, per_bump), x0, steps, tracker
        )
        starts += 1
    if not finalists:
        return AttackReport(
            budget, tracker.used, starts, seed, quad_order, rescore_order,
            base, floor, 0.0, 0.0, None,
        )
    search_best = finalists[0][0]
    best_delta = math.inf
    best_diffeo = None
    for _, _, diffeo in finalists:
        delta = deformed_area(config, diffeo, 1.0, rescore_order) - base_fine
        if delta < best_delta:
            best_delta = delta
            best_diffeo = diffeo
    return AttackReport(
        budget,
        tracker.used,
        starts,
        seed,
        quad_order,
        rescore_order,
        base,
        floor,
        search_best,
        best_delta,
        best_diffeo,
    )
