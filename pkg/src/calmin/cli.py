"""Command-line interface.

Commands operate on a scene file and share a flag set; numeric flags
override same-named scene settings.  Exit codes: 0 pass, 2 scene parse
error, 3 validation error (bad references, structural findings), 4
criterion failure, 5 minimality violation found by a deformation
command.  Machine-readable reports (``--report``) serialize
deterministically: identical scene, flags, and seed give identical
bytes; wall time goes to stdout only.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
import numpy as np

from . import kernels
from .errors import CalminError, SceneError
from .exterior import comass, comass_2form_r4_oracle
from .criterion import Tolerances, check_configuration, check_edge
from .deform import adversarial_search, random_trials
from .objexport import export_obj_path
from .report import RunReport, sign_string
from .scene import parse_scene, realize_scene

EXIT_PASS = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CRITERION = 4
EXIT_VIOLATION = 5

_DEFAULTS = {
    "quad": 32,
    "seed": 0,
    "tol_sum": 1e-10,
    "tol_cal": 1e-8,
    "tol_comass": 1e-4,
    "trials": 100,
    "budget": 2000,
    "res": 32,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="calmin",
        description=(
            "verify the edge-balance minimality criterion for unions of "
            "calibrated faces, and stress-test them with boundary-fixing "
            "deformations"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("check", "run the minimality criterion checker"),
        ("perturb", "random boundary-fixing deformation trials"),
        ("attack", "adversarial search for an area decrease"),
        ("comass", "estimate the comass of the scene's forms"),
        ("tune", "1-parameter residual minimization for a builder family"),
        ("export", "write an OBJ mesh of the configuration"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("scene", help="scene file path")
        p.add_argument("--tol-sum", type=float, default=None)
        p.add_argument("--tol-cal", type=float, default=None)
        p.add_argument("--quad", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--report", default=None, help="machine-readable report path")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--res", type=int, default=None)
        p.add_argument("--obj", default=None, help="OBJ output path (export)")
        if name == "tune":
            p.add_argument("--param", required=True)
            p.add_argument("--lo", type=float, required=True)
            p.add_argument("--hi", type=float, required=True)
            p.add_argument("--steps", type=int, default=21)
    return parser


def _gather(args, settings):
    merged = {}
    for key, fallback in _DEFAULTS.items():
        cli_value = getattr(args, key, None)
        merged[key] = cli_value if cli_value is not None else settings.get(key, fallback)
    merged["restarts"] = (
        args.restarts
        if args.restarts is not None
        else settings.get("restarts", None)
    )
    return merged


def _require_config(realized):
    if realized.config is None:
        raise SceneError("this command needs a configuration (generate or faces)")
    return realized.config


def _projection_from(settings, n):
    keys = ("proj_x", "proj_y", "proj_z")
    if not any(k in settings for k in keys):
        return None
    rows = []
    for k in keys:
        if k not in settings:
            raise SceneError("projection needs all of proj_x, proj_y, proj_z")
        row = settings[k]
        if not isinstance(row, tuple) or len(row) != n:
            raise SceneError(f"{k} must be a tuple of {n} numbers")
        rows.append([float(x) for x in row])
    return np.array(rows)


def _cmd_check(args, realized, merged, report):
    config = _require_config(realized)
    tol = Tolerances(
        sum_tol=merged["tol_sum"],
        calibration_tol=merged["tol_cal"],
        comass_tol=merged["tol_comass"],
        comass_restarts=merged["restarts"] or 16,
        seed=merged["seed"],
    )
    result = check_configuration(config, tol)
    report.add("quad_order", merged["quad"])
    report.add("tol.sum", tol.sum_tol)
    report.add("tol.calibration", tol.calibration_tol)
    report.add("tol.comass", tol.comass_tol)
    for fc in result.faces:
        report.add(f"face.{fc.name}.residual", fc.residual)
        report.add(f"face.{fc.name}.comass", fc.comass_estimate)
        report.add(f"face.{fc.name}.pass", fc.passed)
    for ec in result.edges:
        report.add(f"edge.{ec.name}.status", ec.status)
        report.add(f"edge.{ec.name}.faces", ",".join(ec.face_names))
        if ec.feasible:
            report.add(
                f"edge.{ec.name}.feasible",
                ",".join(sign_string(v) for v in ec.feasible),
            )
        if ec.witness_signs is not None:
            report.add(f"edge.{ec.name}.signs", sign_string(ec.witness_signs))
        report.add(f"edge.{ec.name}.residual", ec.min_residual)
        report.add(f"edge.{ec.name}.pass", ec.passed)
    for i, finding in enumerate(result.findings):
        report.add(f"finding.{i}", f"{finding.severity}:{finding.code}:{finding.subject}")
    for i, note in enumerate(result.notes):
        report.add(f"note.{i}", note)
    print(f"faces: {len(result.faces)}  edges: {len(result.edges)}")
    for fc in result.faces:
        print(
            f"  face {fc.name}: residual {fc.residual:.2e} "
            f"comass {fc.comass_estimate:.9f} "
            f"{'ok' if fc.passed else 'FAIL'}"
        )
    for ec in result.edges:
        signs = sign_string(ec.witness_signs) if ec.witness_signs else "-"
        print(
            f"  edge {ec.name}: {ec.status} signs {signs} "
            f"residual {ec.min_residual:.2e} {'ok' if ec.passed else 'FAIL'}"
        )
    for finding in result.findings:
        print(f"  {finding.severity}: [{finding.code}] {finding.message}")
    if result.errors:
        report.verdict = "invalid"
        print("verdict: invalid (validation errors)")
        return EXIT_VALIDATION
    report.verdict = "pass" if result.overall_pass else "fail"
    print(f"verdict: {report.verdict}")
    return EXIT_PASS if result.overall_pass else EXIT_CRITERION


def _cmd_perturb(args, realized, merged, report):
    config = _require_config(realized)
    trial_report = random_trials(
        config, merged["trials"], merged["seed"], merged["quad"]
    )
    report.add("trials", trial_report.trials)
    report.add("quad_order", trial_report.quad_order)
    report.add("base_area", trial_report.base_area)
    report.add("identity_error", trial_report.identity_error)
    report.add("noise_floor", trial_report.noise_floor)
    for r in trial_report.results:
        report.add(f"trial.{r.index}.bumps", r.bump_count)
        report.add(f"trial.{r.index}.delta", r.delta)
    report.add("min_delta", trial_report.min_delta)
    report.add("mean_delta", trial_report.mean_delta)
    print(
        f"trials {trial_report.trials}: min delta {trial_report.min_delta:.3e} "
        f"mean {trial_report.mean_delta:.3e} floor {trial_report.noise_floor:.1e}"
    )
    if trial_report.violation:
        report.verdict = "violation"
        print("verdict: violation (area decrease below the noise floor)")
        return EXIT_VIOLATION
    report.verdict = "pass"
    print("verdict: pass")
    return EXIT_PASS


def _cmd_attack(args, realized, merged, report):
    config = _require_config(realized)
    attack = adversarial_search(
        config, merged["budget"], merged["seed"], merged["quad"]
    )
    report.add("budget", attack.budget)
    report.add("evaluations", attack.evaluations)
    report.add("starts", attack.starts)
    report.add("quad_order", attack.quad_order)
    report.add("rescore_order", attack.rescore_order)
    report.add("base_area", attack.base_area)
    report.add("noise_floor", attack.noise_floor)
    report.add("search_best_score", attack.search_best_score)
    report.add("best_delta", attack.best_delta)
    if attack.best_diffeo is not None:
        for i, bump in enumerate(attack.best_diffeo.bumps):
            report.add(f"witness.{i}.center", "(" + ", ".join(repr(c) for c in bump.center) + ")")
            report.add(f"witness.{i}.radius", bump.radius)
            report.add(f"witness.{i}.direction", "(" + ", ".join(repr(c) for c in bump.direction) + ")")
            report.add(f"witness.{i}.amplitude", bump.amplitude)
    print(
        f"attack: evals {attack.evaluations} best delta {attack.best_delta:.4e} "
        f"(search score {attack.search_best_score:.4e}, floor {attack.noise_floor:.1e})"
    )
    print("note: a fruitless search is not a proof of minimality")
    if attack.violation:
        report.verdict = "violation"
        print("verdict: violation (area decrease below the noise floor)")
        return EXIT_VIOLATION
    report.verdict = "pass"
    print("verdict: pass (nothing found below the noise floor)")
    return EXIT_PASS


def _cmd_comass(args, realized, merged, report):
    restarts = merged["restarts"] or 64
    seed = merged["seed"]
    targets = dict(realized.forms)
    if realized.config is not None:
        for face in realized.config.faces:
            targets.setdefault(f"calibration:{face.name}", face.calibration)
    if not targets:
        raise SceneError("scene holds no forms to measure")
    report.add("restarts", restarts)
    for name, form in targets.items():
        value = comass(form, restarts, seed)
        report.add(f"comass.{name}", value)
        line = f"  {name}: comass >= {value:.9f} (estimated)"
        if form.n == 4 and form.k == 2:
            oracle = comass_2form_r4_oracle(form)
            report.add(f"comass.{name}.oracle", oracle)
            line += f"  spectral oracle {oracle:.9f}"
        print(line)
    report.verdict = "ok"
    return EXIT_PASS


def _tune_residual(scene, param, value):
    try:
        realized = realize_scene(scene.with_generate_value(param, float(value)))
        config = realized.config
        if config is None or not config.edges:
            return math.inf
        return max(
            check_edge(config, e, samples=6).min_residual for e in config.edges
        )
    except CalminError:
        return math.inf


def tune_scan(residual, lo, hi, steps, max_rounds=80):
    """Grid minimization refined by bisection around the best cell.

    Evaluates ``residual`` on a ``steps``-point grid, narrows to the two
    cells around the best point, and repeats until the interval is
    negligible.  Ties resolve to the smallest parameter value.  Returns
    (best value, best residual).
    """
    span = hi - lo
    cache: dict = {}

    def f(v):
        if v not in cache:
            cache[v] = residual(v)
        return cache[v]

    best_v, best_r = lo, f(lo)
    for _ in range(max_rounds):
        grid = np.linspace(lo, hi, steps)
        values = [f(float(v)) for v in grid]
        i = int(np.argmin(values))  # ties resolve to the smallest value
        best_v, best_r = float(grid[i]), values[i]
        new_lo = float(grid[max(i - 1, 0)])
        new_hi = float(grid[min(i + 1, steps - 1)])
        if new_hi - new_lo <= 1e-11 * max(1.0, span):
            break
        lo, hi = new_lo, new_hi
    return best_v, best_r


def _cmd_tune(args, realized, merged, report):
    if realized.generate is None:
        raise SceneError("tune needs a generate block")
    if not (args.hi > args.lo):
        raise SceneError("tune needs hi > lo")
    if args.steps < 3:
        raise SceneError("tune needs at least 3 grid steps")
    scene = realized.scene
    best_v, best_r = tune_scan(
        lambda v: _tune_residual(scene, args.param, v), args.lo, args.hi, args.steps
    )
    report.add("parameter", args.param)
    report.add("lo", args.lo)
    report.add("hi", args.hi)
    report.add("steps", args.steps)
    report.add("best_value", best_v)
    report.add("best_residual", best_r)
    report.verdict = "ok"
    print(f"tuned {args.param} = {best_v!r} (residual {best_r:.3e})")
    return EXIT_PASS


def _cmd_export(args, realized, merged, report):
    config = _require_config(realized)
    if args.obj is None:
        raise SceneError("export needs --obj <path>")
    projection = _projection_from(realized.settings, config.n)
    export_obj_path(config, args.obj, merged["res"], projection)
    report.add("resolution", merged["res"])
    report.add("faces", len(config.faces))
    report.verdict = "ok"
    print(f"wrote {args.obj} ({len(config.faces)} face groups, res {merged['res']})")
    return EXIT_PASS


_COMMANDS = {
    "check": _cmd_check,
    "perturb": _cmd_perturb,
    "attack": _cmd_attack,
    "comass": _cmd_comass,
    "tune": _cmd_tune,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        with open(args.scene, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read scene: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        scene = parse_scene(text)
    except SceneError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = RunReport(
        command=args.command,
        scene_digest=scene.digest(),
        backend=kernels.BACKEND,
        seed=0,
        verdict="n/a",
    )
    try:
        realized = realize_scene(scene)
        merged = _gather(args, realized.settings)
        report.seed = merged["seed"]
        status = _COMMANDS[args.command](args, realized, merged, report)
    except CalminError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report.wall_time = time.perf_counter() - started
    if args.report:
        report.write(args.report)
    print(f"wall time: {report.wall_time:.3f}s")
    return status


if __name__ == "__main__":
    sys.exit(main())
