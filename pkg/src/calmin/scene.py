"""Scene files: a line-oriented block format describing configurations.

A scene is a sequence of blocks.  A block opens with ``[kind]`` or
``[kind name=ident]`` and is followed by ``key = value`` lines.  Values
are numbers (decimal, optional exponent), parenthesized tuples of
numbers, bare identifiers, or comma-separated lists of those.  Lines
starting with ``#`` and blank lines are ignored.  Coefficient keys carry
a parenthesized multi-index: ``coeff (1,3) = 1``.

Block kinds:
    [scene]              global settings (quad, seed, tolerances, ...)
    [generate name=X]    a builder invocation (kind = ... plus params)
    [form name=W]        an explicit constant form (n = ..., coeff ...)
    [face name=F]        an explicit face (flat or holomorphic patch)
    [edge name=E]        an explicit edge curve with incident faces

A scene describes at most one configuration: either exactly one generate
block, or explicit face/edge blocks (never both).  Parsing is strict:
unknown keys, bad references, and malformed numbers are reported with
their line number.  ``canonical_text`` re-serializes a scene so that
parse -> serialize -> parse is the identity on the parsed value.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SceneError
from .exterior import ConstantForm, KFrame, plane_dual_form
from .surfaces import (
    ArcCurve,
    Face,
    FlatMap,
    HolomorphicMap,
    Patch,
    PolygonDomain,
    PolynomialCurve,
    QuarterDiskDomain,
    RectangleDomain,
    segment_curve,
)
from .criterion import Configuration, declare_edge
from . import constructions

_HEADER_RE = re.compile(r"^\[(\w+)(?:\s+name\s*=\s*([A-Za-z_][\w.-]*))?\]$")
_KEY_RE = re.compile(r"^([A-Za-z_]\w*)(?:\s*\(([^()]*)\))?$")
_INT_RE = re.compile(r"^[+-]?\d+$")
_WORD_RE = re.compile(r"^[A-Za-z_][\w.+-]*$")

_BLOCK_KINDS = ("scene", "generate", "form", "face", "edge")

_SCENE_KEYS = {
    "quad", "seed", "tol_sum", "tol_cal", "tol_comass", "restarts",
    "trials", "budget", "res", "proj_x", "proj_y", "proj_z",
}
_GENERATE_KEYS = {
    "kind", "n", "m", "angles_deg", "sectors_deg", "sides", "radius",
    "height", "apex",
}
_FORM_KEYS = {"n", "k", "coeff"}
_FACE_KEYS = {
    "patch", "origin", "span_u", "span_v", "domain", "rect", "radius",
    "vertex", "orientation", "calibration",
}
_EDGE_KEYS = {
    "kind", "from", "to", "center", "axis0", "axis1", "radius",
    "angle0_deg", "angle1_deg", "c0", "c1", "c2", "c3", "faces",
}
_KEYS_BY_KIND = {
    "scene": _SCENE_KEYS,
    "generate": _GENERATE_KEYS,
    "form": _FORM_KEYS,
    "face": _FACE_KEYS,
    "edge": _EDGE_KEYS,
}


@dataclass(frozen=True)
class Entry:
    key: str
    index: Optional[tuple]
    value: object
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Block:
    kind: str
    name: Optional[str]
    entries: tuple
    line: int = field(compare=False, default=0)

    def get(self, key, default=None):
        for e in self.entries:
            if e.key == key and e.index is None:
                return e.value
        return default

    def get_all(self, key):
        return [e for e in self.entries if e.key == key]

    def require(self, key):
        value = self.get(key)
        if value is None:
            raise SceneError(
                f"block [{self.kind}{' ' + self.name if self.name else ''}] "
                f"is missing key {key!r}",
                self.line,
            )
        return value


@dataclass(frozen=True)
class Scene:
    blocks: tuple

    def blocks_of(self, kind):
        return [b for b in self.blocks if b.kind == kind]

    def settings(self) -> dict:
        out: dict = {}
        for b in self.blocks_of("scene"):
            for e in b.entries:
                out[e.key] = e.value
        return out

    def canonical_text(self) -> str:
        lines = []
        for b in self.blocks:
            header = f"[{b.kind} name={b.name}]" if b.name else f"[{b.kind}]"
            lines.append(header)
            for e in b.entries:
                if e.index is not None:
                    key = f"{e.key} ({', '.join(str(i) for i in e.index)})"
                else:
                    key = e.key
                lines.append(f"{key} = {_format_value(e.value)}")
            lines.append("")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def with_generate_value(self, param: str, value) -> "Scene":
        """A copy of the scene with one generate-block parameter replaced.

        ``param`` is a key name, optionally with a list index such as
        ``angles_deg[2]``.
        """
        m = re.match(r"^(\w+)(?:\[(\d+)\])?$", param)
        if not m:
            raise SceneError(f"bad parameter name {param!r}")
        key, idx = m.group(1), m.group(2)
        gens = self.blocks_of("generate")
        if len(gens) != 1:
            raise SceneError("tuning requires exactly one generate block")
        block = gens[0]
        new_entries = []
        replaced = False
        for e in block.entries:
            if e.key != key:
                new_entries.append(e)
                continue
            if idx is None:
                if not isinstance(e.value, (int, float)):
                    raise SceneError(f"parameter {param!r} is not numeric")
                new_entries.append(Entry(e.key, e.index, value, e.line))
            else:
                seq = e.value if isinstance(e.value, list) else [e.value]
                i = int(idx)
                if not 0 <= i < len(seq):
                    raise SceneError(f"index out of range in {param!r}")
                seq = list(seq)
                seq[i] = value
                new_entries.append(Entry(e.key, e.index, seq, e.line))
            replaced = True
        if not replaced:
            raise SceneError(f"parameter {param!r} not present in generate block")
        new_block = Block(block.kind, block.name, tuple(new_entries), block.line)
        blocks = tuple(new_block if b is block else b for b in self.blocks)
        return Scene(blocks)


def _format_number(v) -> str:
    if isinstance(v, bool):
        raise SceneError("boolean values are not part of the scene grammar")
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _format_value(v) -> str:
    if isinstance(v, list):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, tuple):
        return "(" + ", ".join(_format_number(x) for x in v) + ")"
    if isinstance(v, (int, float)):
        return _format_number(v)
    return str(v)


def _split_top_level(text):
    items = []
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced parentheses")
        if ch == "," and depth == 0:
            items.append("".join(current))
            current = []
        else:
            current.append(ch)
    if depth != 0:
        raise ValueError("unbalanced parentheses")
    items.append("".join(current))
    return items


def _parse_number(token, line):
    token = token.strip()
    if _INT_RE.match(token):
        return int(token)
    try:
        return float(token)
    except ValueError:
        raise SceneError(f"malformed number {token!r}", line) from None


def _parse_item(token, line):
    token = token.strip()
    if not token:
        raise SceneError("empty value item", line)
    if token.startswith("("):
        if not token.endswith(")"):
            raise SceneError(f"malformed tuple {token!r}", line)
        inner = token[1:-1].strip()
        if not inner:
            raise SceneError("empty tuple", line)
        return tuple(_parse_number(t, line) for t in inner.split(","))
    if _INT_RE.match(token):
        return int(token)
    try:
        return float(token)
    except ValueError:
        pass
    if _WORD_RE.match(token):
        return token
    raise SceneError(f"malformed value {token!r}", line)


def _parse_value(text, line):
    try:
        items = _split_top_level(text)
    except ValueError as exc:
        raise SceneError(str(exc), line) from None
    parsed = [_parse_item(t, line) for t in items]
    return parsed[0] if len(parsed) == 1 else parsed


def parse_scene(text: str) -> Scene:
    """Parse scene text; raises SceneError with a line number on failure."""
    blocks = []
    current_kind = None
    current_name = None
    current_entries: list = []
    current_line = 0
    seen_names: dict = {}

    def flush():
        if current_kind is not None:
            blocks.append(
                Block(current_kind, current_name, tuple(current_entries), current_line)
            )

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            m = _HEADER_RE.match(line)
            if not m:
                raise SceneError(f"malformed block header {line!r}", lineno)
            kind, name = m.group(1), m.group(2)
            if kind not in _BLOCK_KINDS:
                raise SceneError(f"unknown block kind {kind!r}", lineno)
            if kind == "scene" and name:
                raise SceneError("[scene] block takes no name", lineno)
            if kind != "scene" and not name:
                raise SceneError(f"[{kind}] block needs a name", lineno)
            if name is not None:
                if (kind, name) in seen_names:
                    raise SceneError(
                        f"duplicate {kind} name {name!r} "
                        f"(first defined on line {seen_names[(kind, name)]})",
                        lineno,
                    )
                seen_names[(kind, name)] = lineno
            flush()
            current_kind, current_name = kind, name
            current_entries = []
            current_line = lineno
            continue
        if "=" not in line:
            raise SceneError(f"expected 'key = value', got {line!r}", lineno)
        if current_kind is None:
            raise SceneError("key/value line outside any block", lineno)
        key_text, value_text = line.split("=", 1)
        m = _KEY_RE.match(key_text.strip())
        if not m:
            raise SceneError(f"malformed key {key_text.strip()!r}", lineno)
        key, idx_text = m.group(1), m.group(2)
        if key not in _KEYS_BY_KIND[current_kind]:
            raise SceneError(
                f"unknown key {key!r} in [{current_kind}] block", lineno
            )
        index = None
        if idx_text is not None:
            if key != "coeff":
                raise SceneError(f"key {key!r} takes no index", lineno)
            index = tuple(_parse_number(t, lineno) for t in idx_text.split(","))
            if not all(isinstance(i, int) for i in index):
                raise SceneError("coefficient indices must be integers", lineno)
        elif key == "coeff":
            raise SceneError("coeff needs a parenthesized multi-index", lineno)
        value = _parse_value(value_text.strip(), lineno)
        current_entries.append(Entry(key, index, value, lineno))
    flush()
    return Scene(tuple(blocks))


# ---------------------------------------------------------------------------
# Realization: scene -> forms and configuration


@dataclass
class RealizedScene:
    scene: Scene
    settings: dict
    forms: dict
    config: Optional[Configuration]
    generate: Optional[Block]


def _as_float_list(value, block, key):
    items = value if isinstance(value, list) else [value]
    out = []
    for v in items:
        if not isinstance(v, (int, float)):
            raise SceneError(
                f"{key!r} in block [{block.kind} {block.name}] must be numeric"
            )
        out.append(float(v))
    return out


def _realize_form(block: Block) -> ConstantForm:
    n = block.require("n")
    if not isinstance(n, int) or n < 1:
        raise SceneError(f"form {block.name!r}: n must be a positive integer", block.line)
    coeff_entries = block.get_all("coeff")
    if not coeff_entries:
        k = block.get("k")
        if not isinstance(k, int):
            raise SceneError(
                f"form {block.name!r}: empty form needs an explicit k", block.line
            )
        return ConstantForm(n, k, {})
    lengths = {len(e.index) for e in coeff_entries}
    if len(lengths) != 1:
        raise SceneError(
            f"form {block.name!r}: coefficient indices disagree in length",
            block.line,
        )
    k = block.get("k", lengths.pop())
    coeffs = {}
    for e in coeff_entries:
        if e.index in coeffs:
            raise SceneError(f"duplicate coefficient {e.index}", e.line)
        if not isinstance(e.value, (int, float)):
            raise SceneError("coefficient value must be a number", e.line)
        coeffs[e.index] = float(e.value)
    try:
        return ConstantForm(n, k, coeffs)
    except Exception as exc:
        raise SceneError(f"form {block.name!r}: {exc}", block.line) from None


def _realize_domain(block: Block, default):
    kind = block.get("domain")
    if kind is None:
        return default
    if kind == "rect":
        rect = _as_float_list(block.require("rect"), block, "rect")
        if len(rect) != 4:
            raise SceneError("rect needs 4 numbers: umin, umax, vmin, vmax", block.line)
        return RectangleDomain(*rect)
    if kind == "quarter_disk":
        return QuarterDiskDomain(float(block.require("radius")))
    if kind == "polygon":
        verts = [e.value for e in block.get_all("vertex")]
        if len(verts) < 3:
            raise SceneError("polygon needs at least 3 vertex lines", block.line)
        return PolygonDomain(tuple(tuple(map(float, v)) for v in verts))
    raise SceneError(f"unknown domain kind {kind!r}", block.line)


def _realize_face(block: Block, forms: dict) -> Face:
    patch_kind = block.require("patch")
    if patch_kind == "flat":
        origin = np.array(block.require("origin"), dtype=float)
        span_u = np.array(block.require("span_u"), dtype=float)
        span_v = np.array(block.require("span_v"), dtype=float)
        patch = Patch(
            FlatMap(origin, span_u, span_v),
            _realize_domain(block, RectangleDomain(0.0, 1.0, 0.0, 1.0)),
        )
    elif patch_kind == "holomorphic":
        patch = Patch(
            HolomorphicMap(),
            _realize_domain(
                block, QuarterDiskDomain(constructions.HOLOMORPHIC_RADIUS)
            ),
        )
    else:
        raise SceneError(f"unknown patch kind {patch_kind!r}", block.line)
    orientation = block.get("orientation", 1)
    if orientation not in (1, -1):
        raise SceneError("orientation must be 1 or -1", block.line)
    cal = block.require("calibration")
    if cal == "auto":
        if patch_kind != "flat":
            raise SceneError(
                "calibration=auto requires a flat patch", block.line
            )
        q1 = span_u / np.linalg.norm(span_u)
        w = span_v - np.dot(span_v, q1) * q1
        q2 = w / np.linalg.norm(w)
        form = plane_dual_form(KFrame(np.stack([q1, q2])))
    else:
        if cal not in forms:
            raise SceneError(
                f"face {block.name!r} references unknown form {cal!r}", block.line
            )
        form = forms[cal]
    try:
        return Face(patch, int(orientation), form, block.name)
    except Exception as exc:
        raise SceneError(f"face {block.name!r}: {exc}", block.line) from None


def _realize_edge_curve(block: Block):
    kind = block.require("kind")
    if kind == "segment":
        return segment_curve(
            tuple(map(float, block.require("from"))),
            tuple(map(float, block.require("to"))),
            block.name,
        )
    if kind == "arc":
        return ArcCurve(
            tuple(map(float, block.require("center"))),
            tuple(map(float, block.require("axis0"))),
            tuple(map(float, block.require("axis1"))),
            float(block.require("radius")),
            math.radians(float(block.get("angle0_deg", 0.0))),
            math.radians(float(block.require("angle1_deg"))),
            block.name,
        )
    if kind == "poly":
        rows = []
        for key in ("c0", "c1", "c2", "c3"):
            v = block.get(key)
            if v is not None:
                rows.append(tuple(map(float, v)))
        if len(rows) < 2:
            raise SceneError("poly edge needs at least c0 and c1", block.line)
        return PolynomialCurve(np.array(rows), block.name)
    raise SceneError(f"unknown edge kind {kind!r}", block.line)


_BUILDERS = {
    "kaehler_sigma": ("n",),
    "kaehler_sigma_prime": ("n", "m"),
    "kaehler_intermediate": ("n", "m"),
    "book": (),
    "prism_cone": ("sides",),
}


def _realize_generate(block: Block) -> Configuration:
    kind = block.require("kind")
    if kind not in _BUILDERS:
        raise SceneError(f"unknown generator kind {kind!r}", block.line)
    try:
        if kind == "kaehler_sigma":
            return constructions.build_sigma(int(block.require("n")))
        if kind == "kaehler_sigma_prime":
            return constructions.build_sigma_prime(
                int(block.require("n")), int(block.require("m"))
            )
        if kind == "kaehler_intermediate":
            return constructions.build_sigma_intermediate(
                int(block.require("n")), int(block.require("m"))
            )
        if kind == "book":
            angles = block.get("angles_deg")
            sectors = block.get("sectors_deg")
            if (angles is None) == (sectors is None):
                raise SceneError(
                    "book needs exactly one of angles_deg or sectors_deg",
                    block.line,
                )
            if angles is not None:
                vals = _as_float_list(angles, block, "angles_deg")
                return constructions.build_book([math.radians(a) for a in vals])
            vals = _as_float_list(sectors, block, "sectors_deg")
            return constructions.book_from_sectors([math.radians(a) for a in vals])
        apex = block.get("apex")
        return constructions.build_prism_cone(
            int(block.require("sides")),
            float(block.get("radius", 1.0)),
            float(block.get("height", 1.0)),
            None if apex is None else tuple(map(float, apex)),
        )
    except SceneError:
        raise
    except Exception as exc:
        raise SceneError(f"generator {kind!r} failed: {exc}", block.line) from None


def realize_scene(scene: Scene) -> RealizedScene:
    """Resolve a parsed scene into forms and (optionally) a configuration."""
    forms = {b.name: _realize_form(b) for b in scene.blocks_of("form")}
    gens = scene.blocks_of("generate")
    face_blocks = scene.blocks_of("face")
    edge_blocks = scene.blocks_of("edge")
    config = None
    generate = None
    if gens and (face_blocks or edge_blocks):
        raise SceneError("a scene mixes a generate block with explicit faces")
    if len(gens) > 1:
        raise SceneError("a scene may hold at most one generate block")
    if gens:
        generate = gens[0]
        config = _realize_generate(generate)
    elif face_blocks:
        faces = [_realize_face(b, forms) for b in face_blocks]
        edges = []
        for b in edge_blocks:
            names = b.require("faces")
            names = names if isinstance(names, list) else [names]
            for nm in names:
                if nm not in {f.name for f in faces}:
                    raise SceneError(
                        f"edge {b.name!r} references unknown face {nm!r}", b.line
                    )
            curve = _realize_edge_curve(b)
            try:
                edges.append(declare_edge(faces, curve, names))
            except Exception as exc:
                raise SceneError(f"edge {b.name!r}: {exc}", b.line) from None
        config = Configuration(faces, edges)
    elif edge_blocks:
        raise SceneError("edge blocks need face blocks")
    return RealizedScene(scene, scene.settings(), forms, config, generate)
