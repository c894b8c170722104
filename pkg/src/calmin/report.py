"""Run reports: a flat, deterministic key-value text format.

A report is an ordered list of (key, value) pairs serialized one per
line as ``key = value``.  Values are formatted so that identical inputs
produce identical bytes: floats via ``repr`` (shortest round-trip),
booleans as ``true``/``false``.  Wall-clock time is deliberately kept
out of the serialized form (it is printed to stdout only), so report
files are byte-identical for identical scene, flags, and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    return str(v)


def sign_string(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in signs)


@dataclass
class RunReport:
    command: str
    scene_digest: str
    backend: str
    seed: int
    verdict: str
    fields: list = field(default_factory=list)
    wall_time: Optional[float] = None  # stdout only, never serialized

    def add(self, key: str, value) -> None:
        self.fields.append((key, value))

    def extend(self, pairs: Iterable) -> None:
        for k, v in pairs:
            self.add(k, v)

    def to_text(self) -> str:
        lines = [
            "report_version = 1",
            f"command = {self.command}",
            f"scene_digest = {self.scene_digest}",
            f"backend = {self.backend}",
            f"seed = {self.seed}",
        ]
        for key, value in self.fields:
            lines.append(f"{key} = {format_value(value)}")
        lines.append(f"verdict = {self.verdict}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())
