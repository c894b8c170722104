"""Wavefront OBJ export of configurations for visual inspection.

Each face is sampled on a resolution x resolution parameter grid and
triangulated; the file holds one object group per face name.  Points in
dimension above 3 pass through an orthographic projection (default:
drop every coordinate past the third; the singular structure of the
built-in R^4 examples lies in the retained coordinates).  Output is
byte-stable: vertices are printed with 9 significant digits in a fixed
order.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .surfaces import domain_grid
from .criterion import Configuration


def default_projection(n: int) -> np.ndarray:
    if n < 3:
        raise ShapeError("OBJ export needs ambient dimension >= 3")
    proj = np.zeros((3, n))
    proj[0, 0] = proj[1, 1] = proj[2, 2] = 1.0
    return proj


def _fmt(x: float) -> str:
    if x == 0.0:  # normalize -0.0
        x = 0.0
    return format(x, ".9g")


def export_obj(
    config: Configuration,
    fh,
    resolution: int = 32,
    projection=None,
) -> None:
    """Write the configuration as OBJ text to an open file handle."""
    if resolution < 2:
        raise ShapeError("resolution must be >= 2")
    n = config.n
    proj = default_projection(n) if projection is None else np.asarray(projection)
    if proj.shape != (3, n):
        raise ShapeError(f"projection must be 3 x {n}, got {proj.shape}")
    offset = 0
    for face in config.faces:
        uu, vv = domain_grid(face.patch.domain, resolution)
        x, _, _ = face.patch.map.chart_batch(uu.ravel(), vv.ravel())
        pts = x @ proj.T
        fh.write(f"g {face.name}\n")
        for p in pts:
            fh.write(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
        res = resolution
        for i in range(res - 1):
            for j in range(res - 1):
                v00 = offset + i * res + j + 1
                v10 = offset + (i + 1) * res + j + 1
                v11 = offset + (i + 1) * res + j + 2
                v01 = offset + i * res + j + 2
                fh.write(f"f {v00} {v10} {v11}\n")
                fh.write(f"f {v00} {v11} {v01}\n")
        offset += res * res


def export_obj_path(config, path, resolution=32, projection=None) -> None:
    try:
        fh = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ShapeError(f"cannot write OBJ file {path!r}: {exc}") from None
    with fh:
        export_obj(config, fh, resolution, projection)
