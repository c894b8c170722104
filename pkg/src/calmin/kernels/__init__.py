"""Numerical kernel backend selection.

The hot inner loops (2-form evaluation over quadrature batches, Gram
areas, bump-field frame pushforwards, and the comass ascent) exist twice:
a compiled Cython core (``calmin.kernels._core``) and a NumPy fallback
(``calmin.kernels.pyfallback``).  The compiled core is preferred when
importable; set ``CALMIN_KERNELS=python`` or ``CALMIN_KERNELS=compiled``
to force a backend.  ``BACKEND`` names the active one.

Both backends implement identical algorithms; results agree to roundoff
but are not guaranteed bit-identical across backends.  Within one backend
every accumulation runs in a fixed order, so outputs are reproducible.
"""

from __future__ import annotations

import os

from . import pyfallback

_requested = os.environ.get("CALMIN_KERNELS", "auto").lower()

_impl = None
BACKEND = "python"
if _requested in ("auto", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "CALMIN_KERNELS=compiled but calmin.kernels._core is not built"
            )
if _impl is None:
    _impl = pyfallback

eval2_values = _impl.eval2_values
gram_values = _impl.gram_values
weighted_sum = _impl.weighted_sum
weighted_sqrt_sum = _impl.weighted_sqrt_sum
displacements = _impl.displacements
pushed_frames = _impl.pushed_frames
orthonormalize_2frames = _impl.orthonormalize_2frames
ascent_2form = _impl.ascent_2form

__all__ = [
    "BACKEND",
    "eval2_values",
    "gram_values",
    "weighted_sum",
    "weighted_sqrt_sum",
    "displacements",
    "pushed_frames",
    "orthonormalize_2frames",
    "ascent_2form",
]
