"""calmin: minimality verification for unions of calibrated faces.

The package decides whether a union of calibrated 2-dimensional faces
meeting along singular edges satisfies the per-edge balance criterion
(consistent induced orientations plus a vanishing sum of calibrations)
that guarantees the union is area-minimizing under diffeomorphisms fixing
its boundary.  It also constructs the standard example families and
stress-tests minimality with boundary-fixing deformations.
"""

from .errors import (
    CalminError,
    ConfigurationError,
    DeformationError,
    DegeneracyError,
    OrientationError,
    SceneError,
    ShapeError,
)

__version__ = "0.1.0"

__all__ = [
    "CalminError",
    "ConfigurationError",
    "DeformationError",
    "DegeneracyError",
    "OrientationError",
    "SceneError",
    "ShapeError",
    "__version__",
]
