"""Exception types shared across the package."""


class CalminError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(CalminError, ValueError):
    """Dimension, degree, or frame-size mismatch."""


class DegeneracyError(CalminError, ValueError):
    """A tangent frame (or deformed frame) collapsed below tolerance."""


class OrientationError(CalminError, ValueError):
    """An induced edge orientation is inconsistent along the edge."""


class ConfigurationError(CalminError, ValueError):
    """A configuration violates a structural invariant (names, references)."""


class DeformationError(CalminError, ValueError):
    """A deformation violates its validity budget or touches the boundary."""


class SceneError(CalminError, ValueError):
    """Scene text failed to parse or resolve.

    Attributes:
        line: 1-based line number of the offending input, when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
