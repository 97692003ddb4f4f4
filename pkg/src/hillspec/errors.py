"""Exception types raised by the library.

Every error that callers are expected to catch derives from
:class:`HillError`, so ``except HillError`` at a CLI boundary is enough
to turn any numerical failure into a diagnostic exit.
"""

from __future__ import annotations

__all__ = [
    "HillError",
    "ConfigError",
    "DirichletPointError",
    "NearSpectrumError",
    "BoundaryRootError",
    "NonconvergenceError",
    "NotAnEigenvalueError",
    "SingularArcError",
    "DegenerateFiberError",
    "WindowError",
    "StepSizeUnderflowError",
    "CorrectorDivergenceError",
]


class HillError(Exception):
    """Base class for all numerical failures in this package."""


class ConfigError(HillError):
    """Invalid user input: malformed potential file, bad flag combination."""


class DirichletPointError(HillError):
    """phi(z, pi) vanishes, so Floquet solutions normalized at x = 0 blow up."""


class NearSpectrumError(HillError):
    """Requested point is too close to the spectrum for a resolvent evaluation."""


class BoundaryRootError(HillError):
    """A root of the counted function sits on (or hugs) the contour of a search box."""


class NonconvergenceError(HillError):
    """An iterative refinement (Newton, secant, corrector) failed to converge."""


class NotAnEigenvalueError(HillError):
    """A fiber eigenvalue query was made at a point that is not in the fiber spectrum."""


class SingularArcError(HillError):
    """Arc tracing hit an irregular point (dDelta/dz = 0) it could not step across."""


class DegenerateFiberError(HillError):
    """A fiber diagnostic needs a simple eigenvalue but found a multiple one."""


class WindowError(HillError):
    """The sampling window of a grid function is too small for the requested operation."""


class StepSizeUnderflowError(HillError):
    """Step-doubling refinement hit the minimum step without meeting the tolerance."""


class CorrectorDivergenceError(HillError):
    """Predictor-corrector iteration for arc continuation diverged."""
