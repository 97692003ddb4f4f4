"""Central configuration record.

All numerical thresholds used by the spectral-analysis routines live in
one dataclass so that a single object pins down the behaviour of a run.
Functions accept an optional ``config`` argument and fall back to
``DEFAULT_CONFIG``; nothing in the package reads a tolerance from
anywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any

__all__ = ["RunConfig", "DEFAULT_CONFIG"]


@dataclass(frozen=True)
class RunConfig:
    """Numerical thresholds and discretization knobs for a whole run.

    Attributes
    ----------
    ode_tol:
        Target relative accuracy of the propagator (monodromy entries).
    root_tol:
        Absolute tolerance on located roots of entire functions.
    cluster_tol:
        Two roots closer than this are treated as one multiple root.
    sing_eps_abs:
        Base absolute threshold for "phi(z, pi) is zero" tests; the
        effective threshold is ``sing_eps_abs * (1 + |z|)``.
    near_spectrum_rel:
        Resolvent evaluations refuse points with
        ``dist(z, spectrum) < near_spectrum_rel * (1 + |z|)``.
    arc_step_init:
        Initial step in the Floquet parameter t for arc tracing.
    arc_step_min:
        Floor for the adaptive t step; reaching it raises
        :class:`~hillspec.errors.StepSizeUnderflowError`.
    newton_tol:
        Convergence threshold for Newton/secant refinement of roots.
    newton_maxit:
        Iteration cap for Newton/secant refinement.
    quad_points_per_band:
        Gauss-Legendre panels per band for projection integrals in t.
    cell_points:
        Sample points per period cell for grid functions built by
        library helpers (tests and CLI defaults).
    ratio_octaves:
        Number of dyadic index octaves inspected by the boundedness
        diagnostics before extrapolating a sup trend.
    ratio_growth_factor:
        A per-octave sup growing by more than this factor across the
        inspected octaves is reported as unbounded.
    identity_tol:
        Tolerance for exact algebraic identities (Wronskians,
        determinants) that should hold to roundoff after integration.
    verify_tol:
        Tolerance for derived consistency checks that involve extra
        quadrature, for example the trace-derivative identity.
    seed:
        Seed for any randomized sampling performed during diagnostics.
    """

    ode_tol: float = 1e-10
    root_tol: float = 1e-10
    cluster_tol: float = 1e-6
    sing_eps_abs: float = 1e-6
    near_spectrum_rel: float = 1e-8
    arc_step_init: float = 0.05
    arc_step_min: float = 1e-7
    newton_tol: float = 1e-12
    newton_maxit: int = 60
    quad_points_per_band: int = 64
    cell_points: int = 128
    ratio_octaves: int = 3
    ratio_growth_factor: float = 10.0
    identity_tol: float = 1e-9
    verify_tol: float = 1e-7
    seed: int = 0
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable copy of the configuration."""
        d = asdict(self)
        d.pop("extra", None)
        return d

    def replace(self, **kwargs: Any) -> "RunConfig":
        """Return a copy with the given fields replaced."""
        current = asdict(self)
        current.update(kwargs)
        return RunConfig(**current)


DEFAULT_CONFIG = RunConfig()
