"""Floquet spectra of complex Hill operators -d^2/dx^2 + V(x).

The package computes the full direct-integral picture of a Hill
operator with a complex pi-periodic potential: monodromy and
discriminant jets, Dirichlet/periodic/antiperiodic/critical spectra,
traced spectral arcs with singular-point classification, Riesz band
projections and eigenfunction expansions, and a three-way criterion
deciding whether the operator is a spectral operator of scalar type.
"""

from __future__ import annotations

import os as _os

# BLAS thread pools read their environment at first numpy import, so
# the single supported knob must be applied before any submodule loads.
_threads = _os.environ.get("HILLSPEC_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os, _threads

from .arcs import (
    SingularPoint,
    SpectralArc,
    SpectrumPortrait,
    StepControl,
    distance_to_spectrum,
    spectrum_portrait,
    trace_arc,
)
from .config import DEFAULT_CONFIG, RunConfig
from .criterion import (
    CriterionReport,
    CriterionThresholds,
    DEFAULT_THRESHOLDS,
    check_theorem_43,
    check_theorem_45,
    detect_spectral_singularities,
    evaluate_criterion,
    ratio_diagnostics,
    riesz_basis_diagnostic,
    validate_parametrization_asymptotics,
)
from .errors import (
    BoundaryRootError,
    ConfigError,
    CorrectorDivergenceError,
    DegenerateFiberError,
    DirichletPointError,
    HillError,
    NearSpectrumError,
    NonconvergenceError,
    NotAnEigenvalueError,
    SingularArcError,
    StepSizeUnderflowError,
    WindowError,
)
from .floquet import (
    FundamentalData,
    MonodromyBatch,
    MonodromyData,
    branch_root,
    delta_dot_lagrange,
    floquet_solutions,
    fundamental_system,
    greens_function,
    greens_matrix,
    monodromy,
    monodromy_batch,
)
from .potential import (
    Potential,
    evaluate,
    load_potential,
    make_fourier,
    make_sampled,
    potential_to_json,
    preset,
    semistrip_numbers,
    shift_to_zero_mean,
)
from .projection import (
    FiberExpansion,
    GelfandField,
    GridFunction,
    expand,
    fiber_expansion,
    gaussian_bump,
    gelfand_forward,
    gelfand_inverse,
    grid_for_cells,
    grid_from_callable,
    make_grid_function,
    project,
    resolvent_apply,
    spectral_matrix,
)
from .spectra import (
    SpectraCatalog,
    algebraic_vs_geometric,
    check_interlacing,
    critical_points,
    dirichlet_spectrum,
    fiber_spectrum,
    periodic_antiperiodic_spectrum,
    spectra_catalog,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # configuration
    "DEFAULT_CONFIG",
    "RunConfig",
    # errors
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
    # potentials
    "Potential",
    "make_fourier",
    "make_sampled",
    "evaluate",
    "shift_to_zero_mean",
    "semistrip_numbers",
    "preset",
    "load_potential",
    "potential_to_json",
    # monodromy and Floquet data
    "FundamentalData",
    "MonodromyData",
    "MonodromyBatch",
    "fundamental_system",
    "monodromy",
    "monodromy_batch",
    "branch_root",
    "delta_dot_lagrange",
    "floquet_solutions",
    "greens_function",
    "greens_matrix",
    # spectra
    "SpectraCatalog",
    "dirichlet_spectrum",
    "periodic_antiperiodic_spectrum",
    "critical_points",
    "fiber_spectrum",
    "algebraic_vs_geometric",
    "check_interlacing",
    "spectra_catalog",
    # arcs
    "SpectralArc",
    "SingularPoint",
    "SpectrumPortrait",
    "StepControl",
    "trace_arc",
    "spectrum_portrait",
    "distance_to_spectrum",
    # criterion
    "CriterionReport",
    "CriterionThresholds",
    "DEFAULT_THRESHOLDS",
    "evaluate_criterion",
    "check_theorem_43",
    "check_theorem_45",
    "ratio_diagnostics",
    "detect_spectral_singularities",
    "riesz_basis_diagnostic",
    "validate_parametrization_asymptotics",
    # projections and expansions
    "GridFunction",
    "GelfandField",
    "FiberExpansion",
    "grid_for_cells",
    "grid_from_callable",
    "make_grid_function",
    "gaussian_bump",
    "gelfand_forward",
    "gelfand_inverse",
    "project",
    "expand",
    "fiber_expansion",
    "spectral_matrix",
    "resolvent_apply",
]
