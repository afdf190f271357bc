"""
Discrete Fuglede p-modulus.

- ``problem`` / ``solver``: the convex program min Σ m_i f_i^p over admissible densities
- ``hooks``: solver lifecycle hooks (logging, slow solves)
- ``witness`` / ``diagnostics``: exceptionality witnesses and their integrability checks
- ``families`` / ``study``: discretized families and refinement studies
"""

from .diagnostics import LpEstimate, SurfaceDivergence, lp_norm_estimate, surface_divergence_check
from .families import (
    LogPolarCells,
    annulus_extremal_density,
    annulus_family,
    annulus_modulus,
    subspace_family,
    subspace_family_builder,
    with_empty_measure,
)
from .hooks import HookChain, LoggingHook, SlowSolveHook, SolveContext, SolverHook
from .problem import ModulusProblem
from .solver import AdmissibilityReport, ModulusSolution, check_admissible, solve_modulus
from .study import RefinementStudy, fuglede_refinement_study, study_verdict
from .witness import (
    RadialLog,
    RadialPow,
    SplitComposite,
    VitaliPhi,
    WitnessFunction,
    eval_witness,
    smooth_cutoff,
    vitali_centers,
)

__all__ = [
    # Problem and solver
    "ModulusProblem",
    "ModulusSolution",
    "AdmissibilityReport",
    "solve_modulus",
    "check_admissible",
    # Hooks
    "SolveContext",
    "SolverHook",
    "HookChain",
    "LoggingHook",
    "SlowSolveHook",
    # Witnesses
    "WitnessFunction",
    "RadialPow",
    "RadialLog",
    "VitaliPhi",
    "SplitComposite",
    "eval_witness",
    "vitali_centers",
    "smooth_cutoff",
    # Diagnostics
    "LpEstimate",
    "SurfaceDivergence",
    "lp_norm_estimate",
    "surface_divergence_check",
    # Families and studies
    "LogPolarCells",
    "annulus_family",
    "annulus_modulus",
    "annulus_extremal_density",
    "subspace_family",
    "subspace_family_builder",
    "with_empty_measure",
    "RefinementStudy",
    "fuglede_refinement_study",
    "study_verdict",
]
