"""Refinement studies: the modulus of one family at increasing resolution."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DomainError
from .hooks import SolverHook
from .problem import ModulusProblem
from .solver import ModulusSolution, solve_modulus

logger = logging.getLogger("carnotmod.modulus")

FamilyBuilder = Callable[[int], ModulusProblem]


@dataclass
class RefinementStudy:
    """Modulus sequence of a family over refinement levels 0..refinements.

    ``verdict`` is "exceptional" when the last value is below ``floor`` times
    the first and every successive log-ratio is at most -``slope_threshold``,
    "inadmissible" when every level has an empty admissible set, and
    "bounded" otherwise.
    """

    p: float
    levels: tuple[int, ...]
    values: tuple[float, ...]
    log_ratios: tuple[float, ...]
    verdict: str
    floor: float
    slope_threshold: float
    solutions: list[ModulusSolution] = field(default_factory=list, repr=False)

    @property
    def variation(self) -> float:
        """(max - min) / max of the finite values."""
        finite = [v for v in self.values if np.isfinite(v)]
        if not finite or max(finite) == 0:
            return 0.0
        return (max(finite) - min(finite)) / max(finite)

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "levels": list(self.levels),
            "values": [v if np.isfinite(v) else None for v in self.values],
            "infinite": [not np.isfinite(v) for v in self.values],
            "log_ratios": [r if np.isfinite(r) else None for r in self.log_ratios],
            "verdict": self.verdict,
            "floor": self.floor,
            "slope_threshold": self.slope_threshold,
            "variation": self.variation,
            "solver": [s.summary() for s in self.solutions],
        }

    def rows(self) -> list[dict[str, Any]]:
        """One record per level (for CSV trend tables)."""
        return [
            {
                "level": level,
                "value": value,
                "status": solution.status,
                "kkt_residual": solution.kkt_residual,
            }
            for level, value, solution in zip(self.levels, self.values, self.solutions, strict=True)
        ]


def _log_ratios(values: list[float]) -> tuple[float, ...]:
    ratios = []
    for a, b in zip(values, values[1:], strict=False):
        if a > 0 and b > 0 and np.isfinite(a) and np.isfinite(b):
            ratios.append(float(np.log(b / a)))
        elif b == 0 and a >= 0:
            # reaching zero, or staying there
            ratios.append(-np.inf)
        else:
            ratios.append(np.nan)
    return tuple(ratios)


def study_verdict(values: list[float], floor: float, slope_threshold: float) -> tuple[str, tuple[float, ...]]:
    """Classify a modulus sequence; returns (verdict, successive log-ratios)."""
    ratios = _log_ratios(values)
    if all(not np.isfinite(v) for v in values):
        return "inadmissible", ratios
    decreasing = all(r <= -slope_threshold for r in ratios)
    below_floor = values[-1] == 0 or values[-1] < floor * values[0]
    return ("exceptional" if decreasing and below_floor else "bounded"), ratios


def fuglede_refinement_study(
    builder: FamilyBuilder,
    p: float,
    refinements: int = 3,
    floor: float | None = None,
    slope_threshold: float | None = None,
    tolerance: float | None = None,
    max_iter: int | None = None,
    hooks: list[SolverHook] | None = None,
) -> RefinementStudy:
    """Solve the family built at levels 0..refinements and classify the trend.

    Args:
        builder: ``level -> ModulusProblem``, the same family at increasing resolution
        p: Exponent (overrides the exponent the builder used)
        refinements: Number of refinements after level 0
        floor: Exceptional when value[-1] < floor * value[0] (default: ``REFINEMENT.floor``)
        slope_threshold: Required decrease of every log-ratio (default: ``REFINEMENT.slope_threshold``)

    Solver failures propagate. A level that stops short of the KKT tolerance
    at its iteration cap is still recorded, with a warning.
    """
    from ..config import settings

    if refinements < 1:
        raise DomainError("a refinement study needs at least one refinement")
    floor = float(settings.REFINEMENT.floor if floor is None else floor)
    slope_threshold = float(settings.REFINEMENT.slope_threshold if slope_threshold is None else slope_threshold)

    levels = tuple(range(refinements + 1))
    values, solutions = [], []
    for level in levels:
        problem = builder(level).with_p(p)
        solution = solve_modulus(problem, tolerance, max_iter, require_convergence=False, hooks=hooks)
        if not solution.converged:
            logger.warning(
                "level %d (%r) did not converge: KKT residual %.3g",
                level, problem, solution.kkt_residual,
            )
        values.append(solution.value)
        solutions.append(solution)
        logger.info("refinement level %d: M_%g = %.6g", level, p, solution.value)

    verdict, ratios = study_verdict(values, floor, slope_threshold)
    return RefinementStudy(float(p), levels, tuple(values), ratios, verdict, floor, slope_threshold, solutions)
