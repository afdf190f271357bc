"""
Convex solver for discrete p-modulus problems.

For p > 1 the program is solved through its concave dual

    max_{λ >= 0}  Σ_j λ_j - (p - 1) Σ_i m_i f_i(λ)^p,
    f_i(λ) = ((Aᵀλ)_i / (p m_i))^{1/(p-1)},

with L-BFGS-B followed by a few projected Newton steps on the active
constraints. For p = 1 the program is a linear program and goes to HiGHS.
The returned value is always the objective of a feasible density.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import optimize, sparse

from ..errors import DomainError, SolverError, UnsupportedExponentError
from .hooks import HookChain, SolveContext, SolverHook
from .problem import ModulusProblem

logger = logging.getLogger("carnotmod.modulus")


@dataclass
class ModulusSolution:
    """Result of :func:`solve_modulus`.

    Attributes:
        value: Σ m_i f_i^p for the returned (feasible) density; +inf when no density is admissible
        density: Optimal density per cell
        duals: Constraint multipliers λ_j
        status: "optimal", "not_converged" or "infinite"
        kkt_residual: max(infeasibility, relative complementarity, relative duality gap)
    """

    value: float
    density: np.ndarray
    duals: np.ndarray
    p: float
    status: str
    method: str
    iterations: int = 0
    kkt_residual: float = 0.0
    duality_gap: float = 0.0
    infeasibility: float = 0.0
    dual_value: float = 0.0
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status in ("optimal", "infinite")

    @property
    def infinite(self) -> bool:
        return self.status == "infinite"

    def summary(self) -> dict[str, Any]:
        """Scalar diagnostics (no per-cell arrays)."""
        return {
            "value": self.value,
            "p": self.p,
            "status": self.status,
            "method": self.method,
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
            "duality_gap": self.duality_gap,
            "infeasibility": self.infeasibility,
            "dual_value": self.dual_value,
        }

    def to_dict(self) -> dict[str, Any]:
        data = self.summary()
        data["density"] = np.where(np.isfinite(self.density), self.density, None).tolist()
        data["duals"] = self.duals.tolist()
        return data


def solve_modulus(
    problem: ModulusProblem,
    tolerance: float | None = None,
    max_iter: int | None = None,
    require_convergence: bool = True,
    hooks: list[SolverHook] | None = None,
) -> ModulusSolution:
    """Minimize Σ_i m_i f_i^p over densities admissible for every measure.

    Args:
        problem: Discretized family
        tolerance: KKT tolerance (default: ``SOLVER.tolerance``)
        max_iter: Iteration cap (default: ``SOLVER.max_iter``)
        require_convergence: Raise instead of returning an unconverged solution
        hooks: Solver hooks run around the solve

    Returns:
        ModulusSolution; a measure of zero total mass gives value +inf and
        status "infinite"

    Raises:
        UnsupportedExponentError: if p < 1
        SolverError: if the KKT tolerance is not met and ``require_convergence`` is set
    """
    from ..config import settings

    if problem.p < 1:
        raise UnsupportedExponentError(
            f"p = {problem.p:g} < 1 makes the program nonconvex; "
            "use a witness function (carnotmod.modulus.witness) instead"
        )
    tolerance = float(settings.SOLVER.tolerance if tolerance is None else tolerance)
    max_iter = int(settings.SOLVER.max_iter if max_iter is None else max_iter)
    method = "highs" if problem.p == 1 else "dual-lbfgs"
    ctx = SolveContext(problem, method, tolerance, max_iter)
    chain = HookChain(hooks)
    chain.run_before(ctx)
    try:
        if len(problem.empty_rows):
            solution = _infinite(problem, method)
        elif problem.shape[0] == 0:
            solution = ModulusSolution(0.0, np.zeros(problem.shape[1]), np.zeros(0), problem.p, "optimal", method)
        elif problem.p == 1:
            solution = _solve_lp(problem, tolerance)
        else:
            solution = _solve_dual(problem, tolerance, max_iter)
        logger.debug("%r -> %s", problem, solution.summary())
        if require_convergence and not solution.converged:
            raise SolverError(
                f"modulus solver stopped at KKT residual {solution.kkt_residual:.3g} "
                f"(tolerance {tolerance:g}) after {solution.iterations} iterations",
                solution.summary(),
            )
    except Exception as e:
        raise chain.run_on_error(ctx, e) from None
    return chain.run_after(ctx, solution)


def _infinite(problem: ModulusProblem, method: str) -> ModulusSolution:
    rows, cols = problem.shape
    logger.info("%d measure(s) with zero mass: admissible set is empty", len(problem.empty_rows))
    return ModulusSolution(
        np.inf,
        np.full(cols, np.inf),
        np.zeros(rows),
        problem.p,
        "infinite",
        method,
        info={"empty_rows": problem.empty_rows.tolist()},
    )


# =============================================================================
# Diagnostics shared by both methods
# =============================================================================


def _diagnose(
    problem: ModulusProblem, density: np.ndarray, duals: np.ndarray, dual_value: float
) -> dict[str, Any]:
    A, m, p = problem.constraints, problem.masses, problem.p
    load = A @ density
    lowest = float(load.min())
    infeasibility = max(0.0, 1.0 - lowest)
    feasible = density / lowest if lowest > 0 else np.full_like(density, np.inf)
    value = float(np.sum(m * feasible**p))
    gap = abs(value - dual_value) / max(abs(value), abs(dual_value), 1e-300)
    complementarity = float(np.sum(duals * np.abs(load - 1.0)) / max(float(np.sum(duals)), 1e-300))
    return {
        "density": feasible,
        "value": value,
        "infeasibility": infeasibility,
        "gap": gap,
        "kkt": max(infeasibility, complementarity, gap),
    }


# =============================================================================
# p = 1
# =============================================================================


def _solve_lp(problem: ModulusProblem, tolerance: float) -> ModulusSolution:
    rows, cols = problem.shape
    result = optimize.linprog(
        c=problem.masses,
        A_ub=-problem.constraints,
        b_ub=-np.ones(rows),
        bounds=(0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": min(1e-7, tolerance),
            "dual_feasibility_tolerance": min(1e-7, tolerance),
        },
    )
    if result.status != 0 or result.x is None:
        return ModulusSolution(
            np.nan, np.full(cols, np.nan), np.zeros(rows), 1.0, "not_converged", "highs",
            info={"message": result.message},
        )
    duals = np.maximum(-np.asarray(result.ineqlin.marginals, dtype=float), 0.0)
    report = _diagnose(problem, np.asarray(result.x, dtype=float), duals, float(np.sum(duals)))
    status = "optimal" if report["kkt"] <= tolerance else "not_converged"
    return ModulusSolution(
        report["value"],
        report["density"],
        duals,
        1.0,
        status,
        "highs",
        int(getattr(result, "nit", 0)),
        report["kkt"],
        report["gap"],
        report["infeasibility"],
        float(np.sum(duals)),
    )


# =============================================================================
# p > 1
# =============================================================================


class _Dual:
    """Negated dual objective φ(λ) and its gradient A f(λ) - 1."""

    def __init__(self, problem: ModulusProblem):
        self.A = problem.constraints
        self.At = problem.constraints.T.tocsr()
        self.m = problem.masses
        self.p = problem.p
        self.q = 1.0 / (problem.p - 1.0)

    def density(self, lam: np.ndarray) -> np.ndarray:
        s = np.maximum(self.At @ lam, 0.0)
        return (s / (self.p * self.m)) ** self.q

    def value(self, lam: np.ndarray) -> float:
        f = self.density(lam)
        return float(np.sum(lam) - (self.p - 1.0) * np.sum(self.m * f**self.p))

    def __call__(self, lam: np.ndarray) -> tuple[float, np.ndarray]:
        f = self.density(lam)
        phi = -np.sum(lam) + (self.p - 1.0) * np.sum(self.m * f**self.p)
        return float(phi), self.A @ f - 1.0

    def newton_step(self, lam: np.ndarray) -> np.ndarray:
        """Newton direction for A_S f(λ) = 1 on the active rows S."""
        s = np.maximum(self.At @ lam, 0.0)
        f = (s / (self.p * self.m)) ** self.q
        grad = self.A @ f - 1.0
        active = np.flatnonzero((lam > 0) | (grad < 0))
        step = np.zeros_like(lam)
        if not len(active):
            return step
        weight = np.divide(self.q * f, s, out=np.zeros_like(s), where=s > 0)
        rows = self.A[active]
        hessian = (rows @ sparse.diags(weight) @ rows.T).toarray()
        hessian[np.diag_indices_from(hessian)] += 1e-14 * max(1.0, float(np.max(np.diag(hessian))))
        try:
            step[active] = np.linalg.solve(hessian, -grad[active])
        except np.linalg.LinAlgError:
            step[active] = np.linalg.lstsq(hessian, -grad[active], rcond=None)[0]
        return step


def _solve_dual(problem: ModulusProblem, tolerance: float, max_iter: int) -> ModulusSolution:
    dual = _Dual(problem)
    rows, _ = problem.shape
    lam = np.ones(rows)
    iterations = 0

    def kkt(lam: np.ndarray) -> dict[str, Any]:
        return _diagnose(problem, dual.density(lam), lam, dual.value(lam))

    report = kkt(lam)
    for _ in range(5):
        if report["kkt"] <= tolerance or iterations >= max_iter:
            break
        result = optimize.minimize(
            dual,
            lam,
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, None)] * rows,
            options={
                "maxiter": max_iter - iterations,
                "maxcor": 30,
                "ftol": 1e-16,
                "gtol": 1e-12,
            },
        )
        iterations += int(result.nit)
        lam = np.maximum(result.x, 0.0)
        report = kkt(lam)
        if result.nit == 0:
            break

    # Newton polish on the active set; accepted only while the residual drops
    for _ in range(50):
        if report["kkt"] <= tolerance or iterations >= max_iter:
            break
        step = dual.newton_step(lam)
        t, improved = 1.0, False
        for _ in range(30):
            candidate = np.maximum(lam + t * step, 0.0)
            trial = kkt(candidate)
            if trial["kkt"] < report["kkt"]:
                lam, report, improved = candidate, trial, True
                break
            t *= 0.5
        iterations += 1
        if not improved:
            break

    status = "optimal" if report["kkt"] <= tolerance else "not_converged"
    return ModulusSolution(
        report["value"],
        report["density"],
        lam,
        problem.p,
        status,
        "dual-lbfgs",
        iterations,
        report["kkt"],
        report["gap"],
        report["infeasibility"],
        dual.value(lam),
    )


# =============================================================================
# Admissibility
# =============================================================================


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    margin: float
    worst_measure: int

    def __bool__(self) -> bool:
        return self.admissible


def check_admissible(
    problem: ModulusProblem, density: Any, slack: float | None = None
) -> AdmissibilityReport:
    """Whether ∫ f dμ_j >= 1 - slack for every measure and f >= 0.

    ``margin`` is min_j (∫ f dμ_j) - 1.
    """
    from ..config import settings

    slack = float(settings.SOLVER.admissibility_slack if slack is None else slack)
    density = np.asarray(density, dtype=float).reshape(-1)
    if density.shape != (problem.shape[1],):
        raise DomainError(f"density has {density.size} entries for {problem.shape[1]} cells")
    if problem.shape[0] == 0:
        return AdmissibilityReport(bool(np.all(density >= 0)), np.inf, -1)
    with np.errstate(invalid="ignore"):
        margins = problem.constraints @ density - 1.0
    margins = np.where(np.isnan(margins), -np.inf, margins)
    worst = int(np.argmin(margins))
    margin = float(margins[worst])
    return AdmissibilityReport(bool(margin >= -slack and np.all(density >= 0)), margin, worst)
