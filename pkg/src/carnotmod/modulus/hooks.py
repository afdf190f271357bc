"""
Hook system for the modulus solver.

Allows hooking into the solve lifecycle for:
- Logging and timing
- Inspecting or post-processing solutions
- Error handling
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .problem import ModulusProblem
    from .solver import ModulusSolution

logger = logging.getLogger("carnotmod.modulus")


@dataclass
class SolveContext:
    """
    Context passed to hooks containing information about one solve.
    """

    # The problem being solved
    problem: "ModulusProblem"

    # "dual-lbfgs" for p > 1, "highs" for p = 1
    method: str

    # Tolerance and iteration cap actually used
    tolerance: float = 1e-8
    max_iter: int = 100_000

    # Custom data that hooks can attach
    extra: dict[str, Any] = field(default_factory=dict)


class SolverHook:
    """
    Base class for hooks.

    All methods are no-ops by default; override the ones you need.

    Example:
        ```python
        class CountingHook(SolverHook):
            def __init__(self):
                self.solves = 0

            def after_solve(self, ctx, solution):
                self.solves += 1
                return solution
        ```
    """

    def before_solve(self, ctx: SolveContext) -> None:
        """Called before the solver starts."""
        pass

    def after_solve(self, ctx: SolveContext, solution: "ModulusSolution") -> "ModulusSolution":
        """
        Called with the finished solution.

        Returns:
            The solution to hand back (or the original if unchanged)
        """
        return solution

    def on_error(self, ctx: SolveContext, error: Exception) -> Exception:
        """
        Called when the solve raises.

        Returns:
            The exception to raise (can return a different one)
        """
        return error


class HookChain:
    """
    Manages a chain of hooks and runs them in order.
    """

    def __init__(self, hooks: list[SolverHook] | None = None):
        self._hooks = list(hooks or [])

    def add(self, hook: SolverHook) -> None:
        """Add a hook to the chain."""
        self._hooks.append(hook)

    def run_before(self, ctx: SolveContext) -> None:
        for hook in self._hooks:
            hook.before_solve(ctx)

    def run_after(self, ctx: SolveContext, solution: "ModulusSolution") -> "ModulusSolution":
        for hook in self._hooks:
            solution = hook.after_solve(ctx, solution)
        return solution

    def run_on_error(self, ctx: SolveContext, error: Exception) -> Exception:
        for hook in self._hooks:
            error = hook.on_error(ctx, error)
        return error


# =============================================================================
# Built-in Hooks
# =============================================================================


class LoggingHook(SolverHook):
    """
    Logs every solve with timing and value.

    Example output:
        [modulus] p=2 200x40000 dual-lbfgs: value 9.0647 (converged, 812 it) in 153.20ms
    """

    def __init__(self, prefix: str = "[modulus]", log_fn: Callable[[str], None] | None = None):
        self.prefix = prefix
        self.log_fn = log_fn or logger.info

    def before_solve(self, ctx: SolveContext) -> None:
        import time

        ctx.extra["_log_start"] = time.perf_counter()

    def after_solve(self, ctx: SolveContext, solution: "ModulusSolution") -> "ModulusSolution":
        import time

        elapsed_ms = (time.perf_counter() - ctx.extra.get("_log_start", 0)) * 1000
        rows, cols = ctx.problem.shape
        self.log_fn(
            f"{self.prefix} p={ctx.problem.p:g} {rows}x{cols} {ctx.method}: "
            f"value {solution.value:.6g} ({solution.status}, {solution.iterations} it) "
            f"in {elapsed_ms:.2f}ms"
        )
        return solution

    def on_error(self, ctx: SolveContext, error: Exception) -> Exception:
        self.log_fn(f"{self.prefix} p={ctx.problem.p:g} {ctx.method} failed: {error}")
        return error


class SlowSolveHook(SolverHook):
    """
    Logs a warning for solves that exceed a threshold (default: setting
    ``SOLVER.slow_solve_ms``).
    """

    def __init__(self, threshold_ms: float | None = None, log_fn: Callable[[str], None] | None = None):
        if threshold_ms is None:
            from ..config import settings

            threshold_ms = float(settings.SOLVER.slow_solve_ms)
        self.threshold_ms = threshold_ms
        self.log_fn = log_fn or logger.warning

    def before_solve(self, ctx: SolveContext) -> None:
        import time

        ctx.extra["_slow_start"] = time.perf_counter()

    def after_solve(self, ctx: SolveContext, solution: "ModulusSolution") -> "ModulusSolution":
        import time

        elapsed_ms = (time.perf_counter() - ctx.extra.get("_slow_start", 0)) * 1000
        if elapsed_ms > self.threshold_ms:
            rows, cols = ctx.problem.shape
            self.log_fn(
                f"[SLOW SOLVE] {rows}x{cols} p={ctx.problem.p:g}: {elapsed_ms:.2f}ms "
                f"(threshold: {self.threshold_ms}ms)"
            )
        return solution
