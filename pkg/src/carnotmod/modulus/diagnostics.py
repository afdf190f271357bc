"""Integrability and divergence diagnostics for witness functions."""

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import DomainError
from ..graphs import GraphMeasures, IntrinsicGraph, graph_measures
from ..group import HomogeneousNorm
from ..parallel import chunk_slices, ordered_map, tree_sum
from .witness import WitnessFunction

logger = logging.getLogger("carnotmod.modulus")


@dataclass(frozen=True)
class LpEstimate:
    """Riemann-sum estimates of ∫ F^p over successively finer grids."""

    p: float
    steps: tuple[float, ...]
    values: tuple[float, ...]
    relative_changes: tuple[float, ...]
    log_slope: float
    verdict: str

    @property
    def value(self) -> float:
        return self.values[-1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "steps": list(self.steps),
            "values": list(self.values),
            "relative_changes": list(self.relative_changes),
            "log_slope": self.log_slope,
            "verdict": self.verdict,
        }


def _cell_centres(lo: np.ndarray, hi: np.ndarray, step: float) -> tuple[list[np.ndarray], float]:
    axes, volume = [], 1.0
    for a, b in zip(lo, hi, strict=True):
        count = max(1, int(np.ceil((b - a) / step - 1e-9)))
        width = (b - a) / count
        axes.append(a + (np.arange(count) + 0.5) * width)
        volume *= width
    return axes, volume


def lp_norm_estimate(
    w: WitnessFunction,
    p: float,
    lo: Any,
    hi: Any,
    step: float,
    levels: int | None = None,
    relative_change: float | None = None,
    threads: int | None = None,
    chunk: int = 65_536,
) -> LpEstimate:
    """∫ F^p dg over the box [lo, hi] at steps h, h/2, h/4, ...

    Cells whose centre has norm below the current step are dropped (the
    singular core), as are cells where F is infinite. The verdict is
    "converging" when every successive relative change is below
    ``relative_change`` (setting ``REFINEMENT.relative_change``).
    """
    from ..config import settings

    if not p > 0:
        raise DomainError(f"exponent must be positive, got {p}")
    levels = int(settings.REFINEMENT.levels if levels is None else levels)
    threshold = float(settings.REFINEMENT.relative_change if relative_change is None else relative_change)
    if levels < 2:
        raise DomainError("need at least two refinement levels")
    algebra = w.algebra
    lo = np.asarray(lo, dtype=float).reshape(algebra.N)
    hi = np.asarray(hi, dtype=float).reshape(algebra.N)
    norm: HomogeneousNorm | None = getattr(w, "norm", None)

    steps, values = [], []
    for level in range(levels):
        h = step / 2**level
        axes, volume = _cell_centres(lo, hi, h)
        shape = tuple(len(a) for a in axes)
        total = int(np.prod(shape))

        def partial(rows: slice, axes=axes, shape=shape, h=h) -> float:
            index = np.unravel_index(np.arange(rows.start, rows.stop), shape)
            centres = np.stack([axes[k][index[k]] for k in range(len(axes))], axis=-1)
            values = np.power(w.evaluate(centres), p)
            keep = np.isfinite(values)
            if norm is not None:
                keep &= norm.evaluate(algebra, centres) >= h
            return float(np.sum(values[keep]))

        estimate = tree_sum(ordered_map(partial, chunk_slices(total, chunk), threads)) * volume
        steps.append(h)
        values.append(estimate)
        logger.debug("L^%g estimate %.6g at step %g", p, estimate, h)

    changes = tuple(
        abs(b - a) / abs(a) if a != 0 else (0.0 if b == 0 else np.inf)
        for a, b in zip(values, values[1:], strict=False)
    )
    positive = [v > 0 for v in values]
    slope = (
        float(np.polyfit(-np.log(steps), np.log(values), 1)[0]) if all(positive) else 0.0
    )
    verdict = "converging" if all(c < threshold for c in changes) else "diverging"
    if verdict == "diverging":
        logger.warning("L^%g estimate did not settle: relative changes %s", p, changes)
    return LpEstimate(float(p), tuple(steps), tuple(values), changes, slope, verdict)


@dataclass(frozen=True)
class SurfaceDivergence:
    """Per-ring contributions of ∫ F dσ_S on the dyadic rings around e."""

    ring_sums: tuple[float, ...]
    partial_sums: tuple[float, ...]
    depth: int
    decay_exponent: float
    verdict: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "ring_sums": list(self.ring_sums),
            "partial_sums": list(self.partial_sums),
            "depth": self.depth,
            "decay_exponent": self.decay_exponent,
            "verdict": self.verdict,
        }


def surface_divergence_check(
    w: WitnessFunction,
    graph: IntrinsicGraph,
    rings: int = 6,
    norm: HomogeneousNorm | None = None,
    min_ring_atoms: int | None = None,
    measures: GraphMeasures | None = None,
) -> SurfaceDivergence:
    """Ring sums Σ_{p ∈ R_j} F(p) σ_p over R_j = B(e, 2^{-j}) \\ B(e, 2^{-j-1}), j = 1..rings.

    The ring sums are fitted against (j + 3/2)^{-a} (ring j spans
    ln(2/‖g‖) ∈ [(j+1) ln 2, (j+2) ln 2]); the surface integral is
    "diverging" when a <= 1 (the partial sums grow without bound) and
    "converging" otherwise. Rings with too few atoms stop the scan.

    Raises:
        DomainError: if rings < 3 or the graph does not pass through the identity
    """
    from ..config import settings
    from ..group import default_norm

    if rings < 3:
        raise DomainError("surface_divergence_check needs at least 3 rings")
    min_ring_atoms = int(settings.GRAPHS.min_ring_atoms if min_ring_atoms is None else min_ring_atoms)
    norm = norm or getattr(w, "norm", None) or default_norm()
    measures = measures or graph_measures(graph, norm)
    points, weights = measures.sigma.points, measures.sigma.weights
    radius = norm.evaluate(graph.algebra, points)
    if radius.min() > 2.0 * graph.homogeneous_spacing:
        raise DomainError("graph does not pass through the identity")
    values = w.evaluate(points)

    sums = []
    for j in range(1, rings + 1):
        ring = (radius <= 2.0**-j) & (radius > 2.0 ** (-j - 1))
        if np.count_nonzero(ring) < min_ring_atoms:
            logger.warning(
                "ring %d has %d atoms (< %d); depth truncated to %d",
                j, np.count_nonzero(ring), min_ring_atoms, j - 1,
            )
            break
        sums.append(float(np.sum(values[ring] * weights[ring])))
    partial = tuple(np.cumsum(sums).tolist())
    positive = [(j + 1, s) for j, s in enumerate(sums) if s > 0]
    if len(positive) < 2:
        return SurfaceDivergence(tuple(sums), partial, len(sums), np.inf, "converging")
    js, ss = zip(*positive, strict=True)
    slope = float(np.polyfit(np.log(np.asarray(js) + 1.5), np.log(ss), 1)[0])
    decay = -slope
    verdict = "diverging" if decay <= 1.0 else "converging"
    return SurfaceDivergence(tuple(sums), partial, len(sums), decay, verdict)
