"""
Intrinsic graphs over a split G = M · H and their two natural measures.

A graph is sampled on a cell-centred grid Ω of M-parameters. The graph map is
Φ_f(m) = m · f(m) and the measures are

- μ: pushforward of the Haar measure of M (cell masses) by Φ_f;
- σ: fixed-scale spherical proxy of S^{d_m}, greedy balls of radius twice
  the homogeneous grid spacing.
"""

import json
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, field_validator
from pydantic import ValidationError as PydanticValidationError

from .algebra import HTypeAlgebra
from .errors import DomainError, StructuralError, ValidationError
from .group import GroupPoint, HomogeneousNorm, dilate_coords, multiply_coords
from .measures import DiscreteMeasure, spherical_estimate
from .parallel import chunk_slices, ordered_map
from .splits import HomogeneousSplit, c0_estimate, cone_margin_coords, coordinate_split

logger = logging.getLogger("carnotmod.graphs")


# =============================================================================
# Domain grid and graph map
# =============================================================================


@dataclass(frozen=True)
class GridSpec:
    """Cell-centred grid on a box of M-parameters.

    ``lo``, ``hi`` and ``step`` have one entry per parameter of M (horizontal
    parameters first). A dimension with ``lo == hi`` collapses to one point.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    step: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        step = tuple(float(v) for v in np.atleast_1d(self.step))
        if len(step) == 1 and len(lo) > 1:
            step = step * len(lo)
        if not (len(lo) == len(hi) == len(step)):
            raise DomainError("grid lo, hi and step must have the same length")
        if any(b < a for a, b in zip(lo, hi, strict=True)) or any(s <= 0 for s in step):
            raise DomainError("grid needs lo <= hi and positive steps")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "step", step)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def _axes(self) -> list[tuple[np.ndarray, float]]:
        axes = []
        for a, b, s in zip(self.lo, self.hi, self.step, strict=True):
            if b == a:
                axes.append((np.array([a]), 0.0))
                continue
            count = max(1, int(np.ceil((b - a) / s - 1e-9)))
            width = (b - a) / count
            axes.append((a + (np.arange(count) + 0.5) * width, width))
        return axes

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(width for _, width in self._axes())

    @property
    def degenerate(self) -> bool:
        return any(w == 0 for w in self.widths)

    @property
    def cell_mass(self) -> float:
        return float(np.prod(self.widths))

    def points(self) -> np.ndarray:
        axes = [values for values, _ in self._axes()]
        if not axes:
            return np.zeros((1, 0))
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=-1)

    def to_dict(self) -> dict[str, Any]:
        return {"lo": list(self.lo), "hi": list(self.hi), "step": list(self.step)}


@dataclass(frozen=True, eq=False)
class GraphMap:
    """f: Ω → H in split parameters.

    ``kind`` is ``"zero"``, ``"linear"`` (``matrix`` maps M-parameters to
    H-parameters), ``"table"`` (``table`` holds one H-parameter row per grid
    point, in grid order) or ``"callable"``.
    """

    kind: str = "zero"
    matrix: np.ndarray | None = None
    table: np.ndarray | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def evaluate(self, params: np.ndarray, h_dim: int) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if self.kind == "zero":
            return np.zeros((len(params), h_dim))
        if self.kind == "linear":
            matrix = np.asarray(self.matrix, dtype=float).reshape(h_dim, params.shape[1])
            return params @ matrix.T
        if self.kind == "table":
            table = np.asarray(self.table, dtype=float).reshape(-1, h_dim)
            if len(table) != len(params):
                raise DomainError(f"table has {len(table)} rows for {len(params)} grid points")
            return table
        if self.kind == "callable" and self.fn is not None:
            return np.asarray(self.fn(params), dtype=float).reshape(len(params), h_dim)
        raise DomainError(f"unknown graph map kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "linear":
            return "linear:" + json.dumps(np.asarray(self.matrix, dtype=float).tolist())
        return self.kind

    @classmethod
    def parse(cls, source: Any) -> "GraphMap":
        """From a fixture entry: "zero", "linear:<matrix>" or {"table": [...]}."""
        if isinstance(source, GraphMap):
            return source
        if source is None or source == "zero":
            return cls("zero")
        if isinstance(source, str) and source.startswith("linear:"):
            return cls("linear", matrix=np.asarray(json.loads(source[len("linear:") :]), dtype=float))
        if isinstance(source, dict) and "table" in source:
            return cls("table", table=np.asarray(source["table"], dtype=float))
        if callable(source):
            return cls("callable", fn=source)
        raise DomainError(f"cannot parse graph map {source!r}")


# =============================================================================
# Graphs
# =============================================================================


@dataclass(frozen=True, eq=False)
class GraphSample:
    """A finite point set on a graph over ``split`` (coordinates, shape (P, N))."""

    split: HomogeneousSplit
    points: np.ndarray
    label: str = ""


@dataclass(frozen=True, eq=False)
class IntrinsicGraph:
    """Graph of f over a grid Ω ⊂ M.

    Attributes:
        split: The decomposition G = M · H
        grid: Cell-centred grid of M-parameters
        f: Graph map
        L: Claimed intrinsic Lipschitz constant
    """

    split: HomogeneousSplit
    grid: GridSpec
    f: GraphMap = field(default_factory=GraphMap)
    L: float = 1.0

    def __post_init__(self) -> None:
        if self.grid.dim != self.split.d_t:
            raise StructuralError(
                f"grid has {self.grid.dim} parameters but M has dimension {self.split.d_t}"
            )

    @property
    def algebra(self) -> HTypeAlgebra:
        return self.split.algebra

    @property
    def params(self) -> np.ndarray:
        return self.grid.points()

    @property
    def m_points(self) -> np.ndarray:
        return self.split.embed_m(self.params)

    @property
    def h_points(self) -> np.ndarray:
        return self.split.embed_h(self.f.evaluate(self.params, self.split.h_d_t))

    @property
    def points(self) -> np.ndarray:
        """Φ_f(m) = m · f(m) for every grid point."""
        return multiply_coords(self.algebra, self.m_points, self.h_points)

    @property
    def homogeneous_spacing(self) -> float:
        """max(horizontal step, sqrt(vertical step)) of the grid."""
        kh, _ = self.split.m_dims
        widths = self.grid.widths
        horizontal = max(widths[:kh], default=0.0)
        vertical = max(widths[kh:], default=0.0)
        return max(horizontal, float(np.sqrt(vertical)))

    def sample(self) -> GraphSample:
        return GraphSample(self.split, self.points, f"graph {self.f.describe()}")

    def describe(self) -> dict[str, Any]:
        return {
            "split": self.split.to_dict(),
            "grid": self.grid.to_dict(),
            "f": self.f.describe(),
            "L": self.L,
        }


def translate_graph(graph: IntrinsicGraph | GraphSample, q: GroupPoint) -> GraphSample:
    """q · S as a point set."""
    graph.split.algebra.require_same(q.algebra)
    return GraphSample(graph.split, multiply_coords(q.algebra, q.coords, graph.points), "translated")


def dilate_graph(graph: IntrinsicGraph | GraphSample, lam: float) -> GraphSample:
    """δ_λ S as a point set."""
    return GraphSample(graph.split, dilate_coords(graph.split.algebra, lam, graph.points), "dilated")


# =============================================================================
# Cone condition
# =============================================================================


@dataclass(frozen=True)
class ConeReport:
    """Outcome of a pairwise cone check.

    ``margin`` is the smallest ‖P_M(p⁻¹q)‖ - ‖P_H(p⁻¹q)‖ / L over ordered pairs;
    q lies in the cone C(p, 1/L) iff its margin is negative.
    """

    passed: bool
    margin: float
    worst_pair: tuple[list[float], list[float]] | None
    checked_points: int

    def __bool__(self) -> bool:
        return self.passed


def verify_cone(
    graph: IntrinsicGraph | GraphSample,
    L: float,
    norm: HomogeneousNorm,
    max_points: int | None = None,
    threads: int | None = None,
) -> ConeReport:
    """Check C(p, 1/L) ∩ S = {p} for every sampled point p.

    Points on the boundary of a cone do not count as violations. Grids above
    ``max_points`` (setting ``GRAPHS.max_points``) are subsampled evenly.
    """
    if not L > 0:
        raise DomainError(f"Lipschitz constant must be positive, got {L}")
    if max_points is None:
        from .config import settings

        max_points = int(settings.GRAPHS.max_points)
    split = graph.split
    points = graph.points
    if len(points) == 0:
        raise DomainError("graph has no points")
    if len(points) > max_points:
        logger.warning("cone check subsampled from %d to %d points", len(points), max_points)
        points = points[np.linspace(0, len(points) - 1, max_points).round().astype(int)]
    beta = 1.0 / L

    def worst_in(rows: slice) -> tuple[float, int, int]:
        best, best_i, best_j = np.inf, -1, -1
        for i in range(rows.start, rows.stop):
            margin = cone_margin_coords(split, norm, points[i], points, beta)
            margin[i] = np.inf
            j = int(np.argmin(margin))
            if margin[j] < best:
                best, best_i, best_j = float(margin[j]), i, j
        return best, best_i, best_j

    results = ordered_map(worst_in, chunk_slices(len(points), 64), threads)
    margin, i, j = min(results, key=lambda r: r[0])
    pair = None if i < 0 else (points[i].tolist(), points[j].tolist())
    passed = not margin < 0.0
    if not passed:
        logger.debug("cone violated at margin %.3g between %s", margin, pair)
    return ConeReport(passed, margin, pair, len(points))


# =============================================================================
# Measures
# =============================================================================


@dataclass(frozen=True)
class GraphMeasures:
    """σ and μ on the graph atoms plus the comparability constants C1 <= μ/σ <= C2."""

    sigma: DiscreteMeasure
    mu: DiscreteMeasure
    c1: float
    c2: float
    scale: float

    def __iter__(self):
        return iter((self.sigma, self.mu))


def graph_measures(graph: IntrinsicGraph, norm: HomogeneousNorm | None = None) -> GraphMeasures:
    """σ_S (spherical proxy) and μ = (Φ_f)_* g_M on the same atoms.

    Raises:
        DomainError: if some grid dimension is degenerate
    """
    from .group import default_norm

    if graph.grid.degenerate:
        raise DomainError("grid spacing is degenerate in some dimension")
    norm = norm or default_norm()
    points = graph.points
    mu_weights = np.full(len(points), graph.grid.cell_mass)
    scale = 2.0 * graph.homogeneous_spacing
    sigma_weights = spherical_estimate(points, graph.algebra, norm, scale, graph.split.d_m)
    ratio = mu_weights / sigma_weights
    return GraphMeasures(
        DiscreteMeasure(graph.algebra, points, sigma_weights, "sigma"),
        DiscreteMeasure(graph.algebra, points, mu_weights, "mu"),
        float(ratio.min()),
        float(ratio.max()),
        scale,
    )


@dataclass(frozen=True)
class GraphIntegral:
    lhs: float
    rhs: float
    c1: float
    c2: float

    @property
    def within_band(self) -> bool:
        slack = 1e-12 * max(1.0, abs(self.lhs))
        return self.c1 * self.lhs - slack <= self.rhs <= self.c2 * self.lhs + slack


def integrate_on_graph(
    graph: IntrinsicGraph,
    h: Callable[[np.ndarray], np.ndarray],
    norm: HomogeneousNorm | None = None,
    measures: GraphMeasures | None = None,
) -> GraphIntegral:
    """(∫ h dσ_S, ∫ h∘Φ_f dg_M) together with the comparability constants."""
    measures = measures or graph_measures(graph, norm)
    return GraphIntegral(
        measures.sigma.integrate(h), measures.mu.integrate(h), measures.c1, measures.c2
    )


# =============================================================================
# Ahlfors regularity
# =============================================================================


def ball_graph_builder(
    split: HomogeneousSplit,
    f: GraphMap | None = None,
    L: float = 1.0,
    horizontal_cells: int = 16,
) -> Callable[[float], IntrinsicGraph]:
    """Graphs over the M-box of radius R, resolved relative to R.

    Horizontal parameters range over [-R, R] with step R / horizontal_cells and
    vertical ones over [-R², R²] with step (R / horizontal_cells)², so the grid
    at radius R is the dilation of the grid at radius 1.
    """
    kh, kv = split.m_dims
    f = f or GraphMap()

    def build(radius: float) -> IntrinsicGraph:
        h = radius / horizontal_cells
        lo = (-radius,) * kh + (-(radius**2),) * kv
        hi = (radius,) * kh + (radius**2,) * kv
        step = (h,) * kh + (h * h,) * kv
        return IntrinsicGraph(split, GridSpec(lo, hi, step), f, L)

    return build


@dataclass(frozen=True)
class AhlforsProfile:
    radii: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    dimension: int
    c0: float
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @property
    def within_band(self) -> bool:
        return all(
            lo <= v <= hi for v, lo, hi in zip(self.values, self.lower, self.upper, strict=True)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "radii": list(self.radii),
            "values": list(self.values),
            "slope": self.slope,
            "dimension": self.dimension,
            "c0": self.c0,
            "lower": list(self.lower),
            "upper": list(self.upper),
            "within_band": self.within_band,
        }


def ahlfors_profile(
    graph_builder: Callable[[float], IntrinsicGraph],
    radii: list[float] | tuple[float, ...],
    norm: HomogeneousNorm,
    c0: float | None = None,
    c0_samples: int = 10_000,
    seed: int = 0,
    upper_constant: float | None = None,
    threads: int | None = None,
) -> AhlforsProfile:
    """σ(S ∩ B(e, R)) over radii, with the log-log slope and the band

        (c0 / (1 + L))^{d_m} R^{d_m} <= σ(S ∩ B(e, R)) <= C (1 + L)^{d_m} R^{d_m}.
    """
    radii = tuple(float(r) for r in radii)
    if len(radii) < 2 or any(r <= 0 for r in radii):
        raise DomainError("ahlfors_profile needs at least two positive radii")
    if upper_constant is None:
        from .config import settings

        upper_constant = float(settings.AHLFORS.upper_constant)
    graphs = [graph_builder(r) for r in radii]
    split = graphs[0].split
    d_m = split.d_m
    L = graphs[0].L
    if c0 is None:
        c0 = c0_estimate(split, norm, c0_samples, seed)

    def ball_sigma(item: tuple[float, IntrinsicGraph]) -> float:
        radius, graph = item
        sigma = graph_measures(graph, norm).sigma
        return sigma.ball_mass(np.zeros(graph.algebra.N), radius, norm)

    values = tuple(ordered_map(ball_sigma, list(zip(radii, graphs, strict=True)), threads))
    slope = float(np.polyfit(np.log(radii), np.log(values), 1)[0])
    lower = tuple((c0 / (1.0 + L)) ** d_m * r**d_m for r in radii)
    upper = tuple(upper_constant * (1.0 + L) ** d_m * r**d_m for r in radii)
    return AhlforsProfile(radii, values, slope, d_m, c0, lower, upper)


# =============================================================================
# Fixtures
# =============================================================================


class _SplitModel(BaseModel):
    M_h: list[int] = Field(default_factory=list)
    M_v: list[int] = Field(default_factory=list)


class _GridModel(BaseModel):
    lo: list[float]
    hi: list[float]
    step: list[float] | float


class GraphFixture(BaseModel):
    """JSON fixture describing a sampled intrinsic graph."""

    algebra: dict[str, Any] = Field(default_factory=lambda: {"kind": "hR", "n": 1})
    split: _SplitModel
    grid: _GridModel
    f: str | dict[str, Any] = "zero"
    L: float = 1.0

    @field_validator("L")
    @classmethod
    def _positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("L must be positive")
        return value


def load_graph_fixture(source: str | Path | dict[str, Any]) -> IntrinsicGraph:
    """Build an IntrinsicGraph from a JSON file or an already parsed dict.

    Example:
        ```python
        graph = load_graph_fixture({
            "algebra": {"kind": "hR", "n": 1},
            "split": {"M_h": [1], "M_v": [0]},
            "grid": {"lo": [-1, -1], "hi": [1, 1], "step": 0.1},
            "f": "linear:[[1, 0]]",
            "L": 2,
        })
        ```

    Raises:
        ValidationError: if the fixture does not match the schema
    """
    if not isinstance(source, dict):
        source = json.loads(Path(source).read_text(encoding="utf-8"))
    try:
        fixture = GraphFixture.model_validate(source)
    except PydanticValidationError as e:
        raise ValidationError(f"Graph fixture validation failed: {e}", e.errors()) from e
    algebra = HTypeAlgebra.from_dict(fixture.algebra)
    split = coordinate_split(algebra, fixture.split.M_h, fixture.split.M_v)
    step = fixture.grid.step
    grid = GridSpec(tuple(fixture.grid.lo), tuple(fixture.grid.hi), tuple(np.atleast_1d(step)))
    return IntrinsicGraph(split, grid, GraphMap.parse(fixture.f), fixture.L)
