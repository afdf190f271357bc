"""
Discrete measures and fixed-scale covering estimators.

Point sets are coordinate arrays of shape (P, N). Ball queries go through a
``scipy.spatial.cKDTree`` on the Euclidean coordinates, prefiltered with the
Euclidean reach of a homogeneous ball (see ``HomogeneousNorm.euclidean_reach``)
and then checked exactly with the group distance.
"""

import csv
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.spatial import cKDTree

from .algebra import HTypeAlgebra
from .errors import DomainError
from .group import (
    GroupPoint,
    HomogeneousNorm,
    dilate_coords,
    distance_coords,
    multiply_coords,
)
from .parallel import chunk_slices, ordered_map, tree_sum
from .splits import HomogeneousSplit

logger = logging.getLogger("carnotmod.measures")


# =============================================================================
# Discrete measures
# =============================================================================


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite sum of weighted atoms Σ w_i δ_{p_i}.

    Attributes:
        algebra: Group the atoms live on
        points: Atom coordinates, shape (P, N)
        weights: Nonnegative weights, shape (P,)
        label: Provenance ("sigma", "mu", "segment", ...)
    """

    algebra: HTypeAlgebra
    points: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).reshape(-1, self.algebra.N)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(points) != len(weights):
            raise DomainError(f"{len(points)} atoms but {len(weights)} weights")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("weights must be finite and nonnegative")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return tree_sum(self.weights)

    def ball_mass(self, center: GroupPoint | np.ndarray, radius: float, norm: HomogeneousNorm) -> float:
        """μ(B(center, radius)) with closed balls."""
        if len(self) == 0:
            return 0.0
        c = center.coords if isinstance(center, GroupPoint) else np.asarray(center, dtype=float)
        inside = distance_coords(self.algebra, norm, self.points, c) <= radius
        return float(np.sum(self.weights[inside]))

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.dot(np.asarray(fn(self.points), dtype=float), self.weights))

    def pushforward(self, fn: Callable[[np.ndarray], np.ndarray], label: str | None = None) -> "DiscreteMeasure":
        """Image measure under a map acting on coordinate arrays."""
        return DiscreteMeasure(
            self.algebra, fn(self.points), self.weights.copy(), label or f"{self.label}*"
        )

    def translate(self, q: GroupPoint) -> "DiscreteMeasure":
        """Left translate q · μ."""
        self.algebra.require_same(q.algebra)
        return self.pushforward(
            lambda points: multiply_coords(self.algebra, q.coords, points),
            label=self.label,
        )

    def dilate(self, lam: float) -> "DiscreteMeasure":
        return self.pushforward(lambda points: dilate_coords(self.algebra, lam, points), label=self.label)

    def save_records(self, path: str | Path) -> None:
        """One atom per line: coordinates, then weight."""
        rows = np.column_stack([self.points, self.weights]) if len(self) else np.zeros((0, self.algebra.N + 1))
        np.savetxt(path, rows, fmt="%.17g")

    @classmethod
    def load_records(cls, path: str | Path, algebra: HTypeAlgebra, label: str = "") -> "DiscreteMeasure":
        rows = np.loadtxt(path, ndmin=2)
        if rows.size == 0:
            return cls(algebra, np.zeros((0, algebra.N)), np.zeros(0), label)
        if rows.shape[1] != algebra.N + 1:
            raise DomainError(f"records have {rows.shape[1]} columns, expected {algebra.N + 1}")
        return cls(algebra, rows[:, :-1], rows[:, -1], label or Path(path).stem)


# =============================================================================
# Greedy covers
# =============================================================================


@dataclass(frozen=True)
class Cover:
    """Result of a greedy ball cover.

    Attributes:
        centers: Indices of the points used as ball centres, in construction order
        assignment: For every point, the position (in ``centers``) of its ball
        radius: Ball radius
    """

    centers: np.ndarray
    assignment: np.ndarray
    radius: float

    @property
    def count(self) -> int:
        return len(self.centers)


def greedy_cover(
    points: np.ndarray,
    radius: float,
    algebra: HTypeAlgebra,
    norm: HomogeneousNorm,
) -> Cover:
    """Cover ``points`` by closed balls B(p_c, radius) centred at points of the set.

    The first uncovered point (in input order) becomes the next centre and
    takes every uncovered point of its ball.
    """
    if not radius > 0:
        raise DomainError(f"cover radius must be positive, got {radius}")
    points = np.asarray(points, dtype=float).reshape(-1, algebra.N)
    total = len(points)
    assignment = np.full(total, -1, dtype=np.int64)
    if total == 0:
        return Cover(np.zeros(0, dtype=np.int64), assignment, radius)
    x_bound = float(np.max(np.linalg.norm(points[:, : algebra.m1], axis=1))) if algebra.m1 else 0.0
    reach = norm.euclidean_reach(radius, x_bound) * (1.0 + 1e-9)
    tree = cKDTree(points)
    centers: list[int] = []
    for i in range(total):
        if assignment[i] >= 0:
            continue
        candidates = np.asarray(tree.query_ball_point(points[i], reach), dtype=np.int64)
        candidates = candidates[assignment[candidates] < 0]
        d = distance_coords(algebra, norm, points[candidates], points[i])
        assignment[candidates[d <= radius]] = len(centers)
        assignment[i] = len(centers)
        centers.append(i)
    return Cover(np.asarray(centers, dtype=np.int64), assignment, radius)


@dataclass(frozen=True)
class CoveringEstimate:
    """Fixed-scale covering value count · δ^m."""

    scale: float
    count: int
    dimension: float
    value: float

    @classmethod
    def from_cover(cls, cover: Cover, dimension: float) -> "CoveringEstimate":
        return cls(cover.radius, cover.count, dimension, cover.count * cover.radius**dimension)

    def to_dict(self) -> dict[str, Any]:
        return {"scale": self.scale, "count": self.count, "value": self.value}


def write_estimates_csv(estimates: list[CoveringEstimate], path: str | Path) -> None:
    """CSV with columns scale, count, value."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["scale", "count", "value"])
        writer.writeheader()
        for estimate in estimates:
            writer.writerow(estimate.to_dict())


def spherical_estimate(
    points: np.ndarray,
    algebra: HTypeAlgebra,
    norm: HomogeneousNorm,
    scale: float,
    dimension: float,
) -> np.ndarray:
    """Per-atom weights of the fixed-scale spherical proxy of S^dimension.

    Each greedy ball of radius ``scale`` contributes (2·scale)^dimension, shared
    equally by the atoms assigned to it.
    """
    cover = greedy_cover(points, scale, algebra, norm)
    if cover.count == 0:
        return np.zeros(0)
    members = np.bincount(cover.assignment, minlength=cover.count)
    return (2.0 * scale) ** dimension / members[cover.assignment]


# =============================================================================
# Estimators
# =============================================================================


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    scales: tuple[float, ...]
    counts: tuple[int, ...]

    def estimates(self, dimension: float | None = None) -> list[CoveringEstimate]:
        m = self.slope if dimension is None else dimension
        return [
            CoveringEstimate(s, c, m, c * s**m) for s, c in zip(self.scales, self.counts, strict=True)
        ]


def box_dimension(
    points: np.ndarray,
    algebra: HTypeAlgebra,
    norm: HomogeneousNorm,
    scales: list[float] | tuple[float, ...],
    threads: int | None = None,
) -> DimensionEstimate:
    """Metric dimension from greedy cover counts: slope of log N(δ) against -log δ.

    Raises:
        DomainError: fewer than two scales, or a nonpositive scale
    """
    scales = tuple(float(s) for s in scales)
    if len(scales) < 2:
        raise DomainError("box_dimension needs at least two scales")
    if any(s <= 0 for s in scales):
        raise DomainError("scales must be positive")
    points = np.asarray(points, dtype=float).reshape(-1, algebra.N)
    counts = tuple(
        ordered_map(lambda s: greedy_cover(points, s, algebra, norm).count, scales, threads)
    )
    if len(np.unique(points, axis=0)) <= 1:
        return DimensionEstimate(0.0, scales, counts)
    slope = float(np.polyfit(-np.log(scales), np.log(counts), 1)[0])
    logger.debug("box dimension %.3f from counts %s", slope, counts)
    return DimensionEstimate(slope, scales, counts)


@dataclass(frozen=True)
class DensityEstimate:
    lower: float
    upper: float
    ratios: tuple[float, ...] = field(default=())


def density(
    mu: DiscreteMeasure,
    x: GroupPoint,
    h: float,
    radii: list[float] | tuple[float, ...],
    norm: HomogeneousNorm,
) -> DensityEstimate:
    """min and max of μ(B(x, r)) / r^h over the given radii."""
    if not h > 0:
        raise DomainError(f"density exponent must be positive, got {h}")
    radii = tuple(float(r) for r in radii)
    if not radii or any(r <= 0 for r in radii):
        raise DomainError("radii must be positive")
    if any(b > a for a, b in zip(radii, radii[1:], strict=False)):
        raise DomainError("radii must be decreasing")
    if len(mu) == 0:
        return DensityEstimate(0.0, 0.0, tuple(0.0 for _ in radii))
    ratios = tuple(mu.ball_mass(x, r, norm) / r**h for r in radii)
    return DensityEstimate(min(ratios), max(ratios), ratios)


def haar_scaling_check(algebra: HTypeAlgebra, lam: float, lo: Any, hi: Any) -> float:
    """vol(δ_λ E) / vol(E) for the coordinate box E = [lo, hi]."""
    lo = np.asarray(lo, dtype=float).reshape(algebra.N)
    hi = np.asarray(hi, dtype=float).reshape(algebra.N)
    if np.any(hi <= lo):
        raise DomainError("box is degenerate")
    image_lo = dilate_coords(algebra, lam, lo)
    image_hi = dilate_coords(algebra, lam, hi)
    return float(np.prod((image_hi - image_lo) / (hi - lo)))


# =============================================================================
# Coset Fubini
# =============================================================================


@dataclass(frozen=True)
class FubiniReport:
    lhs: float
    rhs: float
    step: float

    @property
    def relative_error(self) -> float:
        if self.lhs == 0:
            return 0.0 if self.rhs == 0 else np.inf
        return abs(self.lhs - self.rhs) / abs(self.lhs)


def _centres(lo: np.ndarray, hi: np.ndarray, step: float) -> tuple[list[np.ndarray], np.ndarray]:
    axes, widths = [], []
    for a, b in zip(lo, hi, strict=True):
        count = max(1, int(np.ceil((b - a) / step - 1e-9)))
        width = (b - a) / count
        axes.append(a + (np.arange(count) + 0.5) * width)
        widths.append(width)
    return axes, np.asarray(widths)


def _mesh(axes: list[np.ndarray]) -> np.ndarray:
    if not axes:
        return np.zeros((1, 0))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def coset_fubini(
    split: HomogeneousSplit,
    kappa: Callable[[np.ndarray], np.ndarray],
    lo: Any,
    hi: Any,
    step: float,
    threads: int | None = None,
    chunk: int = 4096,
) -> FubiniReport:
    """Compare ∫_G κ with the iterated integral over M and the coset space M\\G.

    ``lhs`` is the midpoint Riemann sum of κ over the coordinate box [lo, hi];
    ``rhs`` sums κ(m · h) over an H-parameter grid (the cosets) and an
    M-parameter grid, both large enough to contain the box.

    Raises:
        DomainError: if κ does not vanish on the boundary of the box
    """
    algebra = split.algebra
    lo = np.asarray(lo, dtype=float).reshape(algebra.N)
    hi = np.asarray(hi, dtype=float).reshape(algebra.N)
    if np.any(hi <= lo) or not step > 0:
        raise DomainError("coset_fubini needs a nondegenerate box and a positive step")

    axes, widths = _centres(lo, hi, step)
    nodes = _mesh(axes)
    peak = max(
        ordered_map(
            lambda rows: float(np.max(np.abs(kappa(nodes[rows])), initial=0.0)),
            chunk_slices(len(nodes), chunk),
            threads,
        )
    )
    if np.max(np.abs(kappa(_box_boundary(lo, hi, step)))) > 1e-10 * max(1.0, peak):
        raise DomainError("integrand does not vanish on the boundary of the box")
    lhs = _chunked_sum(kappa, nodes, chunk, threads) * float(np.prod(widths))

    m_lo, m_hi, h_lo, h_hi = _parameter_boxes(split, lo, hi)
    m_axes, m_widths = _centres(m_lo, m_hi, step)
    h_axes, h_widths = _centres(h_lo, h_hi, step)
    m_coords = split.embed_m(_mesh(m_axes))
    h_coords = split.embed_h(_mesh(h_axes))

    def coset_sum(rows: slice) -> float:
        products = multiply_coords(algebra, m_coords[None, :, :], h_coords[rows, None, :])
        return float(np.sum(kappa(products.reshape(-1, algebra.N))))

    per_chunk = max(1, chunk // max(1, len(m_coords)))
    partial = ordered_map(coset_sum, chunk_slices(len(h_coords), per_chunk), threads)
    rhs = tree_sum(partial) * float(np.prod(m_widths) * np.prod(h_widths))
    return FubiniReport(lhs, rhs, step)


def _chunked_sum(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray, chunk: int, threads: int | None) -> float:
    partial = ordered_map(
        lambda rows: float(np.sum(fn(points[rows]))), chunk_slices(len(points), chunk), threads
    )
    return tree_sum(partial)


def _box_boundary(lo: np.ndarray, hi: np.ndarray, step: float) -> np.ndarray:
    faces = []
    for axis in range(len(lo)):
        for value in (lo[axis], hi[axis]):
            axes = [
                np.array([value]) if other == axis else np.linspace(lo[other], hi[other], max(2, int((hi[other] - lo[other]) / step) + 1))
                for other in range(len(lo))
            ]
            faces.append(_mesh(axes))
    return np.vstack(faces)


def _parameter_boxes(split: HomogeneousSplit, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, ...]:
    """Parameter boxes of M and H containing the factors of every point of [lo, hi]."""
    m1 = split.algebra.m1
    corners = _mesh([np.array([a, b]) for a, b in zip(lo, hi, strict=True)])
    x_corners, t_corners = corners[:, :m1], corners[:, m1:]

    def bounds(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return values.min(axis=0), values.max(axis=0)

    xm_lo, xm_hi = bounds(x_corners @ split.m_h)
    xh_lo, xh_hi = bounds(x_corners @ split.h_h)
    # |[x_m, x_h]| <= |x_m| |x_h|
    xm_radius = float(np.max(np.linalg.norm(x_corners @ split.m_h, axis=1), initial=0.0))
    xh_radius = float(np.max(np.linalg.norm(x_corners @ split.h_h, axis=1), initial=0.0))
    shear = 0.5 * xm_radius * xh_radius
    tm_lo, tm_hi = bounds(t_corners @ split.m_v) if split.m_v.shape[1] else (np.zeros(0), np.zeros(0))
    th_lo, th_hi = bounds(t_corners @ split.h_v) if split.h_v.shape[1] else (np.zeros(0), np.zeros(0))
    return (
        np.concatenate([xm_lo, tm_lo - shear]),
        np.concatenate([xm_hi, tm_hi + shear]),
        np.concatenate([xh_lo, th_lo - shear]),
        np.concatenate([xh_hi, th_hi + shear]),
    )
