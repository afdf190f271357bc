"""
Group arithmetic on step-2 Carnot groups in exponential coordinates.

A point is g = (x, t) with x in R^{m1} and t in R^{m2}; the product is the
exact Baker-Campbell-Hausdorff formula at step two

    a · b = (x_a + x_b, t_a + t_b + ½ [x_a, x_b]).

Most functions come in two flavours: ``GroupPoint`` methods for single points
and ``*_coords`` functions working on arrays of shape (..., N) for batches.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from .algebra import HTypeAlgebra
from .errors import DomainError, StructuralError, UnsupportedError
from .rng import SeedLike, generator


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """A point (x, t) of the group of ``algebra``."""

    x: np.ndarray
    t: np.ndarray
    algebra: HTypeAlgebra

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).reshape(-1)
        t = np.asarray(self.t, dtype=float).reshape(-1)
        if x.shape != (self.algebra.m1,) or t.shape != (self.algebra.m2,):
            raise StructuralError(
                f"coordinates of shape {x.shape}+{t.shape} do not fit {self.algebra!r}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls, algebra: HTypeAlgebra) -> "GroupPoint":
        return cls(np.zeros(algebra.m1), np.zeros(algebra.m2), algebra)

    @classmethod
    def from_coords(cls, algebra: HTypeAlgebra, coords: Any) -> "GroupPoint":
        """Build from the flat serialization [x..., t...]."""
        coords = np.asarray(coords, dtype=float).reshape(-1)
        if coords.shape != (algebra.N,):
            raise StructuralError(f"expected {algebra.N} coordinates, got {coords.size}")
        return cls(coords[: algebra.m1], coords[algebra.m1 :], algebra)

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.x, self.t])

    def to_list(self) -> list[float]:
        return self.coords.tolist()

    def __mul__(self, other: "GroupPoint") -> "GroupPoint":
        return multiply(self, other)

    def inverse(self) -> "GroupPoint":
        return GroupPoint(-self.x, -self.t, self.algebra)

    def __repr__(self) -> str:
        return f"GroupPoint({self.to_list()})"


# =============================================================================
# Batched coordinate arithmetic
# =============================================================================


def multiply_coords(algebra: HTypeAlgebra, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Group product on coordinate arrays of shape (..., N); broadcasts."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m1 = algebra.m1
    xa, ta = a[..., :m1], a[..., m1:]
    xb, tb = b[..., :m1], b[..., m1:]
    t = ta + tb + 0.5 * algebra.bracket(xa, xb)
    x = np.broadcast_to(xa + xb, t.shape[:-1] + (m1,))
    return np.concatenate([x, t], axis=-1)


def inverse_coords(coords: np.ndarray) -> np.ndarray:
    return -np.asarray(coords, dtype=float)


def dilate_coords(algebra: HTypeAlgebra, lam: float, coords: np.ndarray) -> np.ndarray:
    if not lam > 0:
        raise DomainError(f"dilation factor must be positive, got {lam}")
    coords = np.array(coords, dtype=float)
    coords[..., : algebra.m1] *= lam
    coords[..., algebra.m1 :] *= lam * lam
    return coords


# =============================================================================
# Operations on points
# =============================================================================


def multiply(a: GroupPoint, b: GroupPoint) -> GroupPoint:
    """a · b.

    Raises:
        StructuralError: if a and b live on different algebras
    """
    a.algebra.require_same(b.algebra)
    t = a.t + b.t + 0.5 * a.algebra.bracket(a.x, b.x)
    return GroupPoint(a.x + b.x, t, a.algebra)


def inverse(g: GroupPoint) -> GroupPoint:
    return g.inverse()


def dilate(lam: float, g: GroupPoint) -> GroupPoint:
    """δ_λ g = (λ x, λ² t).

    Raises:
        DomainError: if λ <= 0
    """
    if not lam > 0:
        raise DomainError(f"dilation factor must be positive, got {lam}")
    return GroupPoint(lam * g.x, lam * lam * g.t, g.algebra)


class NormKind(str, Enum):
    MAX_HOMOG = "max"
    CYGAN = "cygan"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class HomogeneousNorm:
    """Gauge on the group.

    ``MAX_HOMOG`` is max(ε1 |x|, ε2 |t|^{1/2}), ``CYGAN`` is
    (|x|^4 + 16 |t|^2)^{1/4} and ``EUCLIDEAN`` the plain coordinate norm.
    Only the first two are homogeneous under dilations.
    """

    kind: NormKind = NormKind.MAX_HOMOG
    epsilon1: float = 1.0
    epsilon2: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NormKind(self.kind))
        if not (self.epsilon1 > 0 and self.epsilon2 > 0):
            raise DomainError("norm constants must be positive")

    @property
    def homogeneous(self) -> bool:
        return self.kind is not NormKind.EUCLIDEAN

    def evaluate(self, algebra: HTypeAlgebra, coords: np.ndarray) -> np.ndarray:
        """Norms of coordinate rows, shape (...,)."""
        coords = np.asarray(coords, dtype=float)
        x = np.linalg.norm(coords[..., : algebra.m1], axis=-1)
        t = np.linalg.norm(coords[..., algebra.m1 :], axis=-1)
        if self.kind is NormKind.MAX_HOMOG:
            return np.maximum(self.epsilon1 * x, self.epsilon2 * np.sqrt(t))
        if self.kind is NormKind.CYGAN:
            return (x**4 + 16.0 * t**2) ** 0.25
        return np.hypot(x, t)

    def __call__(self, g: GroupPoint) -> float:
        return float(self.evaluate(g.algebra, g.coords))

    def scale(self, algebra: HTypeAlgebra, lam: float, coords: np.ndarray) -> np.ndarray:
        """Map that multiplies this norm by ``lam``: δ_λ, or plain scaling for EUCLIDEAN."""
        if self.homogeneous:
            return dilate_coords(algebra, lam, coords)
        return lam * np.asarray(coords, dtype=float)

    def euclidean_reach(self, radius: float, x_bound: float) -> float:
        """Euclidean radius of a set containing every ball B(g, radius) around g with |x_g| <= x_bound.

        Used to prefilter ball queries with a KD-tree.
        """
        if self.kind is NormKind.MAX_HOMOG:
            hx, ht = radius / self.epsilon1, (radius / self.epsilon2) ** 2
        elif self.kind is NormKind.CYGAN:
            hx, ht = radius, radius * radius / 4.0
        else:
            return radius
        return float(np.hypot(hx, ht + 0.5 * x_bound * hx))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "epsilon": [self.epsilon1, self.epsilon2]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HomogeneousNorm":
        eps = data.get("epsilon", [1.0, 1.0])
        return cls(NormKind(data.get("kind", "max")), float(eps[0]), float(eps[1]))


def default_norm() -> HomogeneousNorm:
    """MaxHomog with the configured constants."""
    from .config import settings

    return HomogeneousNorm(
        NormKind.MAX_HOMOG,
        float(settings.NORM.epsilon1),
        float(settings.NORM.epsilon2),
    )


def norm(g: GroupPoint, kind: HomogeneousNorm | None = None) -> float:
    return (kind or default_norm())(g)


def distance_coords(
    algebra: HTypeAlgebra, kind: HomogeneousNorm, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """d(a, b) = ‖b⁻¹ · a‖ on coordinate arrays; broadcasts."""
    return kind.evaluate(algebra, multiply_coords(algebra, inverse_coords(b), a))


def distance(a: GroupPoint, b: GroupPoint, kind: HomogeneousNorm | None = None) -> float:
    """Left-invariant distance ‖b⁻¹ · a‖.

    Raises:
        StructuralError: if a and b live on different algebras
    """
    a.algebra.require_same(b.algebra)
    kind = kind or default_norm()
    return float(distance_coords(a.algebra, kind, a.coords, b.coords))


# =============================================================================
# Left-invariant frame and horizontality
# =============================================================================


def frame(algebra: HTypeAlgebra, g: GroupPoint) -> np.ndarray:
    """Left-invariant frame at g as an N×N matrix whose columns are the fields.

    Column j < m1 is X_j(g) = (e_j, ½ [x, e_j]); the vertical columns are the
    coordinate directions of the centre.

    Raises:
        UnsupportedError: for generic algebras
    """
    from .algebra import AlgebraKind

    if algebra.kind is AlgebraKind.GENERIC:
        raise UnsupportedError("frame tables exist only for the Heisenberg families")
    algebra.require_same(g.algebra)
    m1 = algebra.m1
    F = np.eye(algebra.N)
    # [x, e_j]_a = (J_a x)_j
    F[m1:, :m1] = 0.5 * np.einsum("aji,i->aj", algebra.J, g.x)
    return F


@dataclass(frozen=True)
class HorizontalityReport:
    horizontal: bool
    max_defect: float
    defects: np.ndarray

    def __bool__(self) -> bool:
        return self.horizontal


def is_horizontal(
    curve: list[GroupPoint] | np.ndarray,
    tol: float = 1e-6,
    step: float = 1.0,
    algebra: HTypeAlgebra | None = None,
) -> HorizontalityReport:
    """Check that a sampled curve is horizontal.

    Velocities are central differences at interior samples and are expressed in
    the frame at that sample; the defect is the size of the vertical
    coefficients v_t - ½ [x, v_x].

    Args:
        curve: GroupPoints, or an (S, N) coordinate array together with ``algebra``
        tol: Largest vertical coefficient still counted as horizontal
        step: Parameter spacing between samples

    Raises:
        DomainError: fewer than 3 samples
    """
    if isinstance(curve, np.ndarray):
        if algebra is None:
            raise StructuralError("coordinate curves need an algebra")
        coords = np.asarray(curve, dtype=float)
    else:
        if not curve:
            raise DomainError("curve has no samples")
        algebra = curve[0].algebra
        for point in curve:
            algebra.require_same(point.algebra)
        coords = np.stack([p.coords for p in curve])
    if coords.shape[0] < 3:
        raise DomainError("horizontality needs at least 3 samples")
    m1 = algebra.m1
    velocity = (coords[2:] - coords[:-2]) / (2.0 * step)
    x = coords[1:-1, :m1]
    vertical = velocity[:, m1:] - 0.5 * algebra.bracket(x, velocity[:, :m1])
    defects = (
        np.linalg.norm(vertical, axis=-1) if algebra.m2 else np.zeros(len(velocity))
    )
    worst = float(defects.max()) if defects.size else 0.0
    return HorizontalityReport(worst <= tol, worst, defects)


# =============================================================================
# Sampled constants
# =============================================================================


def random_coords(algebra: HTypeAlgebra, count: int, seed: SeedLike, scale: float = 1.0) -> np.ndarray:
    rng = generator(seed)
    return scale * rng.standard_normal((count, algebra.N))


def quasi_triangle_constant(
    algebra: HTypeAlgebra, kind: HomogeneousNorm, samples: int = 10_000, seed: SeedLike = 0
) -> float:
    """max ‖a·b‖ / (‖a‖ + ‖b‖) over random pairs (1 means the triangle inequality held)."""
    rng = generator(seed)
    a = random_coords(algebra, samples, rng)
    b = random_coords(algebra, samples, rng)
    ab = kind.evaluate(algebra, multiply_coords(algebra, a, b))
    denominator = kind.evaluate(algebra, a) + kind.evaluate(algebra, b)
    return float(np.max(ab / denominator))


@dataclass(frozen=True)
class EquivalenceBounds:
    """Sampled constant C_A with C_A⁻¹ d_E <= d <= C_A d_E^{1/2} on the unit Euclidean ball."""

    lower_ratio: float
    upper_ratio: float
    constant: float


def equivalence_bounds(
    algebra: HTypeAlgebra, kind: HomogeneousNorm, samples: int = 10_000, seed: SeedLike = 0
) -> EquivalenceBounds:
    rng = generator(seed)

    def ball(count: int) -> np.ndarray:
        direction = rng.standard_normal((count, algebra.N))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = rng.random(count) ** (1.0 / algebra.N)
        return direction * radius[:, None]

    a, b = ball(samples), ball(samples)
    d = distance_coords(algebra, kind, a, b)
    d_euclid = np.linalg.norm(a - b, axis=1)
    keep = d_euclid > 0
    lower = float(np.min(d[keep] / d_euclid[keep]))
    upper = float(np.max(d[keep] / np.sqrt(d_euclid[keep])))
    return EquivalenceBounds(lower, upper, max(1.0 / lower, upper))
