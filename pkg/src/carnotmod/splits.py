"""
Complementary homogeneous subgroups G = M · H.

A split is given by orthonormal bases of the four pieces M_h, H_h ⊂ g1 and
M_v, H_v ⊂ g2. Coordinate splits (subsets of the basis vectors) are the common
case and are built with :func:`coordinate_split`.

Writing g = m · h with m = (x_m, t_m) and h = (x_h, t_h) gives

    x = x_m + x_h,    t = t_m + t_h + ½ [x_m, x_h],

so the projections have a closed form: project x, subtract the bracket term
from t, then project t.
"""

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from .algebra import HTypeAlgebra
from .errors import DomainError, StructuralError
from .group import GroupPoint, HomogeneousNorm, inverse_coords, multiply_coords
from .rng import SeedLike, generator

logger = logging.getLogger("carnotmod.splits")


def _orthonormal(basis: Any, dim: int, name: str) -> np.ndarray:
    if dim == 0:
        return np.zeros((0, 0))
    basis = np.asarray(basis, dtype=float).reshape(dim, -1)
    if basis.shape[1] and not np.allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-10):
        raise StructuralError(f"{name} basis is not orthonormal")
    return basis


def _complement(basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(basis)."""
    dim, k = basis.shape
    if k == 0:
        return np.eye(dim)
    if k == dim:
        return np.zeros((dim, 0))
    q, _ = np.linalg.qr(np.hstack([basis, np.eye(dim)]))
    return q[:, k:dim]


@dataclass(frozen=True, eq=False)
class HomogeneousSplit:
    """A complementary pair of graded subalgebras (M, H).

    Attributes:
        algebra: Ambient algebra
        m_h, m_v: Orthonormal bases (columns) of the horizontal and vertical parts of M
        h_h, h_v: The same for H
        label: Free-form description kept in reports
    """

    algebra: HTypeAlgebra
    m_h: np.ndarray
    m_v: np.ndarray
    h_h: np.ndarray
    h_v: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        m1, m2 = self.algebra.m1, self.algebra.m2
        for name, dim in (("m_h", m1), ("h_h", m1), ("m_v", m2), ("h_v", m2)):
            object.__setattr__(self, name, _orthonormal(getattr(self, name), dim, name))
        horizontal = np.hstack([self.m_h, self.h_h])
        vertical = np.hstack([self.m_v, self.h_v])
        if horizontal.shape[1] != m1 or not np.allclose(horizontal.T @ horizontal, np.eye(m1), atol=1e-10):
            raise StructuralError("M_h and H_h are not orthogonal complements in g1")
        if vertical.shape[1] != m2 or not np.allclose(vertical.T @ vertical, np.eye(m2), atol=1e-10):
            raise StructuralError("M_v and H_v are not orthogonal complements in g2")
        if not self.m_is_subalgebra:
            raise StructuralError(f"M is not a subalgebra ([M_h, M_h] ⊄ M_v) in {self!r}")
        if not self.h_is_subalgebra:
            raise StructuralError(f"H is not a subalgebra ([H_h, H_h] ⊄ H_v) in {self!r}")

    # -------------------------------------------------------------------------
    # Shape
    # -------------------------------------------------------------------------

    @property
    def m_dims(self) -> tuple[int, int]:
        return self.m_h.shape[1], self.m_v.shape[1]

    @property
    def h_dims(self) -> tuple[int, int]:
        return self.h_h.shape[1], self.h_v.shape[1]

    @property
    def d_t(self) -> int:
        """Topological dimension of M."""
        return sum(self.m_dims)

    @property
    def d_m(self) -> int:
        """Homogeneous dimension of M."""
        kh, kv = self.m_dims
        return kh + 2 * kv

    @property
    def h_d_t(self) -> int:
        return sum(self.h_dims)

    def _closure_defect(self, horizontal: np.ndarray, vertical: np.ndarray) -> float:
        k = horizontal.shape[1]
        worst = 0.0
        for i in range(k):
            for j in range(i + 1, k):
                value = self.algebra.bracket(horizontal[:, i], horizontal[:, j])
                residual = value - vertical @ (vertical.T @ value)
                worst = max(worst, float(np.linalg.norm(residual)))
        return worst

    @property
    def m_is_subalgebra(self) -> bool:
        return self._closure_defect(self.m_h, self.m_v) <= 1e-10

    @property
    def h_is_subalgebra(self) -> bool:
        return self._closure_defect(self.h_h, self.h_v) <= 1e-10

    # -------------------------------------------------------------------------
    # Parameters of M and H
    # -------------------------------------------------------------------------

    def m_params(self, coords: np.ndarray) -> np.ndarray:
        """Coordinates of points of M in the (m_h, m_v) bases, shape (..., d_t)."""
        coords = np.asarray(coords, dtype=float)
        m1 = self.algebra.m1
        return np.concatenate(
            [coords[..., :m1] @ self.m_h, coords[..., m1:] @ self.m_v], axis=-1
        )

    def h_params(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        m1 = self.algebra.m1
        return np.concatenate(
            [coords[..., :m1] @ self.h_h, coords[..., m1:] @ self.h_v], axis=-1
        )

    def embed_m(self, params: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`m_params` on M."""
        params = np.asarray(params, dtype=float)
        kh = self.m_h.shape[1]
        return np.concatenate(
            [params[..., :kh] @ self.m_h.T, params[..., kh:] @ self.m_v.T], axis=-1
        )

    def embed_h(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        kh = self.h_h.shape[1]
        return np.concatenate(
            [params[..., :kh] @ self.h_h.T, params[..., kh:] @ self.h_v.T], axis=-1
        )

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "algebra": self.algebra.to_dict(),
            "M_h": self.m_h.T.tolist(),
            "M_v": self.m_v.T.tolist(),
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], algebra: HTypeAlgebra | None = None) -> "HomogeneousSplit":
        """Accepts index lists (coordinate splits) or basis row lists for M_h and M_v."""
        if algebra is None:
            algebra = HTypeAlgebra.from_dict(data["algebra"])
        m_h, m_v = data.get("M_h", []), data.get("M_v", [])
        if all(isinstance(i, int) for i in list(m_h) + list(m_v)):
            return coordinate_split(algebra, m_h, m_v, label=data.get("label", ""))
        m_h = np.asarray(m_h, dtype=float).reshape(-1, algebra.m1).T
        m_v = (
            np.asarray(m_v, dtype=float).reshape(-1, algebra.m2).T
            if algebra.m2
            else np.zeros((0, 0))
        )
        return cls(algebra, m_h, m_v, _complement(m_h), _complement(m_v), data.get("label", ""))

    def __repr__(self) -> str:
        label = f" {self.label!r}" if self.label else ""
        return (
            f"HomogeneousSplit({self.algebra.describe()}{label}, "
            f"M={self.m_dims}, H={self.h_dims})"
        )


def coordinate_split(
    algebra: HTypeAlgebra,
    m_h: list[int] | tuple[int, ...],
    m_v: list[int] | tuple[int, ...] = (),
    label: str = "",
) -> HomogeneousSplit:
    """Split whose M is spanned by the listed basis vectors; H takes the rest.

    Indices are 0-based within each layer.

    Example:
        ```python
        h = real_heisenberg(1)
        vertical = coordinate_split(h, [0], [0])  # M = span{X, ε}, H = span{Y}
        ```
    """
    m1, m2 = algebra.m1, algebra.m2
    m_h, m_v = sorted(set(m_h)), sorted(set(m_v))
    if any(not 0 <= i < m1 for i in m_h) or any(not 0 <= a < m2 for a in m_v):
        raise DomainError(f"split indices out of range for {algebra.describe()}")
    eye1, eye2 = np.eye(m1), np.eye(m2)
    rest_h = [i for i in range(m1) if i not in m_h]
    rest_v = [a for a in range(m2) if a not in m_v]
    if not label:
        names = [algebra.labels[i] for i in m_h] + [algebra.labels[m1 + a] for a in m_v]
        label = "M=span{" + ",".join(names) + "}"
    return HomogeneousSplit(
        algebra, eye1[:, m_h], eye2[:, m_v], eye1[:, rest_h], eye2[:, rest_v], label
    )


def split_from_subalgebra(algebra: HTypeAlgebra, subalgebra: Any) -> HomogeneousSplit:
    """Split with M the given orthogonally complemented subalgebra and H its complement.

    ``subalgebra`` is anything with ``h_basis`` (m1×k_h) and ``t_basis`` (m2×k_v)
    orthonormal column bases, e.g. :class:`carnotmod.grassmann.Subalgebra`.
    """
    m_h = np.asarray(subalgebra.h_basis, dtype=float).reshape(algebra.m1, -1)
    m_v = (
        np.asarray(subalgebra.t_basis, dtype=float).reshape(algebra.m2, -1)
        if algebra.m2
        else np.zeros((0, 0))
    )
    return HomogeneousSplit(
        algebra, m_h, m_v, _complement(m_h), _complement(m_v), getattr(subalgebra, "label", "")
    )


# =============================================================================
# Projections
# =============================================================================


def decompose_coords(split: HomogeneousSplit, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`decompose` on coordinate arrays of shape (..., N)."""
    coords = np.asarray(coords, dtype=float)
    m1 = split.algebra.m1
    x, t = coords[..., :m1], coords[..., m1:]
    x_m = (x @ split.m_h) @ split.m_h.T
    x_h = x - x_m
    s = t - 0.5 * split.algebra.bracket(x_m, x_h)
    t_m = (s @ split.m_v) @ split.m_v.T
    t_h = s - t_m
    return (
        np.concatenate([x_m, t_m], axis=-1),
        np.concatenate([x_h, t_h], axis=-1),
    )


def decompose(g: GroupPoint, split: HomogeneousSplit) -> tuple[GroupPoint, GroupPoint]:
    """The unique m ∈ M, h ∈ H with m · h = g."""
    split.algebra.require_same(g.algebra)
    m, h = decompose_coords(split, g.coords)
    return GroupPoint.from_coords(g.algebra, m), GroupPoint.from_coords(g.algebra, h)


def compose(m: GroupPoint, h: GroupPoint) -> GroupPoint:
    return m * h


def project_m(g: GroupPoint, split: HomogeneousSplit) -> GroupPoint:
    return decompose(g, split)[0]


def project_h(g: GroupPoint, split: HomogeneousSplit) -> GroupPoint:
    return decompose(g, split)[1]


# =============================================================================
# Cones
# =============================================================================


def cone_margin_coords(
    split: HomogeneousSplit,
    norm: HomogeneousNorm,
    vertex: np.ndarray,
    points: np.ndarray,
    beta: float,
) -> np.ndarray:
    """‖P_M(v⁻¹p)‖ − β ‖P_H(v⁻¹p)‖; p ∈ C(v, β) iff the margin is <= 0."""
    algebra = split.algebra
    relative = multiply_coords(algebra, inverse_coords(vertex), points)
    m, h = decompose_coords(split, relative)
    return norm.evaluate(algebra, m) - beta * norm.evaluate(algebra, h)


def cone_contains(
    split: HomogeneousSplit,
    vertex: GroupPoint,
    beta: float,
    p: GroupPoint,
    norm: HomogeneousNorm,
) -> bool:
    """Whether p lies in the cone C(vertex, β) = vertex · {‖P_M q‖ <= β ‖P_H q‖}.

    Raises:
        DomainError: if β <= 0
    """
    if not beta > 0:
        raise DomainError(f"cone opening must be positive, got {beta}")
    split.algebra.require_same(vertex.algebra)
    split.algebra.require_same(p.algebra)
    return bool(cone_margin_coords(split, norm, vertex.coords, p.coords, beta) <= 0.0)


# =============================================================================
# c0(M, H)
# =============================================================================


def c0_estimate(
    split: HomogeneousSplit,
    norm: HomogeneousNorm,
    samples: int = 10_000,
    seed: SeedLike = 0,
    chunk: int = 20_000,
) -> float:
    """Running minimum of ‖m · h‖ over random m ∈ M, h ∈ H with ‖m‖ + ‖h‖ = 1.

    Each draw picks random directions in M and H and a split s ~ U(0, 1) of
    the unit budget, then rescales (by dilation for homogeneous norms) so that
    ‖m‖ = s and ‖h‖ = 1 - s.

    Raises:
        DomainError: if fewer than 100 samples are requested
    """
    if samples < 100:
        raise DomainError("c0_estimate needs at least 100 samples")
    algebra = split.algebra
    rng = generator(seed)
    trivial_m, trivial_h = split.d_t == 0, split.h_d_t == 0
    if trivial_m and trivial_h:
        raise DomainError("both factors are trivial")
    best = np.inf
    remaining = samples
    while remaining > 0:
        count = min(chunk, remaining)
        remaining -= count
        m = split.embed_m(rng.standard_normal((count, split.d_t)))
        h = split.embed_h(rng.standard_normal((count, split.h_d_t)))
        if trivial_h:
            s = np.ones(count)
        elif trivial_m:
            s = np.zeros(count)
        else:
            s = rng.random(count)
        m = _rescale(algebra, norm, m, s)
        h = _rescale(algebra, norm, h, 1.0 - s)
        values = norm.evaluate(algebra, multiply_coords(algebra, m, h))
        best = min(best, float(values.min()))
    logger.debug("c0 estimate %.6f for %r (%d samples)", best, split, samples)
    return best


def _rescale(algebra: HTypeAlgebra, norm: HomogeneousNorm, coords: np.ndarray, target: np.ndarray) -> np.ndarray:
    current = norm.evaluate(algebra, coords)
    out = np.zeros_like(coords)
    ok = (current > 0) & (target > 0)
    if np.any(ok):
        factor = target[ok] / current[ok]
        if norm.homogeneous:
            out[ok, : algebra.m1] = coords[ok, : algebra.m1] * factor[:, None]
            out[ok, algebra.m1 :] = coords[ok, algebra.m1 :] * (factor**2)[:, None]
        else:
            out[ok] = coords[ok] * factor[:, None]
    return out
