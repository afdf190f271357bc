"""
Witness functions for exceptional families.

A family E is p-exceptional iff some F >= 0 in L^p has ∫ F dμ = ∞ for every
μ ∈ E. The functions here are the standard candidates:

- ``RadialPow``: ‖g‖^{-d} on the unit ball;
- ``RadialLog``: ‖g‖^{-d} (ln(2/‖g‖))^{-α} on the unit ball, for the critical case;
- ``VitaliPhi``: Σ_i 2^{-i} |ξ_i - ζ|^{-1} ψ(ξ_i - ζ) over a Vitali net {ξ_i} of
  radius r, in L^p for 0 < p < 1;
- ``SplitComposite``: a sum of ``VitaliPhi`` read in the M-coordinates of
  several splits.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.spatial import cKDTree

from ..algebra import HTypeAlgebra
from ..errors import DomainError, StructuralError
from ..group import GroupPoint, HomogeneousNorm
from ..splits import HomogeneousSplit, decompose_coords


class WitnessFunction:
    """Nonnegative extended-real function on the group, evaluated on coordinate arrays."""

    algebra: HTypeAlgebra

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        return self.evaluate(coords)

    def describe(self) -> dict[str, Any]:
        return {"kind": type(self).__name__}


def eval_witness(w: WitnessFunction, g: GroupPoint) -> float:
    """F(g), +inf at singular points.

    Raises:
        StructuralError: if g lives on a different algebra than the witness
    """
    if not w.algebra.same_as(g.algebra):
        raise StructuralError(
            f"witness on {w.algebra.describe()} evaluated at a point of {g.algebra.describe()}"
        )
    return float(w.evaluate(g.coords[None, :])[0])


# =============================================================================
# Radial witnesses
# =============================================================================


@dataclass(frozen=True, eq=False)
class RadialPow(WitnessFunction):
    """‖g‖^{-d_m} for ‖g‖ < 1, 0 otherwise."""

    algebra: HTypeAlgebra
    d_m: float
    norm: HomogeneousNorm = field(default_factory=HomogeneousNorm)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        rho = self.norm.evaluate(self.algebra, coords)
        with np.errstate(divide="ignore"):
            return np.where(rho < 1.0, np.power(rho, -float(self.d_m)), 0.0)

    def describe(self) -> dict[str, Any]:
        return {"kind": "RadialPow", "d_m": self.d_m, "norm": self.norm.to_dict()}


@dataclass(frozen=True, eq=False)
class RadialLog(WitnessFunction):
    """‖g‖^{-d_m} (ln(2/‖g‖))^{-α} for ‖g‖ < 1, 0 otherwise."""

    algebra: HTypeAlgebra
    d_m: float
    alpha: float
    norm: HomogeneousNorm = field(default_factory=HomogeneousNorm)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        rho = self.norm.evaluate(self.algebra, coords)
        inside = rho < 1.0
        out = np.zeros_like(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = rho[inside]
            out[inside] = np.power(r, -float(self.d_m)) * np.power(np.log(2.0 / r), -float(self.alpha))
        out[inside & (rho == 0)] = np.inf
        return out

    def describe(self) -> dict[str, Any]:
        return {"kind": "RadialLog", "d_m": self.d_m, "alpha": self.alpha, "norm": self.norm.to_dict()}


# =============================================================================
# Vitali witnesses
# =============================================================================


def vitali_centers(lo: Any, hi: Any, r: float) -> np.ndarray:
    """Maximal 2r/5-separated net of the box [lo, hi], sorted by distance to the origin.

    Balls of radius r/5 around the centres are disjoint and the balls of
    radius r cover the box.
    """
    if not r > 0:
        raise DomainError(f"Vitali radius must be positive, got {r}")
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(hi < lo):
        raise DomainError("Vitali box needs lo <= hi")
    spacing = r / 5.0
    axes = [np.arange(a, b + 0.5 * spacing, spacing) for a, b in zip(lo, hi, strict=True)]
    grids = np.meshgrid(*axes, indexing="ij")
    candidates = np.stack([g.reshape(-1) for g in grids], axis=-1)
    order = np.lexsort(tuple(candidates.T[::-1]) + (np.linalg.norm(candidates, axis=1).round(12),))
    candidates = candidates[order]
    tree = cKDTree(candidates)
    blocked = np.zeros(len(candidates), dtype=bool)
    chosen = []
    separation = 2.0 * r / 5.0
    for i, point in enumerate(candidates):
        if blocked[i]:
            continue
        chosen.append(i)
        blocked[tree.query_ball_point(point, separation * (1.0 - 1e-12))] = True
    return candidates[chosen]


def smooth_cutoff(rho: np.ndarray, r: float) -> np.ndarray:
    """C^∞ radial cutoff: 1 on [0, 2r], 0 on [3r, ∞)."""
    s = np.clip((np.asarray(rho, dtype=float) - 2.0 * r) / r, 0.0, 1.0)

    def bump(u: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)

    a, b = bump(1.0 - s), bump(s)
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class VitaliPhi(WitnessFunction):
    """φ_r(ζ) = Σ_i 2^{-i} |ξ_i - ζ|^{-1} ψ(ξ_i - ζ) (i = 1, 2, ...).

    ζ are Euclidean coordinates: the full group coordinates, or the
    M-parameters of ``split`` when one is given (the point is first
    projected to M).
    """

    algebra: HTypeAlgebra
    r: float
    centers: np.ndarray
    split: HomogeneousSplit | None = None

    def __post_init__(self) -> None:
        dim = self.algebra.N if self.split is None else self.split.d_t
        centers = np.asarray(self.centers, dtype=float).reshape(-1, dim)
        object.__setattr__(self, "centers", centers)
        if self.split is not None:
            self.algebra.require_same(self.split.algebra)

    def coordinates(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float).reshape(-1, self.algebra.N)
        if self.split is None:
            return coords
        m, _ = decompose_coords(self.split, coords)
        return self.split.m_params(m)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        zeta = self.coordinates(coords)
        out = np.zeros(len(zeta))
        if not len(self.centers):
            return out
        tree = cKDTree(self.centers)
        weights = 0.5 ** np.arange(1, len(self.centers) + 1)
        # only centres within 3r contribute
        pairs = cKDTree(zeta).sparse_distance_matrix(tree, 3.0 * self.r, output_type="ndarray")
        rho, rows, cols = pairs["v"], pairs["i"], pairs["j"]
        keep = rho > 0
        np.add.at(
            out,
            rows[keep],
            weights[cols[keep]] * smooth_cutoff(rho[keep], self.r) / rho[keep],
        )
        out[tree.query(zeta, k=1)[0] == 0] = np.inf
        return out

    def describe(self) -> dict[str, Any]:
        return {
            "kind": "VitaliPhi",
            "r": self.r,
            "centers": len(self.centers),
            "split": None if self.split is None else self.split.label,
        }


@dataclass(frozen=True, eq=False)
class SplitComposite(WitnessFunction):
    """Σ_α φ_α(Π_{M_α} g) over several (split, radius) pairs."""

    algebra: HTypeAlgebra
    parts: tuple[VitaliPhi, ...]

    def __post_init__(self) -> None:
        for part in self.parts:
            self.algebra.require_same(part.algebra)

    @classmethod
    def build(
        cls,
        algebra: HTypeAlgebra,
        splits: list[tuple[HomogeneousSplit, float]],
        box_radius: float = 1.0,
    ) -> "SplitComposite":
        """One Vitali net per split over the M-parameter box [-R, R]^{d_t}."""
        parts = []
        for split, r in splits:
            lo = -box_radius * np.ones(split.d_t)
            hi = box_radius * np.ones(split.d_t)
            parts.append(VitaliPhi(algebra, r, vitali_centers(lo, hi, r), split))
        return cls(algebra, tuple(parts))

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float).reshape(-1, self.algebra.N)
        total = np.zeros(len(coords))
        for part in self.parts:
            total = total + part.evaluate(coords)
        return total

    def describe(self) -> dict[str, Any]:
        return {"kind": "SplitComposite", "parts": [p.describe() for p in self.parts]}
