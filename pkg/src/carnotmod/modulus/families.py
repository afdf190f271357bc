"""
Discretized measure families for modulus studies.

- ``annulus_family``: radial segments of the planar annulus r1 < |x| < r2 on a
  polar grid. The continuous 2-modulus is 2π / ln(r2 / r1).
- ``subspace_family``: Lebesgue measure on V ∩ B(0, 1) for sampled
  orthogonally complemented subalgebras V (Euclidean k-planes through the
  origin when the algebra is Euclidean). Cells are log-polar: a core ball of
  radius r_min, geometric shells out to 1 and equal-area direction bins on
  S^0..S^3. The inner radius follows the dyadic-exponent schedule

      r_min(level) = 2^{-b 2^level},

  so every refinement doubles the number of octaves resolved near the origin.
  Vertical shapes use product cells of the horizontal and vertical factors.
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Any

import numpy as np
from scipy import sparse
from scipy.special import gamma

from ..algebra import HTypeAlgebra
from ..errors import DomainError, UnsupportedError
from .problem import ModulusProblem

logger = logging.getLogger("carnotmod.modulus")


# =============================================================================
# Annulus
# =============================================================================


def _power_integral(lo: np.ndarray | float, hi: np.ndarray | float, a: float) -> np.ndarray:
    """∫_lo^hi s^{-a} ds."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if np.isclose(a, 1.0):
        return np.log(hi / lo)
    return (hi ** (1.0 - a) - lo ** (1.0 - a)) / (1.0 - a)


def annulus_modulus(r_inner: float = 1.0, r_outer: float = 2.0, p: float = 2.0) -> float:
    """p-modulus of the radial segments of the annulus r_inner < |x| < r_outer.

    The extremal density is c |x|^{-1/(p-1)}; for p = 2 the value is
    2π / ln(r_outer / r_inner).
    """
    if not 0 < r_inner < r_outer:
        raise DomainError("annulus needs 0 < r_inner < r_outer")
    if not p > 1:
        raise DomainError(f"annulus modulus needs p > 1, got {p}")
    length = float(_power_integral(r_inner, r_outer, 1.0 / (p - 1.0)))
    return 2.0 * np.pi * length ** (1.0 - p)


def annulus_family(
    r_inner: float = 1.0,
    r_outer: float = 2.0,
    radial: int = 200,
    angular: int = 200,
    p: float = 2.0,
) -> ModulusProblem:
    """Radial-segment family of the annulus on a ``radial`` × ``angular`` polar grid.

    Cell (i, k) is the sector [r_i, r_{i+1}] × [θ_k, θ_{k+1}] with its exact
    area; measure k is arc length along the segment at angle θ_k, so it
    charges Δr to every cell of sector k.

    Example:
        ```python
        problem = annulus_family(1.0, 2.0, radial=200, angular=200, p=2)
        solve_modulus(problem).value  # ~ 2π / ln 2 = 9.0647
        ```
    """
    if not 0 < r_inner < r_outer:
        raise DomainError("annulus needs 0 < r_inner < r_outer")
    if radial < 1 or angular < 1:
        raise DomainError("annulus grid needs at least one cell per direction")
    edges = np.linspace(r_inner, r_outer, radial + 1)
    dr = edges[1] - edges[0]
    dtheta = 2.0 * np.pi / angular
    r_mid = 0.5 * (edges[:-1] + edges[1:])
    theta_mid = (np.arange(angular) + 0.5) * dtheta

    # cell index k * radial + i
    sector_area = 0.5 * (edges[1:] ** 2 - edges[:-1] ** 2) * dtheta
    masses = np.tile(sector_area, angular)
    rr, tt = np.meshgrid(r_mid, theta_mid)
    cells = np.column_stack([(rr * np.cos(tt)).reshape(-1), (rr * np.sin(tt)).reshape(-1)])
    rows = np.repeat(np.arange(angular), radial)
    constraints = sparse.csr_matrix(
        (np.full(radial * angular, dr), (rows, np.arange(radial * angular))),
        shape=(angular, radial * angular),
    )
    meta = {
        "family": "annulus",
        "r_inner": float(r_inner),
        "r_outer": float(r_outer),
        "radial": int(radial),
        "angular": int(angular),
    }
    return ModulusProblem(cells, masses, constraints, p, f"annulus({r_inner:g},{r_outer:g})", meta)


def annulus_extremal_density(problem: ModulusProblem) -> np.ndarray:
    """Cell averages of the continuous extremal density of an annulus problem.

    They integrate to exactly 1 along every radial segment.
    """
    meta = problem.meta
    if meta.get("family") != "annulus":
        raise DomainError("not an annulus family problem")
    p = problem.p
    if not p > 1:
        raise DomainError(f"extremal density needs p > 1, got {p}")
    a = 1.0 / (p - 1.0)
    edges = np.linspace(meta["r_inner"], meta["r_outer"], meta["radial"] + 1)
    dr = edges[1] - edges[0]
    total = _power_integral(edges[0], edges[-1], a)
    per_ring = _power_integral(edges[:-1], edges[1:], a) / (dr * total)
    return np.tile(per_ring, meta["angular"])


# =============================================================================
# Log-polar cells
# =============================================================================


def ball_volume(k: int) -> float:
    """Lebesgue measure of the unit ball in R^k."""
    return float(np.pi ** (k / 2.0) / gamma(k / 2.0 + 1.0))


def sphere_atoms(k: int, count: int) -> np.ndarray:
    """Evenly spread unit vectors in R^k, shape (A, k).

    S^0 is {±1}, S^1 an equally spaced circle and S^2 a Fibonacci lattice.
    """
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        theta = (np.arange(count) + 0.5) * 2.0 * np.pi / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if k == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        phi = i * np.pi * (3.0 - np.sqrt(5.0))
        rho = np.sqrt(1.0 - z**2)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    raise UnsupportedError(f"direction atoms are implemented for spheres S^0..S^2, got k = {k}")


def _angle_bin(y: np.ndarray, x: np.ndarray, count: int) -> np.ndarray:
    theta = np.mod(np.arctan2(y, x), 2.0 * np.pi)
    return np.minimum((theta / (2.0 * np.pi) * count).astype(int), count - 1)


def _unit_bin(value: np.ndarray, lo: float, hi: float, count: int) -> np.ndarray:
    return np.clip(((value - lo) / (hi - lo) * count).astype(int), 0, count - 1)


@dataclass(frozen=True)
class LogPolarCells:
    """Core ball, geometric shells and equal-area direction bins in R^d (d <= 4).

    Cell 0 is the core B(0, r_min); cell 1 + l * bins + b is shell l, bin b.
    """

    dim: int
    radii: np.ndarray
    resolution: int
    angular_bins: int

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= 4:
            raise UnsupportedError(f"log-polar cells are implemented for R^1..R^4, got R^{self.dim}")

    @classmethod
    def schedule(
        cls,
        dim: int,
        level: int,
        base_exponent: int,
        shells_per_octave: int,
        resolution: int,
        angular_bins: int,
    ) -> "LogPolarCells":
        """Cells with r_min = 2^{-base 2^level} and ``shells_per_octave`` shells per octave."""
        if level < 0:
            raise DomainError(f"refinement level must be >= 0, got {level}")
        octaves = base_exponent * 2**level
        exponents = np.linspace(octaves, 0.0, shells_per_octave * octaves + 1)
        return cls(dim, 2.0**-exponents, resolution, angular_bins)

    @property
    def r_min(self) -> float:
        return float(self.radii[0])

    @property
    def shells(self) -> int:
        return len(self.radii) - 1

    @property
    def bin_shape(self) -> tuple[int, ...]:
        if self.dim == 1:
            return (2,)
        if self.dim == 2:
            return (self.angular_bins,)
        if self.dim == 3:
            return (2 * self.resolution, 4 * self.resolution)
        return (self.resolution, 2 * self.resolution, 2 * self.resolution)

    @property
    def bins(self) -> int:
        return int(np.prod(self.bin_shape))

    @property
    def size(self) -> int:
        return 1 + self.shells * self.bins

    def masses(self) -> np.ndarray:
        d = self.dim
        shells = ball_volume(d) * np.diff(self.radii**d) / self.bins
        return np.concatenate([[ball_volume(d) * self.r_min**d], np.repeat(shells, self.bins)])

    def direction_bin(self, u: np.ndarray) -> np.ndarray:
        """Bin index of unit vectors u (shape (A, d))."""
        u = np.asarray(u, dtype=float).reshape(-1, self.dim)
        shape = self.bin_shape
        if self.dim == 1:
            return (u[:, 0] < 0).astype(int)
        if self.dim == 2:
            return _angle_bin(u[:, 1], u[:, 0], shape[0])
        if self.dim == 3:
            iz = _unit_bin(u[:, 2], -1.0, 1.0, shape[0])
            return iz * shape[1] + _angle_bin(u[:, 1], u[:, 0], shape[1])
        # Hopf coordinates: |u_12|² is uniform on [0, 1] and both angles are uniform
        i_s = _unit_bin(u[:, 0] ** 2 + u[:, 1] ** 2, 0.0, 1.0, shape[0])
        i_1 = _angle_bin(u[:, 1], u[:, 0], shape[1])
        i_2 = _angle_bin(u[:, 3], u[:, 2], shape[2])
        return (i_s * shape[1] + i_1) * shape[2] + i_2

    def bin_directions(self) -> np.ndarray:
        """Unit vector at the centre of every bin, shape (bins, d)."""
        shape = self.bin_shape
        if self.dim == 1:
            return np.array([[1.0], [-1.0]])
        if self.dim == 2:
            theta = (np.arange(shape[0]) + 0.5) * 2.0 * np.pi / shape[0]
            return np.column_stack([np.cos(theta), np.sin(theta)])
        if self.dim == 3:
            z = -1.0 + (np.arange(shape[0]) + 0.5) * 2.0 / shape[0]
            phi = (np.arange(shape[1]) + 0.5) * 2.0 * np.pi / shape[1]
            zz, pp = np.meshgrid(z, phi, indexing="ij")
            rho = np.sqrt(1.0 - zz**2)
            return np.column_stack([(rho * np.cos(pp)).ravel(), (rho * np.sin(pp)).ravel(), zz.ravel()])
        s = (np.arange(shape[0]) + 0.5) / shape[0]
        xi1 = (np.arange(shape[1]) + 0.5) * 2.0 * np.pi / shape[1]
        xi2 = (np.arange(shape[2]) + 0.5) * 2.0 * np.pi / shape[2]
        ss, a1, a2 = np.meshgrid(s, xi1, xi2, indexing="ij")
        r1, r2 = np.sqrt(ss), np.sqrt(1.0 - ss)
        return np.column_stack(
            [(r1 * np.cos(a1)).ravel(), (r1 * np.sin(a1)).ravel(), (r2 * np.cos(a2)).ravel(), (r2 * np.sin(a2)).ravel()]
        )

    def centres(self) -> np.ndarray:
        mid = np.sqrt(self.radii[:-1] * self.radii[1:])
        shells = (mid[:, None, None] * self.bin_directions()[None, :, :]).reshape(-1, self.dim)
        return np.vstack([np.zeros((1, self.dim)), shells])

    def subspace_row(self, basis: np.ndarray, atoms: int) -> np.ndarray:
        """Lebesgue measure of span(basis) ∩ B(0, 1) per cell.

        A shell carries |B^k| (r_{l+1}^k - r_l^k), split over the direction
        bins in proportion to the direction atoms of the subspace falling in
        each bin. A subspace filling the whole factor is spread uniformly.
        """
        basis = np.asarray(basis, dtype=float).reshape(self.dim, -1)
        k = basis.shape[1]
        if k == self.dim:
            fractions = np.full(self.bins, 1.0 / self.bins)
        else:
            directions = sphere_atoms(k, atoms) @ basis.T
            fractions = np.bincount(self.direction_bin(directions), minlength=self.bins) / len(directions)
        shells = ball_volume(k) * np.diff(self.radii**k)
        row = np.outer(shells, fractions).reshape(-1)
        return np.concatenate([[ball_volume(k) * self.r_min**k], row])


# =============================================================================
# Subspace families
# =============================================================================


def subspace_family(
    algebra: HTypeAlgebra,
    k_h: int,
    k_v: int = 0,
    level: int = 0,
    p: float = 2.0,
    planes: int | None = None,
    seed: int = 0,
    with_reflections: bool = False,
    radius: float = 1.0,
    base_exponent: int | None = None,
    shells_per_octave: int | None = None,
    direction_resolution: int | None = None,
    angular_bins: int | None = None,
    direction_atoms: int | None = None,
) -> ModulusProblem:
    """Family {Lebesgue on V ∩ B(0, radius)} over ``planes`` sampled subalgebras V.

    Horizontal shapes live in g1 = R^{m1}; vertical shapes in g1 × g2 with the
    product of the balls of the two layers, all of radius ``radius``. Unset parameters
    come from the ``FAMILIES`` settings. Cells no subspace touches are dropped.

    Raises:
        DomainError: for an inadmissible shape
        UnsupportedError: for layers of dimension above 4
    """
    from ..config import settings
    from ..grassmann import reference_subalgebra, sample_grassmannian

    families = settings.FAMILIES
    planes = int(families.planes if planes is None else planes)
    base_exponent = int(families.base_exponent if base_exponent is None else base_exponent)
    shells_per_octave = int(families.shells_per_octave if shells_per_octave is None else shells_per_octave)
    resolution = int(families.direction_resolution if direction_resolution is None else direction_resolution)
    angular_bins = int(families.angular_bins if angular_bins is None else angular_bins)
    atoms = int(families.direction_atoms if direction_atoms is None else direction_atoms)
    if not radius > 0:
        raise DomainError(f"ball radius must be positive, got {radius}")
    if planes < 1:
        raise DomainError(f"need at least one subspace, got {planes}")

    ref = reference_subalgebra(algebra, k_h, k_v)
    samples = sample_grassmannian(algebra, ref, planes, seed, with_reflections)

    def cells_for(dim: int) -> LogPolarCells:
        return LogPolarCells.schedule(dim, level, base_exponent, shells_per_octave, resolution, angular_bins)

    horizontal = cells_for(algebra.m1)
    rows = np.stack([horizontal.subspace_row(v.h_basis, atoms) for v in samples])
    masses, centres = horizontal.masses(), horizontal.centres()
    if k_v:
        vertical = cells_for(algebra.m2)
        vertical_rows = np.stack([vertical.subspace_row(v.t_basis, atoms) for v in samples])
        masses = np.kron(masses, vertical.masses())
        vc = vertical.centres()
        centres = np.hstack(
            [np.repeat(centres, len(vc), axis=0), np.tile(vc, (len(horizontal.centres()), 1))]
        )
        constraints = sparse.vstack(
            [sparse.kron(sparse.csr_matrix(h), sparse.csr_matrix(v)) for h, v in zip(rows, vertical_rows, strict=True)]
        ).tocsr()
    else:
        constraints = sparse.csr_matrix(rows)

    touched = np.flatnonzero(np.asarray(constraints.sum(axis=0)).reshape(-1) > 0)
    # x -> radius · x on every layer the family lives on
    ambient_dim = algebra.m1 + (algebra.m2 if k_v else 0)
    constraints = constraints[:, touched] * radius ** (k_h + k_v)
    meta = {
        "family": "subspace",
        "algebra": algebra.to_dict(),
        "shape": [k_h, k_v],
        "level": level,
        "r_min": horizontal.r_min * radius,
        "radius": radius,
        "planes": planes,
        "seed": seed,
        "with_reflections": with_reflections,
    }
    logger.debug(
        "subspace family %s (%d, %d) level %d: %d measures x %d cells",
        algebra.describe(), k_h, k_v, level, planes, len(touched),
    )
    return ModulusProblem(
        centres[touched] * radius,
        masses[touched] * radius**ambient_dim,
        constraints,
        p,
        f"subspaces{algebra.describe()}({k_h},{k_v})@{level}",
        meta,
    )


def subspace_family_builder(algebra: HTypeAlgebra, k_h: int, k_v: int = 0, **options: Any) -> partial:
    """``level -> subspace_family(algebra, k_h, k_v, level, **options)`` for refinement studies."""
    return partial(_build_at_level, algebra, k_h, k_v, options)


def _build_at_level(
    algebra: HTypeAlgebra, k_h: int, k_v: int, options: dict[str, Any], level: int
) -> ModulusProblem:
    return subspace_family(algebra, k_h, k_v, level=level, **options)


def with_empty_measure(problem: ModulusProblem) -> ModulusProblem:
    """The family with one extra measure of zero mass (no admissible density)."""
    return problem.add_measures(sparse.csr_matrix((1, problem.shape[1])))
