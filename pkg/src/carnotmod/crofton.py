"""
Crofton-type integral formulas: Monte Carlo verification and constant estimation.

For a nonnegative f with bounded support the Grassmannian average of the
subspace integrals F(V) = ∫_V f is compared with the radially weighted
ambient integral

    ∫ ‖x‖^{k_h - m1} ‖t‖^{k_v - m2} f(x, t) dx dt,

and the ratio is reported as the constant of the formula. Integrands are
finite sums of separable radial terms w · g_h(|x - c_h|) · g_v(|t - c_v|), so
the ambient side reduces to one-dimensional radial quadratures (the singular
weight is absorbed by polar coordinates) and the subspace side to a
randomly shifted tensor grid in the subspace coordinates.

Example:
    ```python
    from carnotmod.crofton import Integrand, RadialProfile, euclidean_crofton

    f = Integrand.single(RadialProfile.annulus(1.0, 2.0))
    report = euclidean_crofton(2, 1, f, samples=10_000, seed=1)
    report.constant  # ~ 1/π
    ```
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
from scipy import integrate
from scipy.special import gamma, ive, roots_legendre

from .algebra import HTypeAlgebra, euclidean
from .errors import DomainError
from .grassmann import Isometry, Subalgebra, reference_subalgebra, sample_grassmannian
from .parallel import ordered_map
from .rng import child, derive_seed

logger = logging.getLogger("carnotmod.crofton")

# Gaussian tails beyond this many standard deviations are dropped (e^{-36.1})
GAUSS_TAIL = 8.5


def sphere_area(d: int) -> float:
    """|S^{d-1}| (|S^0| = 2)."""
    return float(2.0 * np.pi ** (d / 2.0) / gamma(d / 2.0))


# =============================================================================
# Integrands
# =============================================================================


@dataclass(frozen=True)
class RadialProfile:
    """Function g(|y - c|) on R^d with bounded support.

    Kinds:
        gauss: exp(-|y - c|² / (2 s²)), truncated at |y - c| = 8.5 s
        annulus: indicator of inner <= |y| <= outer
        bump: exp(1 - 1 / (1 - (|y|/R)²)) for |y| < R
        file: tabulated g(r) (linear interpolation, 0 past the last radius)
        const: value on |y| <= R
        zero: 0
    """

    kind: str
    scale: float = 1.0
    inner: float = 0.0
    outer: float = 0.0
    value: float = 1.0
    centre: tuple[float, ...] = ()
    table: tuple[tuple[float, ...], tuple[float, ...]] = ((), ())

    # -------------------------------------------------------------------------
    # Constructors
    # -------------------------------------------------------------------------

    @classmethod
    def gauss(cls, scale: float = 1.0, centre: Any = ()) -> "RadialProfile":
        if not scale > 0:
            raise DomainError(f"Gaussian scale must be positive, got {scale}")
        return cls("gauss", scale=float(scale), centre=tuple(float(c) for c in np.ravel(centre)))

    @classmethod
    def annulus(cls, inner: float, outer: float) -> "RadialProfile":
        if not 0 <= inner < outer:
            raise DomainError("annulus needs 0 <= inner < outer")
        return cls("annulus", inner=float(inner), outer=float(outer))

    @classmethod
    def bump(cls, radius: float = 1.0) -> "RadialProfile":
        if not radius > 0:
            raise DomainError(f"bump radius must be positive, got {radius}")
        return cls("bump", outer=float(radius))

    @classmethod
    def const(cls, value: float = 1.0, radius: float | None = None) -> "RadialProfile":
        if radius is None or not np.isfinite(radius):
            raise DomainError("a constant integrand needs a bounded support radius")
        return cls("const", value=float(value), outer=float(radius))

    @classmethod
    def zero(cls) -> "RadialProfile":
        return cls("zero")

    @classmethod
    def from_table(cls, radii: Any, values: Any) -> "RadialProfile":
        radii = np.asarray(radii, dtype=float).reshape(-1)
        values = np.asarray(values, dtype=float).reshape(-1)
        if radii.shape != values.shape or len(radii) < 2 or np.any(np.diff(radii) <= 0):
            raise DomainError("radial table needs increasing radii and one value per radius")
        if radii[0] < 0 or np.any(values < 0):
            raise DomainError("radial table must be nonnegative")
        return cls("file", table=(tuple(radii.tolist()), tuple(values.tolist())))

    @classmethod
    def from_file(cls, path: str | Path) -> "RadialProfile":
        """Two-column text file (radius, value)."""
        data = np.loadtxt(path, ndmin=2)
        return cls.from_table(data[:, 0], data[:, 1])

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------

    @property
    def support(self) -> float:
        """Radius (about the centre) outside which g vanishes."""
        if self.kind == "gauss":
            return GAUSS_TAIL * self.scale
        if self.kind in ("annulus", "bump", "const"):
            return self.outer
        if self.kind == "file":
            return self.table[0][-1]
        return 0.0

    @property
    def offset(self) -> float:
        return float(np.linalg.norm(self.centre)) if self.centre else 0.0

    @property
    def centred(self) -> bool:
        return self.offset == 0.0

    @property
    def breakpoints(self) -> list[float]:
        if self.kind == "annulus":
            return [self.inner, self.outer]
        if self.kind == "file":
            return list(self.table[0])
        return []

    def radial(self, r: Any) -> np.ndarray:
        """g(r) for distances r >= 0 from the centre."""
        r = np.asarray(r, dtype=float)
        kind = self.kind
        if kind == "gauss":
            return np.where(r <= self.support, np.exp(-0.5 * (r / self.scale) ** 2), 0.0)
        if kind == "annulus":
            return ((r >= self.inner) & (r <= self.outer)).astype(float)
        if kind == "bump":
            u = np.clip(r / self.outer, 0.0, 1.0)
            with np.errstate(divide="ignore", over="ignore"):
                return np.where(u < 1.0, np.exp(1.0 - 1.0 / (1.0 - u**2)), 0.0)
        if kind == "const":
            return np.where(r <= self.outer, self.value, 0.0)
        if kind == "file":
            radii, values = self.table
            return np.interp(r, radii, values, left=values[0], right=0.0)
        return np.zeros_like(r)

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """g(|y - c|) for points y of shape (..., d)."""
        y = np.asarray(y, dtype=float)
        if self.centre:
            y = y - np.asarray(self.centre)
        return self.radial(np.linalg.norm(y, axis=-1))

    def sphere_integral(self, r: Any, dim: int) -> np.ndarray:
        """∫_{S^{d-1}} g(|rθ - c|) dθ.

        For an off-centre Gaussian this is
        e^{-(r - |c|)²/(2s²)} (2π)^{d/2} κ^{1-d/2} I_{d/2-1}(κ) with κ = r|c|/s²
        (exponentially scaled Bessel function for stability).
        """
        r = np.asarray(r, dtype=float)
        if self.centred:
            return sphere_area(dim) * self.radial(r)
        if self.kind != "gauss":
            raise DomainError("off-centre profiles are only available for the Gaussian")
        c, s = self.offset, self.scale
        kappa = r * c / s**2
        nu = dim / 2.0 - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            mean = (2.0 * np.pi) ** (dim / 2.0) * kappa ** (-nu) * ive(nu, kappa)
        mean = np.where(kappa > 1e-12, mean, sphere_area(dim))
        return np.exp(-0.5 * ((r - c) / s) ** 2) * mean

    def radial_moment(self, k: int, dim: int, nodes: int | None = None) -> float:
        """∫_{R^d} |y|^{k-d} g(|y - c|) dy = ∫_0^∞ r^{k-1} S(r) dr.

        Adaptive quadrature by default; ``nodes`` switches to a fixed
        Gauss-Legendre rule on [0, support] (used for convergence checks).
        """
        if self.kind == "zero":
            return 0.0
        upper = self.offset + self.support

        def integrand(r: Any) -> Any:
            return np.power(r, k - 1) * self.sphere_integral(r, dim)

        if nodes is not None:
            x, w = roots_legendre(int(nodes))
            r = 0.5 * upper * (x + 1.0)
            return float(0.5 * upper * np.sum(w * integrand(r)))
        points = [p for p in self.breakpoints if 0 < p < upper] or None
        value, _ = integrate.quad(
            lambda r: float(integrand(r)), 0.0, upper, points=points, limit=400, epsabs=0.0, epsrel=1e-11
        )
        return float(value)

    def subspace_integral(self, k: int) -> float:
        """∫_{R^k} g(|y|) dy for a centred profile (the same for every k-plane)."""
        if not self.centred:
            raise DomainError("subspace integrals are plane-independent only for centred profiles")
        if self.kind == "zero":
            return 0.0
        value, _ = integrate.quad(
            lambda r: float(np.power(r, k - 1) * self.radial(r)),
            0.0,
            self.support,
            points=[p for p in self.breakpoints if 0 < p < self.support] or None,
            limit=400,
        )
        return sphere_area(k) * float(value)

    # -------------------------------------------------------------------------
    # Transformations
    # -------------------------------------------------------------------------

    def dilate(self, lam: float) -> "RadialProfile":
        """Profile of y -> g(λ y)."""
        if not lam > 0:
            raise DomainError(f"dilation factor must be positive, got {lam}")
        centre = tuple(c / lam for c in self.centre)
        if self.kind == "gauss":
            return replace(self, scale=self.scale / lam, centre=centre)
        if self.kind == "file":
            radii, values = self.table
            return replace(self, table=(tuple(r / lam for r in radii), values))
        return replace(self, inner=self.inner / lam, outer=self.outer / lam, centre=centre)

    def rotate(self, matrix: np.ndarray) -> "RadialProfile":
        """Profile of y -> g(A y) for orthogonal A."""
        if not self.centre:
            return self
        return replace(self, centre=tuple((np.asarray(matrix).T @ np.asarray(self.centre)).tolist()))

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind}
        if self.kind == "gauss":
            data.update(scale=self.scale, centre=list(self.centre))
        elif self.kind == "annulus":
            data.update(inner=self.inner, outer=self.outer)
        elif self.kind == "bump":
            data.update(radius=self.outer)
        elif self.kind == "const":
            data.update(value=self.value, radius=self.outer)
        elif self.kind == "file":
            data.update(radii=list(self.table[0]), values=list(self.table[1]))
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RadialProfile":
        kind = data.get("kind", "zero")
        if kind == "gauss":
            return cls.gauss(data.get("scale", 1.0), data.get("centre", ()))
        if kind == "annulus":
            return cls.annulus(data.get("inner", 1.0), data.get("outer", 2.0))
        if kind == "bump":
            return cls.bump(data.get("radius", 1.0))
        if kind == "const":
            return cls.const(data.get("value", 1.0), data.get("radius"))
        if kind == "file":
            if "path" in data:
                return cls.from_file(data["path"])
            return cls.from_table(data["radii"], data["values"])
        if kind == "zero":
            return cls.zero()
        raise DomainError(f"unknown integrand kind {kind!r}")


@dataclass(frozen=True)
class IntegrandTerm:
    """w · g_h(|x - c_h|) · g_v(|t - c_v|); ``vertical`` None means f lives on g1 only."""

    weight: float
    horizontal: RadialProfile
    vertical: RadialProfile | None = None


@dataclass(frozen=True)
class Integrand:
    """Finite nonnegative combination of separable radial terms."""

    terms: tuple[IntegrandTerm, ...]
    label: str = ""

    @classmethod
    def single(
        cls, horizontal: RadialProfile, vertical: RadialProfile | None = None, label: str = ""
    ) -> "Integrand":
        return cls((IntegrandTerm(1.0, horizontal, vertical),), label or horizontal.kind)

    @classmethod
    def zero(cls) -> "Integrand":
        return cls((), "zero")

    @property
    def is_zero(self) -> bool:
        return all(t.weight == 0 or t.horizontal.kind == "zero" for t in self.terms)

    @property
    def centred(self) -> bool:
        return all(
            t.horizontal.centred and (t.vertical is None or t.vertical.centred) for t in self.terms
        )

    def __add__(self, other: "Integrand") -> "Integrand":
        return Integrand(self.terms + other.terms, f"{self.label}+{other.label}")

    def scaled(self, a: float) -> "Integrand":
        if a < 0:
            raise DomainError("integrands must stay nonnegative")
        return Integrand(tuple(replace(t, weight=a * t.weight) for t in self.terms), f"{a:g}*{self.label}")

    def dilate(self, lam: float) -> "Integrand":
        """f ∘ δ_λ: x scales by λ and t by λ²."""
        return Integrand(
            tuple(
                replace(
                    t,
                    horizontal=t.horizontal.dilate(lam),
                    vertical=None if t.vertical is None else t.vertical.dilate(lam**2),
                )
                for t in self.terms
            ),
            f"{self.label}∘δ{lam:g}",
        )

    def precompose(self, iso: Isometry) -> "Integrand":
        """f ∘ (U, V)."""
        return Integrand(
            tuple(
                replace(
                    t,
                    horizontal=t.horizontal.rotate(iso.U),
                    vertical=None if t.vertical is None else t.vertical.rotate(iso.V),
                )
                for t in self.terms
            ),
            self.label,
        )

    def evaluate(self, x: np.ndarray, t: np.ndarray | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for term in self.terms:
            value = term.weight * term.horizontal.evaluate(x)
            if term.vertical is not None:
                if t is None:
                    raise DomainError("integrand has a vertical factor; pass t")
                value = value * term.vertical.evaluate(t)
            total = total + value
        return total

    def describe(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "terms": [
                {
                    "weight": t.weight,
                    "horizontal": t.horizontal.to_dict(),
                    "vertical": None if t.vertical is None else t.vertical.to_dict(),
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Integrand":
        terms = tuple(
            IntegrandTerm(
                float(t.get("weight", 1.0)),
                RadialProfile.from_dict(t["horizontal"]),
                None if t.get("vertical") is None else RadialProfile.from_dict(t["vertical"]),
            )
            for t in data.get("terms", [])
        )
        return cls(terms, data.get("label", ""))


# =============================================================================
# Reports
# =============================================================================


@dataclass
class CroftonReport:
    """lhs = E_V ∫_V f (batch-means Monte Carlo), rhs = weighted ambient integral.

    ``constant`` is lhs / rhs, or None when rhs = 0. ``analytic_lhs`` is set
    for centred integrands, where every subspace integral is the same.
    """

    lhs: float
    lhs_se: float
    rhs: float
    constant: float | None
    constant_se: float | None
    label: str
    space: dict[str, Any]
    shape: tuple[int, int]
    samples: int
    batches: int
    seed: int
    analytic_lhs: float | None = None
    batch_means: list[float] = field(default_factory=list, repr=False)

    @property
    def constant_defined(self) -> bool:
        return self.constant is not None

    @property
    def analytic_constant(self) -> float | None:
        if self.analytic_lhs is None or self.rhs <= 0:
            return None
        return self.analytic_lhs / self.rhs

    def within(self, target: float, ses: float = 3.0) -> bool:
        """|constant - target| <= ses · SE."""
        if self.constant is None or self.constant_se is None:
            return False
        return abs(self.constant - target) <= ses * self.constant_se

    def to_dict(self) -> dict[str, Any]:
        return {
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs,
            "constant": self.constant,
            "constant_se": self.constant_se,
            "constant_defined": self.constant_defined,
            "analytic_lhs": self.analytic_lhs,
            "analytic_constant": self.analytic_constant,
            "label": self.label,
            "space": self.space,
            "shape": list(self.shape),
            "samples": self.samples,
            "batches": self.batches,
            "seed": self.seed,
        }


def constants_agree(a: CroftonReport, b: CroftonReport, ses: float = 3.0) -> bool:
    """Whether two constant estimates agree within ``ses`` combined standard errors."""
    if a.constant is None or b.constant is None:
        return False
    combined = np.hypot(a.constant_se or 0.0, b.constant_se or 0.0)
    return abs(a.constant - b.constant) <= ses * combined


# =============================================================================
# Estimators
# =============================================================================


def _grid_nodes(k: int, budget: int) -> int:
    return max(4, int(round(budget ** (1.0 / k))))


def _shifted_grid_integral(
    profile: RadialProfile, k: int, distance: np.ndarray, shifts: np.ndarray, budget: int
) -> np.ndarray:
    """h^k Σ_j g(sqrt(|z_j + h u|² + d²)) per sample: ∫_{R^k} g over a k-plane at distance d.

    The randomly shifted grid is an unbiased estimate of the plane integral.
    """
    if profile.kind == "zero":
        return np.zeros(len(distance))
    radius = profile.support
    count = _grid_nodes(k, budget)
    h = 2.0 * radius / count
    axis = -radius + h * np.arange(count + 1)
    grid = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
    out = np.empty(len(distance))
    for block in range(0, len(distance), 256):
        rows = slice(block, block + 256)
        points = grid[None, :, :] + h * shifts[rows, None, :]
        r2 = np.sum(points**2, axis=-1) + distance[rows, None] ** 2
        out[rows] = h**k * np.sum(profile.radial(np.sqrt(r2)), axis=1)
    return out


def _plane_distance(profile: RadialProfile, basis: np.ndarray) -> np.ndarray:
    """Distance from the profile centre to each plane, bases shape (S, d, k)."""
    if profile.centred:
        return np.zeros(len(basis))
    c = np.asarray(profile.centre)
    along = np.einsum("sdk,d->sk", basis, c)
    return np.sqrt(np.maximum(c @ c - np.sum(along**2, axis=1), 0.0))


def _subspace_values(
    f: Integrand, subspaces: list[Subalgebra], rng: np.random.Generator, budget: int, vertical: bool
) -> np.ndarray:
    """F(V) = ∫_V f for every sampled subspace."""
    h_basis = np.stack([v.h_basis for v in subspaces])
    t_basis = np.stack([v.t_basis for v in subspaces]) if vertical else None
    k_h = h_basis.shape[2]
    k_v = 0 if t_basis is None else t_basis.shape[2]
    values = np.zeros(len(subspaces))
    for term in f.terms:
        part = _shifted_grid_integral(
            term.horizontal, k_h, _plane_distance(term.horizontal, h_basis),
            rng.random((len(subspaces), k_h)), budget,
        )
        if vertical:
            if term.vertical is None:
                raise DomainError("vertical Crofton integrands need a bounded vertical factor")
            part = part * _shifted_grid_integral(
                term.vertical, k_v, _plane_distance(term.vertical, t_basis),
                rng.random((len(subspaces), k_v)), budget,
            )
        values += term.weight * part
    return values


def _ambient_integral(f: Integrand, k_h: int, m1: int, k_v: int = 0, m2: int = 0) -> float:
    total = 0.0
    for term in f.terms:
        value = term.horizontal.radial_moment(k_h, m1)
        if k_v:
            value *= term.vertical.radial_moment(k_v, m2)  # type: ignore[union-attr]
        total += term.weight * value
    return total


def _analytic_lhs(f: Integrand, k_h: int, k_v: int = 0) -> float | None:
    if not f.centred:
        return None
    total = 0.0
    for term in f.terms:
        value = term.horizontal.subspace_integral(k_h)
        if k_v:
            value *= term.vertical.subspace_integral(k_v)  # type: ignore[union-attr]
        total += term.weight * value
    return total


def _check_support(f: Integrand, algebra: HTypeAlgebra, vertical: bool) -> None:
    for term in f.terms:
        if not np.isfinite(term.horizontal.support):
            raise DomainError("integrand must have bounded support")
        if term.horizontal.centre and len(term.horizontal.centre) != algebra.m1:
            raise DomainError(f"horizontal centre must have {algebra.m1} coordinates")
        if not vertical:
            continue
        if term.vertical is None:
            raise DomainError("vertical Crofton integrands need a bounded vertical factor")
        if term.vertical.centre and len(term.vertical.centre) != algebra.m2:
            raise DomainError(f"vertical centre must have {algebra.m2} coordinates")


def _crofton(
    algebra: HTypeAlgebra,
    ref: Subalgebra,
    f: Integrand,
    samples: int | None,
    seed: int,
    batches: int | None,
    grid_budget: int,
    threads: int | None,
    with_reflections: bool,
) -> CroftonReport:
    from .config import settings

    samples = int(settings.MONTE_CARLO.samples if samples is None else samples)
    batches = int(settings.MONTE_CARLO.batches if batches is None else batches)
    if samples < batches or batches < 2:
        raise DomainError(f"need samples >= batches >= 2, got {samples} samples in {batches} batches")
    vertical = ref.k_v > 0
    _check_support(f, algebra, vertical)
    shape = (ref.k_h, ref.k_v)
    space = {"algebra": algebra.to_dict(), "k_h": ref.k_h, "k_v": ref.k_v}

    rhs = _ambient_integral(f, ref.k_h, algebra.m1, ref.k_v, algebra.m2)
    analytic = _analytic_lhs(f, ref.k_h, ref.k_v)
    sizes = [samples // batches + (1 if b < samples % batches else 0) for b in range(batches)]

    def batch_mean(b: int) -> float:
        rng = child(seed, b)
        subspaces = sample_grassmannian(algebra, ref, sizes[b], derive_seed(rng), with_reflections)
        return float(np.mean(_subspace_values(f, subspaces, rng, grid_budget, vertical)))

    if f.is_zero:
        means = [0.0] * batches
    else:
        means = ordered_map(batch_mean, range(batches), threads)
    weights = np.asarray(sizes, dtype=float) / samples
    lhs = float(np.sum(weights * np.asarray(means)))
    lhs_se = float(np.std(means, ddof=1) / np.sqrt(batches))
    constant = lhs / rhs if rhs > 0 else None
    constant_se = lhs_se / rhs if rhs > 0 else None
    logger.info(
        "Crofton %s %s: lhs %.6g ± %.2g, rhs %.6g, constant %s",
        algebra.describe(), shape, lhs, lhs_se, rhs,
        "undefined" if constant is None else f"{constant:.6g}",
    )
    return CroftonReport(
        lhs, lhs_se, rhs, constant, constant_se, f.label, space, shape, samples, batches, seed,
        analytic, list(means),
    )


def euclidean_crofton(
    n: int,
    k: int,
    f: Integrand,
    samples: int | None = None,
    seed: int = 0,
    batches: int | None = None,
    grid_budget: int = 1024,
    threads: int | None = None,
) -> CroftonReport:
    """E_{V ∈ G(n,k)} ∫_V f against ∫_{R^n} |x|^{k-n} f; the ratio is |S^{k-1}| / |S^{n-1}|.

    Raises:
        DomainError: unless 1 <= k < n, or if f has unbounded support
    """
    if not 1 <= k < n:
        raise DomainError(f"Euclidean Crofton needs 1 <= k < n, got n = {n}, k = {k}")
    algebra = euclidean(n)
    ref = reference_subalgebra(algebra, k, 0)
    return _crofton(algebra, ref, f, samples, seed, batches, grid_budget, threads, False)


def htype_crofton_horizontal(
    algebra: HTypeAlgebra,
    k: int,
    f: Integrand,
    samples: int | None = None,
    seed: int = 0,
    batches: int | None = None,
    grid_budget: int = 1024,
    threads: int | None = None,
    with_reflections: bool = False,
) -> CroftonReport:
    """Horizontal Grassmannian average of ∫_V f against ∫_{g1} ‖z‖^{k-m1} f(z) dz.

    Raises:
        DomainError: if k is not an admissible horizontal dimension
    """
    ref = reference_subalgebra(algebra, k, 0)
    return _crofton(algebra, ref, f, samples, seed, batches, grid_budget, threads, with_reflections)


def htype_crofton_vertical(
    algebra: HTypeAlgebra,
    k_h: int,
    k_v: int,
    f: Integrand,
    samples: int | None = None,
    seed: int = 0,
    batches: int | None = None,
    grid_budget: int = 1024,
    threads: int | None = None,
    with_reflections: bool = False,
) -> CroftonReport:
    """Vertical Grassmannian average of ∫_V f against ∫ ‖x‖^{k_h-m1} ‖t‖^{k_v-m2} f.

    Raises:
        DomainError: if (k_h, k_v) is not an admissible vertical shape
    """
    if k_v < 1:
        raise DomainError("vertical subalgebras have k_v >= 1")
    ref = reference_subalgebra(algebra, k_h, k_v)
    return _crofton(algebra, ref, f, samples, seed, batches, grid_budget, threads, with_reflections)


# =============================================================================
# Corollary experiments
# =============================================================================


@dataclass(frozen=True)
class HolderBound:
    """Finiteness of ∫_0^1 r^{e - 1} dr, e = (p k - m)/(p - 1), per layer."""

    p: float
    exponents: tuple[float, ...]
    finite: bool

    @property
    def value(self) -> float:
        """Product of the radial integrals 1/e, or +inf."""
        if not self.finite:
            return float(np.inf)
        return float(np.prod([1.0 / e for e in self.exponents]))

    def to_dict(self) -> dict[str, Any]:
        return {"p": self.p, "exponents": list(self.exponents), "finite": self.finite, "value": self.value}


def holder_bound(p: float, shape: tuple[int, int], m1: int, m2: int = 0) -> HolderBound:
    """Exponents of the Hölder estimate for the family {V ∩ B(0, 1)}.

    A layer with k of its m dimensions contributes ∫_0^1 r^{(pk - m)/(p-1) - 1} dr,
    finite iff p k > m. A vertical part that fills the centre contributes nothing.
    """
    if not p > 1:
        raise DomainError(f"Hölder bound needs p > 1, got {p}")
    k_h, k_v = shape
    layers = [(k_h, m1)]
    if k_v and k_v < m2:
        layers.append((k_v, m2))
    exponents = tuple((p * k - m) / (p - 1.0) for k, m in layers)
    return HolderBound(float(p), exponents, all(e > 0 for e in exponents))


@dataclass
class CorollaryReport:
    """Modulus trend of {V ∩ B(0, R)} with the Hölder finiteness test."""

    algebra: dict[str, Any]
    shape: tuple[int, int]
    bound: HolderBound
    study: Any
    consistent: bool
    radius: float = 1.0
    settled: bool = True

    @property
    def passed(self) -> bool | None:
        """The cross-check outcome; None where the regime is only reported."""
        return self.consistent if self.settled else None

    def rows(self) -> list[dict[str, Any]]:
        return self.study.rows()

    def to_dict(self) -> dict[str, Any]:
        return {
            "algebra": self.algebra,
            "shape": list(self.shape),
            "radius": self.radius,
            "bound": self.bound.to_dict(),
            "study": self.study.to_dict(),
            "consistent": self.consistent,
            "settled": self.settled,
        }


def corollary_experiment(
    algebra: HTypeAlgebra,
    shape: tuple[int, int],
    p: float,
    ball: float = 1.0,
    resolutions: int = 3,
    seed: int = 0,
    planes: int | None = None,
    with_reflections: bool = False,
    floor: float | None = None,
    tolerance: float | None = None,
    max_iter: int | None = None,
) -> CorollaryReport:
    """Refinement study of the subspace family next to the Hölder bound.

    The two verdicts are consistent when a finite bound comes with a bounded
    modulus trend and an infinite one with an exceptional trend. For shapes in
    the regime p·d_m > Q with d_t < d_m the outcome is only reported.
    """
    from .modulus.families import subspace_family_builder
    from .modulus.study import fuglede_refinement_study

    if not p > 1:
        raise DomainError(f"corollary experiments need p > 1, got {p}")
    k_h, k_v = shape
    bound = holder_bound(p, shape, algebra.m1, algebra.m2)
    builder = subspace_family_builder(
        algebra, k_h, k_v, p=p, planes=planes, seed=seed, with_reflections=with_reflections, radius=ball
    )
    study = fuglede_refinement_study(
        builder, p, resolutions, floor=floor, tolerance=tolerance, max_iter=max_iter
    )
    expected = "bounded" if bound.finite else "exceptional"
    consistent = study.verdict == expected
    d_t, d_m = k_h + k_v, k_h + 2 * k_v
    settled = not (d_t < d_m and p * d_m > algebra.Q)
    if not consistent and settled:
        logger.warning(
            "%s shape %s p=%g: Hölder bound %s but modulus trend %s",
            algebra.describe(), shape, p, "finite" if bound.finite else "infinite", study.verdict,
        )
    return CorollaryReport(algebra.to_dict(), (k_h, k_v), bound, study, consistent, float(ball), settled)
