"""
Haar sampling, grading-preserving isometries and orthogonal Grassmannians.

An isometry is a pair (U, V) of orthogonal matrices acting on g1 and g2 with

    Uᵀ J_a U = Σ_b V_ab J_b    for every centre basis vector ε_a,

which is exactly the condition for (x, t) -> (Ux, Vt) to be a group
automorphism. Quaternionic matrices are stored as real 4n×4n blocks acting by
left multiplication on the slots, so they commute with the J-structures (right
multiplication by i, j, k).

Example:
    ```python
    from carnotmod.algebra import real_heisenberg
    from carnotmod.grassmann import reference_subalgebra, sample_grassmannian

    h = real_heisenberg(2)
    ref = reference_subalgebra(h, 2, 0)  # span{X1, X2}
    planes = sample_grassmannian(h, ref, count=100, seed=7)
    ```
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import qr, subspace_angles

from .algebra import AlgebraKind, HTypeAlgebra
from .errors import DomainError, StructuralError, UnsupportedError
from .rng import SeedLike, child, generator

logger = logging.getLogger("carnotmod.grassmann")


# =============================================================================
# Haar samplers
# =============================================================================


def haar_orthogonal(n: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed element of O(n): QR of a Gaussian matrix with sign fix."""
    if n < 1:
        raise DomainError(f"matrix size must be >= 1, got {n}")
    rng = generator(seed)
    q, r = qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def haar_unitary(n: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed element of U(n): QR of a Ginibre matrix with phase fix."""
    if n < 1:
        raise DomainError(f"matrix size must be >= 1, got {n}")
    rng = generator(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def quaternion_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays (..., 4) stored as (w, i, j, k)."""
    a0, a1, a2, a3 = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    b0, b1, b2, b3 = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def quaternion_conjugate(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def left_multiplication(a: np.ndarray) -> np.ndarray:
    """4×4 real matrix of x -> a x on one slot."""
    a0, a1, a2, a3 = np.asarray(a, dtype=float)
    return np.array(
        [
            [a0, -a1, -a2, -a3],
            [a1, a0, -a3, a2],
            [a2, a3, a0, -a1],
            [a3, -a2, a1, a0],
        ]
    )


def quaternion_matrix_to_real(a: np.ndarray) -> np.ndarray:
    """Real 4n×4n form of an n×n quaternion matrix (shape (n, n, 4))."""
    n = a.shape[0]
    real = np.zeros((4 * n, 4 * n))
    for row in range(n):
        for col in range(n):
            real[4 * row : 4 * row + 4, 4 * col : 4 * col + 4] = left_multiplication(a[row, col])
    return real


def haar_symplectic_quaternion(n: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed element of Sp(n) as a real 4n×4n orthogonal matrix.

    Quaternionic Gram-Schmidt on the columns of a Gaussian quaternion matrix
    (scalars act on the right, so ⟨u, v⟩ = Σ_r conj(u_r) v_r and the
    projection of v on a unit u is u ⟨u, v⟩).
    """
    if n < 1:
        raise DomainError(f"matrix size must be >= 1, got {n}")
    rng = generator(seed)
    columns = rng.standard_normal((n, n, 4))  # columns[c] is column c, entries (row, 4)
    basis: list[np.ndarray] = []
    for c in range(n):
        v = columns[c]
        for u in basis:
            coefficient = np.sum(quaternion_product(quaternion_conjugate(u), v), axis=0)
            v = v - quaternion_product(u, coefficient[None, :])
        basis.append(v / np.linalg.norm(v))
    a = np.stack(basis, axis=1)  # (row, column, 4)
    return quaternion_matrix_to_real(a)


def _unitary_to_real(a: np.ndarray) -> np.ndarray:
    """U(n) inside O(2n) for the coordinates (x_1..x_n, y_1..y_n), z = x + i y."""
    b, c = a.real, a.imag
    return np.block([[b, -c], [c, b]])


def _right_multiplication(algebra: HTypeAlgebra, q: np.ndarray) -> np.ndarray:
    """x -> x q on every slot; J_1, J_2 are right multiplication by i, j and x k = -J_1 J_2 x."""
    J1, J2 = algebra.J[0], algebra.J[1]
    return q[0] * np.eye(algebra.m1) + q[1] * J1 + q[2] * J2 - q[3] * (J1 @ J2)


# =============================================================================
# Isometries
# =============================================================================


@dataclass(frozen=True, eq=False)
class Isometry:
    """Grading-preserving isometry (x, t) -> (U x, V t)."""

    U: np.ndarray
    V: np.ndarray

    @classmethod
    def identity(cls, algebra: HTypeAlgebra) -> "Isometry":
        return cls(np.eye(algebra.m1), np.eye(algebra.m2))

    @classmethod
    def from_horizontal(cls, algebra: HTypeAlgebra, U: np.ndarray) -> "Isometry":
        """Isometry with V induced by U (see :func:`center_action`)."""
        return cls(np.asarray(U, dtype=float), center_action(algebra, U))

    def apply(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        m1 = self.U.shape[0]
        x, t = coords[..., :m1], coords[..., m1:]
        return np.concatenate([x @ self.U.T, t @ self.V.T], axis=-1)

    def compose(self, other: "Isometry") -> "Isometry":
        """self ∘ other."""
        return Isometry(self.U @ other.U, self.V @ other.V)

    def inverse(self) -> "Isometry":
        return Isometry(self.U.T, self.V.T)

    def orthogonality_defect(self) -> float:
        du = np.abs(self.U.T @ self.U - np.eye(len(self.U))).max(initial=0.0)
        dv = np.abs(self.V.T @ self.V - np.eye(len(self.V))).max(initial=0.0)
        return float(max(du, dv))

    def compatibility_residual(self, algebra: HTypeAlgebra) -> float:
        """max_a ‖Uᵀ J_a U - Σ_b V_ab J_b‖_max."""
        if algebra.m2 == 0:
            return 0.0
        conjugated = np.einsum("ji,ajk,kl->ail", self.U, algebra.J, self.U)
        target = np.einsum("ab,bij->aij", self.V, algebra.J)
        return float(np.abs(conjugated - target).max())

    def to_dict(self) -> dict[str, Any]:
        return {"U": self.U.tolist(), "V": self.V.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Isometry":
        V = np.asarray(data["V"], dtype=float)
        return cls(np.asarray(data["U"], dtype=float), V.reshape(len(V), len(V)))


def center_action(algebra: HTypeAlgebra, U: np.ndarray) -> np.ndarray:
    """The V with Uᵀ J_a U = Σ_b V_ab J_b, read off by Frobenius projection.

    The projection is exact only when U is compatible; check
    :meth:`Isometry.compatibility_residual` afterwards.
    """
    U = np.asarray(U, dtype=float)
    if algebra.m2 == 0:
        return np.zeros((0, 0))
    conjugated = np.einsum("ji,ajk,kl->ail", U, algebra.J, U)
    return np.einsum("aij,bij->ab", conjugated, algebra.J) / algebra.m1


def sample_isometry(
    algebra: HTypeAlgebra, seed: SeedLike, with_reflections: bool = False
) -> Isometry:
    """Random isometry from the grading-preserving isometry group.

    - hR: U(n) embedded in O(2n), composed with y -> -y (V = -1) with probability ½
    - hC: x -> A x q with A Haar in Sp(n) and q = cos φ + k sin φ (V a rotation of the centre)
    - hQ: x -> A x q with A Haar in Sp(n) and q uniform on S³ (V Haar on SO(3))
    - euclid: Haar O(n)

    With ``with_reflections`` the hC/hQ samples are composed with J_1 with
    probability ½.

    Raises:
        UnsupportedError: for generic algebras
    """
    rng = generator(seed)
    kind = algebra.kind
    if kind is AlgebraKind.GENERIC:
        raise UnsupportedError("isometry sampling needs a Heisenberg-type or Euclidean algebra")
    if kind is AlgebraKind.EUCLIDEAN:
        return Isometry(haar_orthogonal(algebra.n, rng), np.zeros((0, 0)))
    if kind is AlgebraKind.REAL_HEIS:
        n = algebra.n
        U = _unitary_to_real(haar_unitary(n, rng))
        if rng.random() < 0.5:
            U = np.diag(np.concatenate([np.ones(n), -np.ones(n)])) @ U
        return Isometry.from_horizontal(algebra, U)

    A = haar_symplectic_quaternion(algebra.n, rng)
    if kind is AlgebraKind.COMPLEX_HEIS:
        phi = rng.uniform(0.0, 2.0 * np.pi)
        q = np.array([np.cos(phi), 0.0, 0.0, np.sin(phi)])
    else:
        q = rng.standard_normal(4)
        q /= np.linalg.norm(q)
    U = _right_multiplication(algebra, q) @ A
    if with_reflections and rng.random() < 0.5:
        U = algebra.J[0] @ U
    return Isometry.from_horizontal(algebra, U)


# =============================================================================
# Subalgebras
# =============================================================================


def _closure_defect(algebra: HTypeAlgebra, horizontal: np.ndarray, vertical: np.ndarray) -> float:
    if algebra.m2 == 0 or horizontal.shape[1] < 2:
        return 0.0
    brackets = np.einsum("aij,ik,jl->kla", algebra.J, horizontal, horizontal)
    residual = brackets - brackets @ vertical @ vertical.T
    return float(np.abs(residual).max())


def _orthogonal_complement(basis: np.ndarray, dim: int) -> np.ndarray:
    if dim == 0:
        return np.zeros((0, 0))
    k = basis.shape[1]
    if k == 0:
        return np.eye(dim)
    q, _ = qr(basis, mode="full")
    return q[:, k:]


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """Homogeneous subalgebra V = span(h_basis) ⊕ span(t_basis).

    Attributes:
        algebra: Ambient algebra
        h_basis: Orthonormal columns in g1, shape (m1, k_h)
        t_basis: Orthonormal columns in g2, shape (m2, k_v)
        isometry: Isometry that carried the reference subalgebra here, if sampled
        label: Free-form description
    """

    algebra: HTypeAlgebra
    h_basis: np.ndarray
    t_basis: np.ndarray
    isometry: Isometry | None = None
    label: str = ""

    def __post_init__(self) -> None:
        algebra = self.algebra
        h = np.asarray(self.h_basis, dtype=float).reshape(algebra.m1, -1)
        t = (
            np.asarray(self.t_basis, dtype=float).reshape(algebra.m2, -1)
            if algebra.m2
            else np.zeros((0, 0))
        )
        for name, basis in (("horizontal", h), ("vertical", t)):
            if basis.shape[1] and not np.allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-10):
                raise StructuralError(f"{name} basis is not orthonormal")
        object.__setattr__(self, "h_basis", h)
        object.__setattr__(self, "t_basis", t)

    @property
    def k_h(self) -> int:
        return int(self.h_basis.shape[1])

    @property
    def k_v(self) -> int:
        return int(self.t_basis.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.k_h, self.k_v

    @property
    def d_t(self) -> int:
        return self.k_h + self.k_v

    @property
    def d_m(self) -> int:
        return self.k_h + 2 * self.k_v

    def complement(self) -> "Subalgebra":
        """Orthogonal complement V^⊥ (layer by layer)."""
        return Subalgebra(
            self.algebra,
            _orthogonal_complement(self.h_basis, self.algebra.m1),
            _orthogonal_complement(self.t_basis, self.algebra.m2),
            label=f"{self.label}^perp" if self.label else "",
        )

    def closure_defect(self) -> float:
        """max |[h_i, h_j] - proj_T [h_i, h_j]| over basis pairs."""
        return _closure_defect(self.algebra, self.h_basis, self.t_basis)

    def complement_defect(self) -> float:
        other = self.complement()
        return _closure_defect(self.algebra, other.h_basis, other.t_basis)

    def is_complemented(self, tol: float = 1e-10) -> bool:
        """Both V and V^⊥ are bracket-closed."""
        return self.closure_defect() <= tol and self.complement_defect() <= tol

    def transform(self, iso: Isometry) -> "Subalgebra":
        """Image (U H, V T); the provenance composes with any earlier one."""
        provenance = iso if self.isometry is None else iso.compose(self.isometry)
        t = iso.V @ self.t_basis if self.algebra.m2 else self.t_basis
        return Subalgebra(self.algebra, iso.U @ self.h_basis, t, provenance, self.label)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "algebra": self.algebra.to_dict(),
            "h_basis": self.h_basis.tolist(),
            "t_basis": self.t_basis.tolist(),
            "label": self.label,
        }
        if self.isometry is not None:
            data["isometry"] = self.isometry.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any], algebra: HTypeAlgebra | None = None) -> "Subalgebra":
        algebra = algebra or HTypeAlgebra.from_dict(data["algebra"])
        iso = data.get("isometry")
        isometry = None if iso is None else Isometry.from_dict(iso)
        return cls(
            algebra,
            np.asarray(data["h_basis"], dtype=float),
            np.asarray(data["t_basis"], dtype=float),
            isometry,
            data.get("label", ""),
        )

    def __repr__(self) -> str:
        return f"Subalgebra({self.algebra.describe()}, k_h={self.k_h}, k_v={self.k_v})"


def _columns(dim: int, indices: list[int]) -> np.ndarray:
    basis = np.zeros((dim, len(indices)))
    for column, index in enumerate(indices):
        basis[index, column] = 1.0
    return basis


def _isotropic_indices(algebra: HTypeAlgebra) -> list[int]:
    """Coordinate vectors with pairwise vanishing brackets, in construction order."""
    n = algebra.n
    if algebra.kind is AlgebraKind.REAL_HEIS:
        return list(range(n))  # X_1..X_n
    if algebra.kind is AlgebraKind.COMPLEX_HEIS:
        return [index for k in range(n) for index in (4 * k, 4 * k + 3)]  # X_{1k}, X_{4k}
    return [4 * k for k in range(n)]  # X_{1k}


def admissible_shapes(algebra: HTypeAlgebra) -> list[tuple[int, int]]:
    """Every (k_h, k_v) with an orthogonally complemented reference subalgebra."""
    n, kind = algebra.n, algebra.kind
    if kind is AlgebraKind.EUCLIDEAN:
        return [(k, 0) for k in range(1, n)]
    if kind is AlgebraKind.REAL_HEIS:
        return [(k, 0) for k in range(1, n + 1)] + [(k, 1) for k in range(n, 2 * n)]
    if kind is AlgebraKind.COMPLEX_HEIS:
        return (
            [(k, 0) for k in range(1, 2 * n + 1)]
            + [(2 * n, 1)]
            + [(k, 2) for k in range(2 * n, 4 * n)]
        )
    if kind is AlgebraKind.QUAT_HEIS:
        return [(k, 0) for k in range(1, n + 1)] + [(k, 3) for k in range(3 * n, 4 * n)]
    raise UnsupportedError("orthogonal Grassmannians need a Heisenberg-type or Euclidean algebra")


def reference_subalgebra(algebra: HTypeAlgebra, k_h: int, k_v: int = 0) -> Subalgebra:
    """Explicit orthogonally complemented subalgebra of shape (k_h, k_v).

    Horizontal shapes are spanned by isotropic coordinate vectors (X_i for
    hR, X_{1k}, X_{4k} for hC, X_{1k} for hQ). Vertical shapes contain the
    required part of the centre and the complement of an isotropic set.

    Raises:
        DomainError: naming the constraint that (k_h, k_v) violates
        UnsupportedError: for generic algebras
    """
    m1, m2, kind = algebra.m1, algebra.m2, algebra.kind
    shapes = admissible_shapes(algebra)
    if (k_h, k_v) not in shapes:
        raise DomainError(_shape_violation(algebra, k_h, k_v))
    label = f"ref({k_h},{k_v})"
    if kind is AlgebraKind.EUCLIDEAN:
        return Subalgebra(algebra, _columns(m1, list(range(k_h))), np.zeros((0, 0)), label=label)

    isotropic = _isotropic_indices(algebra)
    if k_v == 0:
        return Subalgebra(algebra, _columns(m1, isotropic[:k_h]), np.zeros((m2, 0)), label=label)
    if kind is AlgebraKind.COMPLEX_HEIS and k_v == 1:
        # span{X_1k, X_4k} ⊕ ε1, complement span{X_2k, X_3k} ⊕ ε2
        return Subalgebra(algebra, _columns(m1, isotropic), _columns(m2, [0]), label=label)
    removed = set(isotropic[: m1 - k_h])
    kept = [i for i in range(m1) if i not in removed]
    return Subalgebra(algebra, _columns(m1, kept), np.eye(m2), label=label)


def _shape_violation(algebra: HTypeAlgebra, k_h: int, k_v: int) -> str:
    n, m2, kind = algebra.n, algebra.m2, algebra.kind
    name = algebra.describe()
    if k_h < 0 or k_v < 0 or (k_h == 0 and k_v == 0):
        return f"{name}: shape ({k_h}, {k_v}) must have k_h, k_v >= 0 and k_h + k_v >= 1"
    if kind is AlgebraKind.EUCLIDEAN:
        return f"{name}: need 1 <= k < n = {n} and no vertical part, got ({k_h}, {k_v})"
    if k_v == 0:
        bound = 2 * n if kind is AlgebraKind.COMPLEX_HEIS else n
        return (
            f"{name}: a horizontal subalgebra is isotropic, so k_h <= {bound}, got {k_h}"
        )
    if kind is AlgebraKind.COMPLEX_HEIS:
        if k_v == 1:
            return f"{name}: k_v = 1 needs k_h = {2 * n}, got {k_h}"
        if k_v == 2:
            return f"{name}: k_v = 2 needs {2 * n} <= k_h <= {4 * n - 1}, got {k_h}"
        return f"{name}: k_v must be 0, 1 or 2, got {k_v}"
    if k_v != m2:
        return f"{name}: a vertical subalgebra must contain the whole centre (k_v = {m2}), got {k_v}"
    low = n if kind is AlgebraKind.REAL_HEIS else 3 * n
    return (
        f"{name}: with k_v = {m2} the complement is isotropic, so "
        f"{low} <= k_h <= {algebra.m1 - 1}, got {k_h}"
    )


# =============================================================================
# Grassmannian sampling
# =============================================================================


def sample_grassmannian(
    algebra: HTypeAlgebra,
    ref: Subalgebra,
    count: int,
    seed: int,
    with_reflections: bool = False,
) -> list[Subalgebra]:
    """``count`` independent images of ``ref`` under sampled isometries.

    Sample i uses the child stream (seed, i), so any prefix of the list is
    reproducible on its own.
    """
    algebra.require_same(ref.algebra)
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}")
    if not ref.is_complemented():
        raise StructuralError(f"{ref!r} is not orthogonally complemented")
    return [
        ref.transform(sample_isometry(algebra, child(seed, i), with_reflections))
        for i in range(count)
    ]


@dataclass(frozen=True)
class SphereOrbit:
    """Sampled orbit {(U x, V t)} of a point under the isometry group."""

    horizontal: np.ndarray
    vertical: np.ndarray
    degenerate: bool = False
    radii: tuple[float, float] = field(default=(0.0, 0.0))


def sphere_pushforward(
    algebra: HTypeAlgebra,
    x: Any,
    t: Any,
    count: int,
    seed: int,
    with_reflections: bool = False,
) -> SphereOrbit:
    """Images of (x, t) under ``count`` sampled isometries.

    The horizontal part is uniform on S^h(0, |x|), the vertical part uniform
    on S^v(0, |t|), and the two are independent. ``x = 0`` gives a degenerate
    orbit (flagged, with a warning).
    """
    x = np.asarray(x, dtype=float).reshape(algebra.m1)
    t = np.asarray(t, dtype=float).reshape(algebra.m2)
    r1, r2 = float(np.linalg.norm(x)), float(np.linalg.norm(t))
    degenerate = r1 == 0.0
    if degenerate:
        logger.warning("sphere_pushforward: zero horizontal radius, the orbit is degenerate")
    horizontal = np.empty((count, algebra.m1))
    vertical = np.empty((count, algebra.m2))
    for i in range(count):
        iso = sample_isometry(algebra, child(seed, i), with_reflections)
        horizontal[i] = iso.U @ x
        vertical[i] = iso.V @ t if algebra.m2 else t
    return SphereOrbit(horizontal, vertical, degenerate, (r1, r2))


@dataclass(frozen=True)
class TransportReport:
    """Isometry carrying one sampled subalgebra onto another."""

    isometry: Isometry
    max_angle: float
    ok: bool

    def __bool__(self) -> bool:
        return self.ok


def transport(a: Subalgebra, b: Subalgebra, tol: float = 1e-8) -> TransportReport:
    """Conjugating isometry iso_b ∘ iso_a⁻¹ between two samples of one reference.

    Verified by the largest principal angle between the transported and the
    target subspaces (per layer).

    Raises:
        DomainError: if the shapes differ or a sample has no isometry provenance
    """
    a.algebra.require_same(b.algebra)
    if a.shape != b.shape:
        raise DomainError(f"shapes differ: {a.shape} vs {b.shape}")
    if a.isometry is None or b.isometry is None:
        raise DomainError("transport needs samples produced by sample_grassmannian")
    iso = b.isometry.compose(a.isometry.inverse())
    moved = a.transform(iso)
    angles = [0.0]
    if a.k_h:
        angles.extend(subspace_angles(moved.h_basis, b.h_basis))
    if a.k_v:
        angles.extend(subspace_angles(moved.t_basis, b.t_basis))
    max_angle = float(np.max(angles))
    return TransportReport(iso, max_angle, max_angle <= tol)
