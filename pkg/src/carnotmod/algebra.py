"""
Step-2 H-type Lie algebras in exponential coordinates.

An algebra is described by its J-matrices: for every orthonormal centre
vector ε_a there is a skew m1×m1 matrix J_a and the bracket of two horizontal
vectors is [u, v]_a = ⟨J_a u, v⟩.

Horizontal coordinates are ordered as follows:

- real Heisenberg h^n_R: X_1..X_n, Y_1..Y_n
- complex h^n_C and quaternion h^n_Q: slots of four, X_{1k}, X_{2k}, X_{3k},
  X_{4k} for k = 1..n (index 4(k-1) + i - 1)
- Euclidean R^n: e_1..e_n with no centre

Example:
    ```python
    from carnotmod.algebra import quaternion_heisenberg

    h = quaternion_heisenberg(1)
    h.bracket(h.unit(0), h.unit(3))  # -> [0, 0, 1] (= ε_3)
    ```
"""

import functools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .errors import StructuralError, UnsupportedError
from .rng import SeedLike, generator


class AlgebraKind(str, Enum):
    """Families of step-2 algebras."""

    REAL_HEIS = "hR"
    COMPLEX_HEIS = "hC"
    QUAT_HEIS = "hQ"
    GENERIC = "generic"
    EUCLIDEAN = "euclid"


@dataclass(frozen=True, eq=False)
class HTypeAlgebra:
    """Structure constants of a step-2 algebra g = g1 ⊕ g2.

    Attributes:
        kind: Family the algebra belongs to
        n: Family parameter (number of slots; dimension for Euclidean space)
        J: Array of shape (m2, m1, m1); ``J[a]`` is J for the a-th centre vector
        labels: Basis labels, horizontal first then vertical
    """

    kind: AlgebraKind
    n: int
    J: np.ndarray
    labels: tuple[str, ...] = field(default=())

    @property
    def m1(self) -> int:
        return int(self.J.shape[1])

    @property
    def m2(self) -> int:
        return int(self.J.shape[0])

    @property
    def N(self) -> int:
        """Topological dimension m1 + m2."""
        return self.m1 + self.m2

    @property
    def Q(self) -> int:
        """Homogeneous dimension m1 + 2 m2."""
        return self.m1 + 2 * self.m2

    @property
    def is_abelian(self) -> bool:
        return self.m2 == 0

    def unit(self, index: int) -> np.ndarray:
        """Horizontal basis vector number ``index``."""
        e = np.zeros(self.m1)
        e[index] = 1.0
        return e

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """[u, v] for horizontal vectors; broadcasts over leading axes."""
        return np.einsum("aij,...j,...i->...a", self.J, np.asarray(u), np.asarray(v))

    def j_of(self, z: np.ndarray) -> np.ndarray:
        """J_z = Σ z_a J_a."""
        return np.einsum("a,aij->ij", np.asarray(z, dtype=float), self.J)

    def same_as(self, other: "HTypeAlgebra") -> bool:
        if self is other:
            return True
        return (
            self.kind == other.kind
            and self.n == other.n
            and self.J.shape == other.J.shape
            and bool(np.array_equal(self.J, other.J))
        )

    def require_same(self, other: "HTypeAlgebra") -> None:
        if not self.same_as(other):
            raise StructuralError(
                f"algebra mismatch: {self.describe()} vs {other.describe()}"
            )

    def describe(self) -> str:
        return f"{self.kind.value}(n={self.n})"

    def to_dict(self) -> dict[str, Any]:
        """JSON descriptor; generic algebras carry their J matrices."""
        data: dict[str, Any] = {"kind": self.kind.value, "n": self.n}
        if self.kind is AlgebraKind.GENERIC:
            data["J"] = self.J.tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HTypeAlgebra":
        return build_algebra(data["kind"], int(data.get("n", 1)), J=data.get("J"))

    def __repr__(self) -> str:
        return f"HTypeAlgebra({self.describe()}, m1={self.m1}, m2={self.m2})"


# =============================================================================
# Constructors
# =============================================================================


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


def _slot_structures() -> np.ndarray:
    """J_1, J_2, J_3 on one quaternionic slot (X1, X2, X3, X4).

    They act as right multiplication by i, j, k when the slot is read as the
    quaternion x1 + x2 i + x3 j + x4 k.
    """
    J = np.zeros((3, 4, 4))
    # column c holds the image of X_{c+1}
    for a, images in enumerate(
        (
            ((1, 1), (0, -1), (3, -1), (2, 1)),
            ((2, 1), (3, 1), (0, -1), (1, -1)),
            ((3, 1), (2, -1), (1, 1), (0, -1)),
        )
    ):
        for column, (row, sign) in enumerate(images):
            J[a, row, column] = sign
    return J


def _block_diagonal(blocks: np.ndarray, n: int) -> np.ndarray:
    m2, size, _ = blocks.shape
    J = np.zeros((m2, size * n, size * n))
    for k in range(n):
        J[:, size * k : size * (k + 1), size * k : size * (k + 1)] = blocks
    return J


@functools.lru_cache(maxsize=None)
def real_heisenberg(n: int = 1) -> HTypeAlgebra:
    """h^n_R with [X_i, Y_i] = ε."""
    if n < 1:
        raise StructuralError("h^n_R needs n >= 1")
    J = np.zeros((1, 2 * n, 2 * n))
    for i in range(n):
        J[0, n + i, i] = 1.0  # J X_i = Y_i
        J[0, i, n + i] = -1.0  # J Y_i = -X_i
    labels = tuple(f"X{i + 1}" for i in range(n)) + tuple(
        f"Y{i + 1}" for i in range(n)
    )
    return HTypeAlgebra(AlgebraKind.REAL_HEIS, n, _frozen(J), labels + ("eps",))


@functools.lru_cache(maxsize=None)
def complex_heisenberg(n: int = 1) -> HTypeAlgebra:
    """h^n_C: four real directions per slot and a two-dimensional centre."""
    if n < 1:
        raise StructuralError("h^n_C needs n >= 1")
    J = _block_diagonal(_slot_structures()[:2], n)
    labels = tuple(f"X{i},{k}" for k in range(1, n + 1) for i in range(1, 5))
    return HTypeAlgebra(AlgebraKind.COMPLEX_HEIS, n, _frozen(J), labels + ("eps1", "eps2"))


@functools.lru_cache(maxsize=None)
def quaternion_heisenberg(n: int = 1) -> HTypeAlgebra:
    """h^n_Q: four real directions per slot and a three-dimensional centre."""
    if n < 1:
        raise StructuralError("h^n_Q needs n >= 1")
    J = _block_diagonal(_slot_structures(), n)
    labels = tuple(f"X{i},{k}" for k in range(1, n + 1) for i in range(1, 5))
    return HTypeAlgebra(
        AlgebraKind.QUAT_HEIS, n, _frozen(J), labels + ("eps1", "eps2", "eps3")
    )


@functools.lru_cache(maxsize=None)
def euclidean(n: int = 2) -> HTypeAlgebra:
    """Abelian R^n (no centre); the group law is vector addition."""
    if n < 1:
        raise StructuralError("R^n needs n >= 1")
    labels = tuple(f"e{i + 1}" for i in range(n))
    return HTypeAlgebra(AlgebraKind.EUCLIDEAN, n, _frozen(np.zeros((0, n, n))), labels)


def generic_step2(J: Any, atol: float = 1e-10) -> HTypeAlgebra:
    """Algebra from user supplied J matrices, checked against the H-type relations.

    Raises:
        StructuralError: if some J_a is not skew, J_a² ≠ -Id, or two J's do not anticommute
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 3 or J.shape[1] != J.shape[2] or J.shape[0] < 1:
        raise StructuralError("J must have shape (m2, m1, m1) with m2 >= 1")
    m2, m1, _ = J.shape
    identity = np.eye(m1)
    for a in range(m2):
        if not np.allclose(J[a], -J[a].T, atol=atol):
            raise StructuralError(f"J[{a}] is not skew-symmetric")
        for b in range(a, m2):
            anti = J[a] @ J[b] + J[b] @ J[a]
            target = -2.0 * identity if a == b else np.zeros_like(identity)
            if not np.allclose(anti, target, atol=atol):
                raise StructuralError(f"J[{a}], J[{b}] violate J_a J_b + J_b J_a = -2δ_ab Id")
    labels = tuple(f"x{i + 1}" for i in range(m1)) + tuple(
        f"t{a + 1}" for a in range(m2)
    )
    return HTypeAlgebra(AlgebraKind.GENERIC, m1, _frozen(J), labels)


def build_algebra(kind: str | AlgebraKind, n: int = 1, J: Any = None) -> HTypeAlgebra:
    """Construct an algebra from its JSON descriptor fields."""
    kind = AlgebraKind(kind)
    if kind is AlgebraKind.REAL_HEIS:
        return real_heisenberg(n)
    if kind is AlgebraKind.COMPLEX_HEIS:
        return complex_heisenberg(n)
    if kind is AlgebraKind.QUAT_HEIS:
        return quaternion_heisenberg(n)
    if kind is AlgebraKind.EUCLIDEAN:
        return euclidean(n)
    if J is None:
        raise UnsupportedError("generic algebras need explicit J matrices")
    return generic_step2(J)


# =============================================================================
# Self-checks
# =============================================================================


def bracket_table(algebra: HTypeAlgebra, atol: float = 1e-14) -> dict[tuple[str, str], dict[str, float]]:
    """Nonzero brackets of horizontal basis vectors, keyed by label pairs (i < j)."""
    table: dict[tuple[str, str], dict[str, float]] = {}
    centre = algebra.labels[algebra.m1 :]
    for i in range(algebra.m1):
        for j in range(i + 1, algebra.m1):
            value = algebra.bracket(algebra.unit(i), algebra.unit(j))
            entries = {
                centre[a]: float(value[a])
                for a in range(algebra.m2)
                if abs(value[a]) > atol
            }
            if entries:
                table[(algebra.labels[i], algebra.labels[j])] = entries
    return table


# [X_a, X_b] = sign * eps_c inside one slot, a < b
_SLOT_TABLE = {
    AlgebraKind.COMPLEX_HEIS: {
        (1, 2): {"eps1": 1.0},
        (3, 4): {"eps1": -1.0},
        (1, 3): {"eps2": 1.0},
        (2, 4): {"eps2": 1.0},
    },
    AlgebraKind.QUAT_HEIS: {
        (1, 2): {"eps1": 1.0},
        (3, 4): {"eps1": -1.0},
        (1, 3): {"eps2": 1.0},
        (2, 4): {"eps2": 1.0},
        (1, 4): {"eps3": 1.0},
        (2, 3): {"eps3": -1.0},
    },
}


def expected_bracket_table(algebra: HTypeAlgebra) -> dict[tuple[str, str], dict[str, float]]:
    """The published commutation relations for the three Heisenberg families."""
    if algebra.kind is AlgebraKind.REAL_HEIS:
        return {(f"X{i}", f"Y{i}"): {"eps": 1.0} for i in range(1, algebra.n + 1)}
    if algebra.kind in _SLOT_TABLE:
        return {
            (f"X{a},{k}", f"X{b},{k}"): dict(value)
            for k in range(1, algebra.n + 1)
            for (a, b), value in _SLOT_TABLE[algebra.kind].items()
        }
    if algebra.kind is AlgebraKind.EUCLIDEAN:
        return {}
    raise UnsupportedError("no published bracket table for generic algebras")


def check_bracket_tables(algebra: HTypeAlgebra) -> list[tuple[str, bool]]:
    """Compare every basis bracket with the published table.

    Returns:
        List of (check name, passed) pairs, one per basis pair (i < j)
    """
    expected = expected_bracket_table(algebra)
    actual = bracket_table(algebra)
    labels = algebra.labels[: algebra.m1]
    checks = []
    for i in range(algebra.m1):
        for j in range(i + 1, algebra.m1):
            key = (labels[i], labels[j])
            passed = actual.get(key, {}) == expected.get(key, {})
            checks.append((f"[{key[0]},{key[1]}]", passed))
    return checks


def htype_defects(algebra: HTypeAlgebra, samples: int = 1000, seed: SeedLike = 0) -> dict[str, float]:
    """Maximal defects of the H-type relations on random vectors.

    Checks J_z² = -|z|² Id, ⟨J_z u, v⟩ = ⟨z, [u, v]⟩, antisymmetry of the
    bracket, and, for h^n_Q, J_3 J_2 J_1 = -Id (J_1 applied first).
    """
    rng = generator(seed)
    m1, m2 = algebra.m1, algebra.m2
    defects = {"j_square": 0.0, "htype_identity": 0.0, "antisymmetry": 0.0}
    if m2 == 0:
        return defects
    u = rng.standard_normal((samples, m1))
    v = rng.standard_normal((samples, m1))
    z = rng.standard_normal((samples, m2))
    Jz = np.einsum("sa,aij->sij", z, algebra.J)
    square = np.einsum("sij,sjk->sik", Jz, Jz)
    target = -np.einsum("sa,sa->s", z, z)[:, None, None] * np.eye(m1)
    defects["j_square"] = float(np.max(np.abs(square - target)))
    lhs = np.einsum("sij,sj,si->s", Jz, u, v)
    rhs = np.einsum("sa,sa->s", z, algebra.bracket(u, v))
    defects["htype_identity"] = float(np.max(np.abs(lhs - rhs)))
    defects["antisymmetry"] = float(
        np.max(np.abs(algebra.bracket(u, v) + algebra.bracket(v, u)))
    )
    if algebra.kind is AlgebraKind.QUAT_HEIS:
        triple = algebra.J[2] @ algebra.J[1] @ algebra.J[0]
        defects["quaternion_triple"] = float(np.max(np.abs(triple + np.eye(m1))))
    return defects
