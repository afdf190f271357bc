"""Tests for the H-type algebras and their self-checks."""

import numpy as np
import pytest

from carnotmod.algebra import (
    AlgebraKind,
    HTypeAlgebra,
    bracket_table,
    build_algebra,
    check_bracket_tables,
    complex_heisenberg,
    euclidean,
    expected_bracket_table,
    generic_step2,
    htype_defects,
    quaternion_heisenberg,
    real_heisenberg,
)
from carnotmod.errors import StructuralError, UnsupportedError


@pytest.fixture(params=["hR", "hC", "hQ"])
def heisenberg(request):
    return build_algebra(request.param, 2)


class TestDimensions:
    def test_real_heisenberg(self):
        h = real_heisenberg(2)
        assert (h.m1, h.m2, h.N, h.Q) == (4, 1, 5, 6)
        assert h.labels == ("X1", "X2", "Y1", "Y2", "eps")

    def test_complex_heisenberg(self):
        h = complex_heisenberg(1)
        assert (h.m1, h.m2, h.Q) == (4, 2, 8)

    def test_quaternion_heisenberg(self):
        h = quaternion_heisenberg(2)
        assert (h.m1, h.m2, h.Q) == (8, 3, 14)

    def test_euclidean_is_abelian(self):
        r = euclidean(3)
        assert r.is_abelian
        assert (r.m1, r.m2, r.Q) == (3, 0, 3)

    def test_invalid_n(self):
        with pytest.raises(StructuralError):
            real_heisenberg(0)


class TestBrackets:
    def test_real_heisenberg_xy(self):
        h = real_heisenberg(1)
        assert h.bracket(h.unit(0), h.unit(1)) == pytest.approx([1.0])
        assert h.bracket(h.unit(1), h.unit(0)) == pytest.approx([-1.0])

    def test_quaternion_slot_table(self):
        table = bracket_table(quaternion_heisenberg(1))
        assert table[("X1,1", "X2,1")] == {"eps1": 1.0}
        assert table[("X3,1", "X4,1")] == {"eps1": -1.0}
        assert table[("X2,1", "X3,1")] == {"eps3": -1.0}
        assert len(table) == 6

    def test_slots_do_not_interact(self):
        h = complex_heisenberg(2)
        assert np.allclose(h.bracket(h.unit(0), h.unit(4)), 0.0)

    def test_published_tables_reproduced(self, heisenberg):
        checks = check_bracket_tables(heisenberg)
        assert checks
        assert all(passed for _, passed in checks)

    def test_bracket_table_matches_expected_exactly(self, heisenberg):
        assert bracket_table(heisenberg) == expected_bracket_table(heisenberg)

    def test_generic_has_no_published_table(self):
        with pytest.raises(UnsupportedError):
            expected_bracket_table(generic_step2(real_heisenberg(1).J))


class TestHTypeIdentities:
    def test_defects_below_tolerance(self, heisenberg):
        defects = htype_defects(heisenberg, samples=1000, seed=0)
        assert all(value <= 1e-12 for value in defects.values())

    def test_quaternion_triple_product(self):
        defects = htype_defects(quaternion_heisenberg(1), samples=10, seed=1)
        assert defects["quaternion_triple"] <= 1e-15

    def test_euclidean_defects_vanish(self):
        assert htype_defects(euclidean(2), samples=10, seed=0) == {
            "j_square": 0.0,
            "htype_identity": 0.0,
            "antisymmetry": 0.0,
        }


class TestGenericStep2:
    def test_accepts_heisenberg_structure(self):
        algebra = generic_step2(complex_heisenberg(1).J)
        assert algebra.kind is AlgebraKind.GENERIC
        assert (algebra.m1, algebra.m2) == (4, 2)

    def test_rejects_non_skew(self):
        with pytest.raises(StructuralError, match="skew"):
            generic_step2(np.ones((1, 2, 2)))

    def test_rejects_commuting_structures(self):
        J = real_heisenberg(1).J
        with pytest.raises(StructuralError):
            generic_step2(np.concatenate([J, J]))

    def test_rejects_bad_shape(self):
        with pytest.raises(StructuralError):
            generic_step2(np.zeros((2, 3)))


class TestDescriptors:
    @pytest.mark.parametrize("kind,n", [("hR", 1), ("hC", 2), ("hQ", 1), ("euclid", 4)])
    def test_json_descriptor(self, kind, n):
        algebra = build_algebra(kind, n)
        assert algebra.to_dict() == {"kind": kind, "n": n}
        assert HTypeAlgebra.from_dict(algebra.to_dict()).same_as(algebra)

    def test_generic_descriptor_carries_matrices(self):
        algebra = generic_step2(real_heisenberg(1).J)
        assert HTypeAlgebra.from_dict(algebra.to_dict()).same_as(algebra)

    def test_generic_needs_matrices(self):
        with pytest.raises(UnsupportedError):
            build_algebra("generic")

    def test_require_same(self):
        with pytest.raises(StructuralError, match="mismatch"):
            real_heisenberg(1).require_same(real_heisenberg(2))
