"""Tests for homogeneous splits, projections and cones."""

import numpy as np
import pytest

from carnotmod.algebra import complex_heisenberg, euclidean, real_heisenberg
from carnotmod.errors import DomainError, StructuralError
from carnotmod.grassmann import reference_subalgebra
from carnotmod.group import GroupPoint, default_norm, random_coords
from carnotmod.splits import (
    HomogeneousSplit,
    c0_estimate,
    compose,
    cone_contains,
    coordinate_split,
    decompose,
    decompose_coords,
    project_h,
    project_m,
    split_from_subalgebra,
)


@pytest.fixture
def h1():
    return real_heisenberg(1)


@pytest.fixture
def vertical_split(h1):
    """M = span{Y, ε}, H = span{X}."""
    return coordinate_split(h1, [1], [0])


class TestConstruction:
    def test_dimensions(self, vertical_split):
        assert vertical_split.m_dims == (1, 1)
        assert vertical_split.h_dims == (1, 0)
        assert vertical_split.d_t == 2
        assert vertical_split.d_m == 3

    def test_default_label(self, vertical_split):
        assert vertical_split.label == "M=span{Y1,eps}"

    def test_horizontal_plane_is_not_a_subalgebra(self, h1):
        with pytest.raises(StructuralError, match="M is not a subalgebra"):
            coordinate_split(h1, [0, 1], [])

    def test_complement_must_be_a_subalgebra(self, h1):
        # H = span{X, Y} without the centre
        with pytest.raises(StructuralError, match="H is not a subalgebra"):
            coordinate_split(h1, [], [0])

    def test_index_out_of_range(self, h1):
        with pytest.raises(DomainError):
            coordinate_split(h1, [2], [])

    def test_round_trip(self, vertical_split):
        restored = HomogeneousSplit.from_dict(vertical_split.to_dict())
        assert np.allclose(restored.m_h, vertical_split.m_h)
        assert np.allclose(restored.h_h, vertical_split.h_h)
        assert restored.m_dims == vertical_split.m_dims

    def test_from_index_lists(self):
        split = HomogeneousSplit.from_dict({"algebra": {"kind": "hR", "n": 1}, "M_h": [0], "M_v": [0]})
        assert split.m_dims == (1, 1)

    def test_from_subalgebra(self):
        h = complex_heisenberg(1)
        split = split_from_subalgebra(h, reference_subalgebra(h, 2, 1))
        assert split.m_dims == (2, 1)
        assert split.h_dims == (2, 1)


class TestDecompose:
    def test_compose_inverts_decompose(self):
        h = complex_heisenberg(1)
        split = split_from_subalgebra(h, reference_subalgebra(h, 2, 1))
        for coords in random_coords(h, 20, seed=1):
            g = GroupPoint.from_coords(h, coords)
            m, k = decompose(g, split)
            assert np.allclose(compose(m, k).coords, g.coords)

    def test_factors_lie_in_their_subgroups(self, h1, vertical_split):
        g = GroupPoint.from_coords(h1, [1.0, 2.0, 3.0])
        m, k = project_m(g, vertical_split), project_h(g, vertical_split)
        assert m.x[0] == 0.0
        assert k.x[1] == 0.0 and k.t[0] == 0.0
        # t_m = t - ½ [x_m, x_h] = 3 - ½ [2Y, X]
        assert m.t[0] == pytest.approx(3.0 + 1.0)

    def test_vectorized_matches_pointwise(self, h1, vertical_split):
        coords = random_coords(h1, 5, seed=0)
        m, k = decompose_coords(vertical_split, coords)
        for row, mr, kr in zip(coords, m, k, strict=True):
            pm, pk = decompose(GroupPoint.from_coords(h1, row), vertical_split)
            assert np.allclose(pm.coords, mr)
            assert np.allclose(pk.coords, kr)

    def test_mismatched_algebra(self, vertical_split):
        with pytest.raises(StructuralError):
            decompose(GroupPoint.identity(real_heisenberg(2)), vertical_split)


class TestCones:
    def test_h_direction_is_inside(self, h1, vertical_split):
        e = GroupPoint.identity(h1)
        p = GroupPoint.from_coords(h1, [1.0, 0.0, 0.0])
        assert cone_contains(vertical_split, e, 0.5, p, default_norm())

    def test_m_direction_is_outside(self, h1, vertical_split):
        e = GroupPoint.identity(h1)
        p = GroupPoint.from_coords(h1, [0.0, 1.0, 0.0])
        assert not cone_contains(vertical_split, e, 0.5, p, default_norm())

    def test_opening_must_be_positive(self, h1, vertical_split):
        e = GroupPoint.identity(h1)
        with pytest.raises(DomainError):
            cone_contains(vertical_split, e, 0.0, e, default_norm())


class TestC0:
    def test_orthogonal_euclidean_split(self):
        split = coordinate_split(euclidean(2), [0], [])
        c0 = c0_estimate(split, default_norm(), samples=10_000, seed=0)
        assert 1 / np.sqrt(2) - 1e-12 <= c0 <= 1.02 / np.sqrt(2)

    def test_heisenberg_c0_is_positive(self, vertical_split):
        c0 = c0_estimate(vertical_split, default_norm(), samples=2000, seed=1)
        assert 0.0 < c0 <= 1.0

    def test_needs_samples(self, vertical_split):
        with pytest.raises(DomainError):
            c0_estimate(vertical_split, default_norm(), samples=10, seed=0)
