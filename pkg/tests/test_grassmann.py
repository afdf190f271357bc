"""Tests for Haar samplers, isometries and Grassmannians of subalgebras."""

import numpy as np
import pytest

from carnotmod.algebra import (
    complex_heisenberg,
    euclidean,
    generic_step2,
    quaternion_heisenberg,
    real_heisenberg,
)
from carnotmod.errors import DomainError, StructuralError, UnsupportedError
from carnotmod.grassmann import (
    Isometry,
    Subalgebra,
    admissible_shapes,
    haar_orthogonal,
    haar_symplectic_quaternion,
    haar_unitary,
    reference_subalgebra,
    sample_grassmannian,
    sample_isometry,
    sphere_pushforward,
    transport,
)
from carnotmod.rng import child

ALGEBRAS = [
    real_heisenberg(1),
    real_heisenberg(2),
    complex_heisenberg(1),
    quaternion_heisenberg(1),
    quaternion_heisenberg(2),
    euclidean(3),
]


def ids(algebra):
    return algebra.describe()


class TestHaarSamplers:
    def test_orthogonal(self):
        q = haar_orthogonal(4, seed=0)
        assert np.allclose(q.T @ q, np.eye(4))

    def test_orthogonal_moment(self):
        draws = np.array([haar_orthogonal(3, seed=child(5, i))[0, 0] ** 2 for i in range(4000)])
        assert draws.mean() == pytest.approx(1 / 3, abs=0.02)

    def test_unitary(self):
        u = haar_unitary(3, seed=1)
        assert np.allclose(u.conj().T @ u, np.eye(3))

    def test_symplectic_is_orthogonal(self):
        a = haar_symplectic_quaternion(2, seed=2)
        assert a.shape == (8, 8)
        assert np.allclose(a.T @ a, np.eye(8))

    def test_symplectic_preserves_the_quaternionic_structure(self):
        h = quaternion_heisenberg(2)
        iso = Isometry.from_horizontal(h, haar_symplectic_quaternion(2, seed=3))
        assert iso.compatibility_residual(h) <= 1e-12

    def test_seeded_draws_repeat(self):
        assert np.array_equal(haar_orthogonal(3, seed=9), haar_orthogonal(3, seed=9))

    def test_size_must_be_positive(self):
        with pytest.raises(DomainError):
            haar_unitary(0, seed=0)


class TestIsometries:
    @pytest.mark.parametrize("algebra", ALGEBRAS, ids=ids)
    def test_sampled_isometries_are_compatible(self, algebra):
        for i in range(20):
            iso = sample_isometry(algebra, seed=child(1, i))
            assert iso.orthogonality_defect() <= 1e-12
            assert iso.compatibility_residual(algebra) <= 1e-12

    @pytest.mark.parametrize("algebra", [complex_heisenberg(1), quaternion_heisenberg(1)], ids=ids)
    def test_reflections_stay_compatible(self, algebra):
        for i in range(20):
            iso = sample_isometry(algebra, seed=child(2, i), with_reflections=True)
            assert iso.compatibility_residual(algebra) <= 1e-12

    def test_real_heisenberg_centre_action_is_a_sign(self):
        h = real_heisenberg(2)
        signs = {round(float(sample_isometry(h, seed=child(3, i)).V[0, 0])) for i in range(40)}
        assert signs == {-1, 1}

    def test_compose_and_inverse(self):
        h = quaternion_heisenberg(1)
        iso = sample_isometry(h, seed=4)
        identity = iso.compose(iso.inverse())
        assert np.allclose(identity.U, np.eye(4))
        assert np.allclose(identity.V, np.eye(3))

    def test_dict_round_trip(self):
        iso = sample_isometry(complex_heisenberg(1), seed=5)
        restored = Isometry.from_dict(iso.to_dict())
        assert np.array_equal(restored.U, iso.U)
        assert np.array_equal(restored.V, iso.V)

    def test_generic_algebra(self):
        J = np.array([[[0.0, 1.0], [-1.0, 0.0]]])
        with pytest.raises(UnsupportedError):
            sample_isometry(generic_step2(J), seed=0)


class TestSubalgebras:
    @pytest.mark.parametrize("algebra", ALGEBRAS, ids=ids)
    def test_reference_subalgebras_are_complemented(self, algebra):
        for k_h, k_v in admissible_shapes(algebra):
            ref = reference_subalgebra(algebra, k_h, k_v)
            assert ref.shape == (k_h, k_v)
            assert ref.is_complemented()

    def test_complement_shape(self):
        h = complex_heisenberg(1)
        ref = reference_subalgebra(h, 2, 1)
        assert ref.complement().shape == (2, 1)

    def test_dimensions(self):
        ref = reference_subalgebra(quaternion_heisenberg(1), 3, 3)
        assert ref.d_t == 6
        assert ref.d_m == 9

    def test_horizontal_dimension_is_bounded_by_isotropy(self):
        with pytest.raises(DomainError, match="isotropic"):
            reference_subalgebra(real_heisenberg(1), 2, 0)

    def test_euclidean_shape(self):
        with pytest.raises(DomainError):
            reference_subalgebra(euclidean(3), 3, 0)

    def test_admissible_shapes(self):
        assert admissible_shapes(real_heisenberg(2)) == [(1, 0), (2, 0), (2, 1), (3, 1)]
        assert admissible_shapes(quaternion_heisenberg(1)) == [(1, 0), (3, 3)]

    def test_basis_must_be_orthonormal(self):
        with pytest.raises(StructuralError):
            Subalgebra(euclidean(2), np.array([[2.0], [0.0]]), np.zeros((0, 0)))

    def test_dict_round_trip(self):
        h = real_heisenberg(1)
        sample = sample_grassmannian(h, reference_subalgebra(h, 1, 1), 1, seed=0)[0]
        restored = Subalgebra.from_dict(sample.to_dict())
        assert np.allclose(restored.h_basis, sample.h_basis)
        assert restored.isometry is not None


class TestGrassmannian:
    @pytest.mark.parametrize("algebra", ALGEBRAS, ids=ids)
    def test_samples_are_complemented(self, algebra):
        for k_h, k_v in admissible_shapes(algebra):
            ref = reference_subalgebra(algebra, k_h, k_v)
            for sample in sample_grassmannian(algebra, ref, 5, seed=7):
                assert sample.shape == (k_h, k_v)
                assert sample.closure_defect() <= 1e-10
                assert sample.is_complemented()

    def test_prefixes_are_reproducible(self):
        h = complex_heisenberg(1)
        ref = reference_subalgebra(h, 2, 0)
        short = sample_grassmannian(h, ref, 2, seed=11)
        long = sample_grassmannian(h, ref, 5, seed=11)
        for a, b in zip(short, long[:2], strict=True):
            assert np.array_equal(a.h_basis, b.h_basis)

    def test_transport_between_samples(self):
        h = quaternion_heisenberg(1)
        a, b = sample_grassmannian(h, reference_subalgebra(h, 3, 3), 2, seed=12)
        report = transport(a, b)
        assert report
        assert report.isometry.compatibility_residual(h) <= 1e-10

    def test_transport_needs_provenance(self):
        h = real_heisenberg(1)
        ref = reference_subalgebra(h, 1, 0)
        with pytest.raises(DomainError):
            transport(ref, ref)

    def test_negative_count(self):
        h = real_heisenberg(1)
        with pytest.raises(DomainError):
            sample_grassmannian(h, reference_subalgebra(h, 1, 0), -1, seed=0)


class TestSpherePushforward:
    def test_orbit_stays_on_the_spheres(self):
        h = quaternion_heisenberg(1)
        x, t = np.array([1.0, 2.0, 0.0, 0.0]), np.array([0.0, 0.0, 3.0])
        orbit = sphere_pushforward(h, x, t, 50, seed=0)
        assert np.allclose(np.linalg.norm(orbit.horizontal, axis=1), np.linalg.norm(x))
        assert np.allclose(np.linalg.norm(orbit.vertical, axis=1), 3.0)
        assert not orbit.degenerate

    def test_zero_horizontal_part(self):
        h = real_heisenberg(1)
        orbit = sphere_pushforward(h, [0.0, 0.0], [1.0], 3, seed=0)
        assert orbit.degenerate
