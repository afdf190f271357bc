"""Tests for discrete measures, greedy covers and the measure estimators."""

import numpy as np
import pytest

from carnotmod.algebra import euclidean, quaternion_heisenberg, real_heisenberg
from carnotmod.errors import DomainError
from carnotmod.group import GroupPoint, default_norm, distance_coords, multiply_coords
from carnotmod.measures import (
    CoveringEstimate,
    DiscreteMeasure,
    box_dimension,
    coset_fubini,
    density,
    greedy_cover,
    haar_scaling_check,
    spherical_estimate,
    write_estimates_csv,
)
from carnotmod.splits import coordinate_split


@pytest.fixture
def h1():
    return real_heisenberg(1)


def x_axis(algebra, lo, hi, count):
    points = np.zeros((count, algebra.N))
    points[:, 0] = np.linspace(lo, hi, count)
    return points


def t_axis(algebra, lo, hi, count):
    points = np.zeros((count, algebra.N))
    points[:, algebra.m1] = np.linspace(lo, hi, count)
    return points


def bump(points):
    """Product of (1 - c²)² on [-1, 1]^N, zero outside."""
    return np.prod(np.clip(1.0 - points**2, 0.0, None) ** 2, axis=-1)


class TestDiscreteMeasure:
    def test_weights_must_match_atoms(self, h1):
        with pytest.raises(DomainError):
            DiscreteMeasure(h1, np.zeros((3, 3)), np.ones(2))

    def test_negative_weight(self, h1):
        with pytest.raises(DomainError):
            DiscreteMeasure(h1, np.zeros((1, 3)), np.array([-1.0]))

    def test_ball_mass_is_translation_invariant(self, h1):
        rng = np.random.default_rng(0)
        mu = DiscreteMeasure(h1, rng.standard_normal((200, 3)), rng.random(200))
        q = GroupPoint.from_coords(h1, [0.3, -0.2, 1.0])
        center = GroupPoint.from_coords(h1, [0.1, 0.1, 0.1])
        before = mu.ball_mass(center, 1.0, default_norm())
        after = mu.translate(q).ball_mass(q * center, 1.0, default_norm())
        assert after == pytest.approx(before)

    def test_dilation_scales_balls(self, h1):
        rng = np.random.default_rng(1)
        mu = DiscreteMeasure(h1, rng.standard_normal((200, 3)), np.ones(200))
        e = GroupPoint.identity(h1)
        assert mu.dilate(2.0).ball_mass(e, 2.0, default_norm()) == mu.ball_mass(e, 1.0, default_norm())

    def test_records_round_trip(self, h1, tmp_path):
        mu = DiscreteMeasure(h1, np.arange(6.0).reshape(2, 3), np.array([0.5, 0.25]))
        path = tmp_path / "atoms.txt"
        mu.save_records(path)
        loaded = DiscreteMeasure.load_records(path, h1)
        assert np.array_equal(loaded.points, mu.points)
        assert np.array_equal(loaded.weights, mu.weights)
        assert loaded.label == "atoms"

    def test_records_column_mismatch(self, h1, tmp_path):
        path = tmp_path / "atoms.txt"
        path.write_text("1 2 3\n")
        with pytest.raises(DomainError):
            DiscreteMeasure.load_records(path, h1)


class TestGreedyCover:
    def test_every_point_is_covered(self, h1):
        points = np.random.default_rng(2).standard_normal((300, 3))
        cover = greedy_cover(points, 0.5, h1, default_norm())
        assert np.all(cover.assignment >= 0)
        centres = points[cover.centers[cover.assignment]]
        distances = distance_coords(h1, default_norm(), points, centres)
        assert np.all(distances <= 0.5 + 1e-12)

    def test_centres_are_separated(self, h1):
        points = np.random.default_rng(3).standard_normal((300, 3))
        cover = greedy_cover(points, 0.5, h1, default_norm())
        centres = points[cover.centers]
        for i, c in enumerate(centres):
            d = distance_coords(h1, default_norm(), centres, c)
            d[i] = np.inf
            assert d.min() > 0.5

    def test_radius_must_be_positive(self, h1):
        with pytest.raises(DomainError):
            greedy_cover(np.zeros((1, 3)), 0.0, h1, default_norm())

    def test_spherical_weights_sum_per_ball(self, h1):
        points = x_axis(h1, 0.0, 1.0, 101)
        weights = spherical_estimate(points, h1, default_norm(), 0.1, 1.0)
        cover = greedy_cover(points, 0.1, h1, default_norm())
        assert weights.sum() == pytest.approx(cover.count * 0.2)


class TestBoxDimension:
    def test_horizontal_segment(self, h1):
        estimate = box_dimension(x_axis(h1, 0.0, 1.0, 2000), h1, default_norm(), [0.1, 0.05, 0.02])
        assert estimate.slope == pytest.approx(1.0, abs=0.1)

    def test_vertical_segment_has_dimension_two(self, h1):
        estimate = box_dimension(t_axis(h1, 0.0, 1.0, 4000), h1, default_norm(), [0.1, 0.05, 0.025])
        assert estimate.slope == pytest.approx(2.0, abs=0.15)

    def test_left_translation_keeps_the_counts(self, h1):
        points = np.random.default_rng(3).uniform(0.0, 1.0, (2000, 3))
        g = np.array([0.7, -0.3, 2.0])
        moved = multiply_coords(h1, g, points)
        scales = [0.4, 0.2, 0.1]
        base = box_dimension(points, h1, default_norm(), scales)
        translated = box_dimension(moved, h1, default_norm(), scales)
        assert translated.counts == base.counts
        assert translated.slope == pytest.approx(base.slope, abs=0.05)

    def test_counts_grow_as_the_scale_halves(self, h1):
        points = np.random.default_rng(4).uniform(-1.0, 1.0, (3000, 3))
        counts = box_dimension(points, h1, default_norm(), [0.8, 0.4, 0.2, 0.1]).counts
        assert all(a <= b for a, b in zip(counts, counts[1:]))
        assert counts[-1] > counts[0]

    def test_full_square_has_the_homogeneous_dimension(self):
        # scales well below the side keep the boundary balls a small share
        plane = euclidean(2)
        axis = np.linspace(0.0, 1.0, 300)
        points = np.stack([g.reshape(-1) for g in np.meshgrid(axis, axis, indexing="ij")], axis=-1)
        estimate = box_dimension(points, plane, default_norm(), [0.04, 0.03, 0.02])
        assert estimate.slope == pytest.approx(plane.Q, abs=0.3)

    def test_single_point(self, h1):
        estimate = box_dimension(np.zeros((5, 3)), h1, default_norm(), [0.1, 0.01])
        assert estimate.slope == 0.0
        assert estimate.counts == (1, 1)

    def test_needs_two_scales(self, h1):
        with pytest.raises(DomainError):
            box_dimension(np.zeros((1, 3)), h1, default_norm(), [0.1])

    def test_estimates_csv(self, h1, tmp_path):
        estimate = box_dimension(x_axis(h1, 0.0, 1.0, 200), h1, default_norm(), [0.1, 0.05])
        path = tmp_path / "estimates.csv"
        write_estimates_csv(estimate.estimates(1.0), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "scale,count,value"
        assert len(lines) == 3
        assert all(isinstance(e, CoveringEstimate) for e in estimate.estimates())


class TestDensity:
    def test_segment_density(self, h1):
        points = x_axis(h1, -1.0, 1.0, 2001)
        mu = DiscreteMeasure(h1, points, np.full(2001, 1e-3))
        result = density(mu, GroupPoint.identity(h1), 1.0, [0.5, 0.25, 0.125], default_norm())
        assert result.lower == pytest.approx(2.0, rel=1e-2)
        assert result.upper == pytest.approx(2.0, rel=1e-2)

    def test_vertical_segment_density_trend(self, h1):
        # B(e, r) meets the t axis in |t| <= r²
        points = t_axis(h1, -1.0, 1.0, 20001)
        mu = DiscreteMeasure(h1, points, np.full(20001, 1e-4))
        radii = [0.5, 0.25, 0.125]
        square = density(mu, GroupPoint.identity(h1), 2.0, radii, default_norm())
        assert square.lower == pytest.approx(2.0, rel=1e-2)
        assert square.upper == pytest.approx(2.0, rel=1e-2)
        linear = density(mu, GroupPoint.identity(h1), 1.0, radii, default_norm())
        assert linear.ratios[0] > linear.ratios[1] > linear.ratios[2]
        assert linear.ratios[-1] == pytest.approx(0.25, rel=2e-2)

    def test_radii_must_decrease(self, h1):
        mu = DiscreteMeasure(h1, np.zeros((1, 3)), np.ones(1))
        with pytest.raises(DomainError, match="decreasing"):
            density(mu, GroupPoint.identity(h1), 1.0, [0.1, 0.5], default_norm())

    def test_empty_measure(self, h1):
        mu = DiscreteMeasure(h1, np.zeros((0, 3)), np.zeros(0))
        result = density(mu, GroupPoint.identity(h1), 1.0, [0.5], default_norm())
        assert result.upper == 0.0


class TestHaarScaling:
    def test_homogeneous_dimension(self, h1):
        assert haar_scaling_check(h1, 2.0, [0, 0, 0], [1, 1, 1]) == pytest.approx(16.0)

    def test_quaternionic(self):
        h = quaternion_heisenberg(1)
        assert haar_scaling_check(h, 2.0, np.zeros(7), np.ones(7)) == pytest.approx(2.0**10)

    def test_degenerate_box(self, h1):
        with pytest.raises(DomainError):
            haar_scaling_check(h1, 2.0, [0, 0, 0], [1, 0, 1])


class TestCosetFubini:
    def test_vertical_split(self, h1):
        split = coordinate_split(h1, [0], [0])
        report = coset_fubini(split, bump, [-1, -1, -1], [1, 1, 1], 0.05)
        assert report.lhs > 0.0
        assert report.relative_error < 2e-2

    def test_horizontal_split(self, h1):
        split = coordinate_split(h1, [0], [])
        report = coset_fubini(split, bump, [-1, -1, -1], [1, 1, 1], 0.05)
        assert report.relative_error < 2e-2

    def test_unit_box_indicator(self, h1):
        split = coordinate_split(h1, [0], [0])

        def unit_box(points):
            return np.all((points >= 0.0) & (points <= 1.0), axis=-1).astype(float)

        report = coset_fubini(split, unit_box, [-0.5] * 3, [1.5] * 3, 0.02)
        assert report.lhs == pytest.approx(1.0, rel=2e-2)
        assert report.rhs == pytest.approx(1.0, rel=2e-2)

    def test_zero_integrand(self, h1):
        split = coordinate_split(h1, [0], [0])
        report = coset_fubini(split, lambda p: np.zeros(len(p)), [-1, -1, -1], [1, 1, 1], 0.1)
        assert (report.lhs, report.rhs) == (0.0, 0.0)
        assert report.relative_error == 0.0

    def test_horizontal_split_gaussian(self, h1):
        split = coordinate_split(h1, [0], [])

        def gaussian(points):
            return np.exp(-np.sum(points**2, axis=-1) / (2 * 0.2**2))

        report = coset_fubini(split, gaussian, [-1.5] * 3, [1.5] * 3, 0.02)
        assert report.lhs == pytest.approx((2 * np.pi * 0.04) ** 1.5, rel=5e-3)
        assert report.relative_error < 5e-3

    def test_threads_do_not_change_the_sums(self, h1):
        split = coordinate_split(h1, [0], [0])
        serial = coset_fubini(split, bump, [-1, -1, -1], [1, 1, 1], 0.1, threads=1)
        threaded = coset_fubini(split, bump, [-1, -1, -1], [1, 1, 1], 0.1, threads=3)
        assert serial == threaded

    def test_integrand_must_vanish_on_the_boundary(self, h1):
        split = coordinate_split(h1, [0], [0])
        with pytest.raises(DomainError, match="boundary"):
            coset_fubini(split, lambda p: np.ones(len(p)), [-1, -1, -1], [1, 1, 1], 0.1)
