"""Tests for radial integrands, Monte Carlo Crofton estimates and the Hölder bound."""

import numpy as np
import pytest

from carnotmod.algebra import complex_heisenberg, euclidean, quaternion_heisenberg, real_heisenberg
from carnotmod.crofton import (
    Integrand,
    RadialProfile,
    constants_agree,
    corollary_experiment,
    euclidean_crofton,
    holder_bound,
    htype_crofton_horizontal,
    htype_crofton_vertical,
    sphere_area,
)
from carnotmod.errors import DomainError


@pytest.fixture
def annulus():
    return Integrand.single(RadialProfile.annulus(1.0, 2.0))


@pytest.fixture
def gauss():
    return Integrand.single(RadialProfile.gauss(1.0))


class TestRadialProfile:
    def test_sphere_areas(self):
        assert sphere_area(1) == pytest.approx(2.0)
        assert sphere_area(2) == pytest.approx(2 * np.pi)
        assert sphere_area(3) == pytest.approx(4 * np.pi)

    def test_gaussian_is_truncated(self):
        g = RadialProfile.gauss(2.0)
        assert g.support == pytest.approx(17.0)
        assert g.radial(np.array([17.5]))[0] == 0.0

    def test_bump_vanishes_at_the_radius(self):
        bump = RadialProfile.bump(1.0)
        assert bump.radial(np.array([0.0, 1.0]))[0] == pytest.approx(1.0)
        assert bump.radial(np.array([0.0, 1.0]))[1] == 0.0

    def test_table_from_file(self, tmp_path):
        path = tmp_path / "profile.txt"
        path.write_text("0 1\n1 0.5\n2 0\n")
        profile = RadialProfile.from_file(path)
        assert profile.radial(np.array([0.5, 3.0])) == pytest.approx([0.75, 0.0])
        assert profile.support == 2.0

    def test_invalid_profiles(self):
        with pytest.raises(DomainError):
            RadialProfile.gauss(0.0)
        with pytest.raises(DomainError):
            RadialProfile.annulus(2.0, 1.0)
        with pytest.raises(DomainError):
            RadialProfile.const(1.0)
        with pytest.raises(DomainError):
            RadialProfile.from_table([0.0, 1.0], [1.0, -1.0])

    def test_dilation(self):
        g = RadialProfile.gauss(1.0, centre=[2.0, 0.0]).dilate(2.0)
        assert g.scale == 0.5
        assert g.centre == (1.0, 0.0)

    def test_dict_round_trip(self):
        for profile in (RadialProfile.gauss(1.5), RadialProfile.annulus(1.0, 2.0), RadialProfile.bump(0.5)):
            assert RadialProfile.from_dict(profile.to_dict()) == profile

    def test_subspace_integral(self):
        # ∫_R 1{1 <= |y| <= 2} dy
        assert RadialProfile.annulus(1.0, 2.0).subspace_integral(1) == pytest.approx(2.0)
        assert RadialProfile.gauss(1.0).subspace_integral(2) == pytest.approx(2 * np.pi)

    def test_radial_moment_quadratures_agree(self):
        g = RadialProfile.gauss(1.0, centre=[0.5, 0.5, 0.0])
        adaptive = g.radial_moment(2, 3)
        fixed = g.radial_moment(2, 3, nodes=400)
        assert fixed == pytest.approx(adaptive, rel=1e-8)

    def test_centred_gaussian_moment(self):
        # ∫_{R³} |x|^{-1} e^{-|x|²/2} dx = 4π
        assert RadialProfile.gauss(1.0).radial_moment(2, 3) == pytest.approx(4 * np.pi)


class TestIntegrand:
    def test_evaluate(self, annulus):
        values = annulus.evaluate(np.array([[0.5, 0.0], [1.5, 0.0]]))
        assert values.tolist() == [0.0, 1.0]

    def test_vertical_factor_needs_t(self):
        f = Integrand.single(RadialProfile.gauss(1.0), RadialProfile.gauss(1.0))
        with pytest.raises(DomainError, match="pass t"):
            f.evaluate(np.zeros((1, 2)))

    def test_scaling_must_stay_nonnegative(self, gauss):
        with pytest.raises(DomainError):
            gauss.scaled(-1.0)

    def test_dict_round_trip(self, gauss, annulus):
        f = gauss + annulus.scaled(2.0)
        restored = Integrand.from_dict(f.describe())
        assert restored.terms == f.terms


class TestEuclideanCrofton:
    def test_lines_in_the_plane(self, annulus):
        report = euclidean_crofton(2, 1, annulus, samples=20_000, seed=1)
        assert report.rhs == pytest.approx(2 * np.pi)
        assert report.analytic_constant == pytest.approx(1 / np.pi)
        assert report.within(1 / np.pi)

    def test_planes_in_space(self, gauss):
        report = euclidean_crofton(3, 2, gauss, samples=4000, seed=2)
        assert report.analytic_constant == pytest.approx(0.5, rel=1e-8)
        assert report.within(sphere_area(2) / sphere_area(3))

    def test_off_centre_integrand(self):
        f = Integrand.single(RadialProfile.gauss(0.5, centre=[1.0, 0.5]))
        report = euclidean_crofton(2, 1, f, samples=20_000, seed=3)
        assert report.analytic_lhs is None
        assert report.within(1 / np.pi)

    def test_scaling_is_exact_with_a_fixed_seed(self, annulus):
        base = euclidean_crofton(2, 1, annulus, samples=2000, seed=4)
        tripled = euclidean_crofton(2, 1, annulus.scaled(3.0), samples=2000, seed=4)
        assert tripled.lhs == pytest.approx(3 * base.lhs, rel=1e-12)
        assert tripled.constant == pytest.approx(base.constant, rel=1e-12)

    def test_sum_of_integrands(self, annulus, gauss):
        a = euclidean_crofton(2, 1, annulus, samples=4000, seed=5)
        b = euclidean_crofton(2, 1, gauss, samples=4000, seed=5)
        both = euclidean_crofton(2, 1, annulus + gauss, samples=4000, seed=5)
        combined = np.hypot(np.hypot(a.lhs_se, b.lhs_se), both.lhs_se)
        assert abs(both.lhs - (a.lhs + b.lhs)) <= 5 * combined
        assert both.rhs == pytest.approx(a.rhs + b.rhs)

    def test_zero_integrand(self):
        report = euclidean_crofton(2, 1, Integrand.zero(), samples=100, seed=0)
        assert not report.constant_defined
        assert not report.within(1 / np.pi)

    def test_threads_do_not_change_the_estimate(self, gauss):
        serial = euclidean_crofton(3, 1, gauss, samples=1000, seed=6, threads=1)
        threaded = euclidean_crofton(3, 1, gauss, samples=1000, seed=6, threads=4)
        assert serial.lhs == threaded.lhs
        assert serial.batch_means == threaded.batch_means

    def test_invalid_dimensions(self, gauss):
        with pytest.raises(DomainError):
            euclidean_crofton(2, 2, gauss, samples=100, seed=0)
        with pytest.raises(DomainError):
            euclidean_crofton(2, 1, gauss, samples=10, batches=20, seed=0)


class TestHTypeCrofton:
    def test_real_heisenberg_horizontal(self, gauss):
        report = htype_crofton_horizontal(real_heisenberg(2), 2, gauss, samples=4000, seed=7)
        assert report.within(report.analytic_constant)
        assert report.to_dict()["shape"] == [2, 0]

    def test_quaternionic_horizontal(self, gauss):
        report = htype_crofton_horizontal(quaternion_heisenberg(1), 1, gauss, samples=4000, seed=8)
        assert report.within(report.analytic_constant)

    def test_reflections_do_not_change_the_constant(self):
        h = complex_heisenberg(1)
        f = Integrand.single(RadialProfile.gauss(1.0, centre=[1.0, 0.0, 0.0, 0.0]))
        plain = htype_crofton_horizontal(h, 2, f, samples=8000, seed=9)
        reflected = htype_crofton_horizontal(h, 2, f, samples=8000, seed=9, with_reflections=True)
        assert constants_agree(plain, reflected, ses=4.0)

    def test_vertical(self):
        f = Integrand.single(RadialProfile.gauss(1.0), RadialProfile.gauss(1.0))
        report = htype_crofton_vertical(real_heisenberg(1), 1, 1, f, samples=4000, seed=10)
        assert report.shape == (1, 1)
        assert report.within(report.analytic_constant)

    def test_constant_does_not_depend_on_the_integrand_vertical(self):
        h = complex_heisenberg(1)
        centred = Integrand.single(RadialProfile.gauss(1.0), RadialProfile.gauss(1.0))
        shifted = Integrand.single(
            RadialProfile.gauss(1.0, centre=[0.5, 0.0, 0.0, 0.0]), RadialProfile.gauss(1.0)
        )
        a = htype_crofton_vertical(h, 2, 1, centred, samples=20_000, seed=11)
        b = htype_crofton_vertical(h, 2, 1, shifted, samples=20_000, seed=12)
        assert a.analytic_lhs is not None and b.analytic_lhs is None
        assert constants_agree(a, b, ses=4.0)

    def test_constant_does_not_depend_on_the_integrand_horizontal(self, gauss):
        h = real_heisenberg(2)
        shifted = Integrand.single(RadialProfile.gauss(1.0, centre=[1.0, 0.0, 0.0, 0.0]))
        a = htype_crofton_horizontal(h, 2, gauss, samples=20_000, seed=13)
        b = htype_crofton_horizontal(h, 2, shifted, samples=20_000, seed=14)
        assert constants_agree(a, b, ses=4.0)
        assert a.constant == pytest.approx(b.constant, rel=1e-2)

    def test_vertical_needs_a_vertical_factor(self, gauss):
        with pytest.raises(DomainError, match="vertical factor"):
            htype_crofton_vertical(real_heisenberg(1), 1, 1, gauss, samples=100, seed=0)

    def test_inadmissible_shape(self, gauss):
        with pytest.raises(DomainError):
            htype_crofton_horizontal(real_heisenberg(1), 2, gauss, samples=100, seed=0)


class TestHolderBound:
    def test_finite_above_the_critical_exponent(self):
        bound = holder_bound(3.0, (2, 0), 4, 1)
        assert bound.exponents == (1.0,)
        assert bound.finite
        assert bound.value == pytest.approx(1.0)

    def test_infinite_below(self):
        bound = holder_bound(1.5, (2, 0), 4, 1)
        assert bound.exponents == (-2.0,)
        assert not bound.finite
        assert bound.value == np.inf

    def test_vertical_part_filling_the_centre(self):
        assert len(holder_bound(3.0, (3, 1), 4, 1).exponents) == 1
        assert len(holder_bound(3.0, (2, 1), 4, 2).exponents) == 2

    def test_needs_p_above_one(self):
        with pytest.raises(DomainError):
            holder_bound(1.0, (1, 0), 2)


class TestCorollaryExperiment:
    def test_euclidean_lines_are_consistent(self):
        bounded = corollary_experiment(euclidean(2), (1, 0), 3.0, planes=16, seed=1)
        exceptional = corollary_experiment(euclidean(2), (1, 0), 2.0, planes=16, seed=1)
        assert bounded.bound.finite and bounded.study.verdict == "bounded"
        assert not exceptional.bound.finite and exceptional.study.verdict == "exceptional"
        assert bounded.consistent and exceptional.consistent

    def test_heisenberg_planes_below_the_critical_exponent(self):
        # every refinement cuts the modulus by at least 30%
        report = corollary_experiment(real_heisenberg(2), (2, 0), 1.5, seed=1)
        assert not report.bound.finite
        assert report.study.verdict == "exceptional"
        assert all(r <= np.log(0.7) for r in report.study.log_ratios)
        assert report.passed is True

    def test_heisenberg_planes_above_the_critical_exponent(self):
        report = corollary_experiment(real_heisenberg(2), (2, 0), 3.0, seed=1)
        assert report.bound.finite
        assert report.study.verdict == "bounded"
        assert report.study.variation < 0.2
        assert report.passed is True

    def test_reported_regime_has_no_outcome(self):
        # d_t = 2 < d_m = 3 and p d_m = 9 > Q = 4
        report = corollary_experiment(real_heisenberg(1), (1, 1), 3.0, resolutions=1, planes=4, seed=3)
        assert not report.settled
        assert report.passed is None
        assert report.to_dict()["settled"] is False

    def test_inconsistent_trend_fails(self):
        # a floor this low never lets the trend read as exceptional
        report = corollary_experiment(euclidean(2), (1, 0), 2.0, resolutions=2, planes=8, seed=1, floor=1e-9)
        assert not report.bound.finite
        assert report.study.verdict == "bounded"
        assert report.passed is False

    def test_report_layout(self):
        report = corollary_experiment(real_heisenberg(2), (2, 0), 3.0, resolutions=1, planes=4, seed=2)
        data = report.to_dict()
        assert data["shape"] == [2, 0]
        assert data["bound"]["finite"] is True
        assert len(report.rows()) == 2

    def test_needs_p_above_one(self):
        with pytest.raises(DomainError):
            corollary_experiment(euclidean(2), (1, 0), 1.0)
