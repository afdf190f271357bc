"""Tests for modulus problems, the solver, discretized families and refinement studies."""

import numpy as np
import pytest
from scipy import sparse

from carnotmod.algebra import euclidean, real_heisenberg
from carnotmod.errors import DomainError, SolverError, UnsupportedError, UnsupportedExponentError
from carnotmod.modulus import (
    LogPolarCells,
    ModulusProblem,
    annulus_extremal_density,
    annulus_family,
    annulus_modulus,
    check_admissible,
    fuglede_refinement_study,
    solve_modulus,
    study_verdict,
    subspace_family,
    subspace_family_builder,
    with_empty_measure,
)
from carnotmod.modulus.families import ball_volume

ANNULUS_P2 = 2 * np.pi / np.log(2)


@pytest.fixture
def two_cells():
    """Two unit cells, one measure charging both."""
    return ModulusProblem.from_arrays(cells=[[0.0], [1.0]], masses=[1.0, 1.0], measures=[[1, 1]], p=2)


@pytest.fixture
def random_problem():
    rng = np.random.default_rng(7)
    measures = rng.random((30, 50)) * (rng.random((30, 50)) < 0.3)
    measures[:, 0] += 0.1
    return ModulusProblem.from_arrays(rng.random((50, 2)), rng.random(50) + 0.5, measures, p=3)


class TestModulusProblem:
    def test_shape(self, two_cells):
        assert two_cells.shape == (1, 2)
        assert len(two_cells.empty_rows) == 0

    def test_masses_must_be_positive(self):
        with pytest.raises(DomainError, match="masses"):
            ModulusProblem.from_arrays([[0.0]], [0.0], [[1.0]], p=2)

    def test_measure_weights_must_be_nonnegative(self):
        with pytest.raises(DomainError):
            ModulusProblem.from_arrays([[0.0]], [1.0], [[-1.0]], p=2)

    def test_columns_must_match_cells(self):
        with pytest.raises(DomainError, match="columns"):
            ModulusProblem.from_arrays([[0.0]], [1.0], [[1.0, 1.0]], p=2)

    def test_exponent_must_be_positive(self):
        with pytest.raises(DomainError):
            ModulusProblem.from_arrays([[0.0]], [1.0], [[1.0]], p=0)

    def test_save_and_load(self, two_cells, tmp_path):
        path = two_cells.save(tmp_path / "nested" / "problem.json")
        loaded = ModulusProblem.load(path)
        assert loaded.p == 2.0
        assert np.array_equal(loaded.masses, two_cells.masses)
        assert np.array_equal(loaded.constraints.toarray(), two_cells.constraints.toarray())

    def test_cells_layout(self):
        with pytest.raises(DomainError, match="cells"):
            ModulusProblem.from_dict({"cells": [1.0, 2.0], "measures": [[1.0]], "p": 2})


class TestSolver:
    def test_docstring_example(self):
        problem = ModulusProblem.from_arrays([[0.0], [1.0]], [1.0, 1.0], [[1, 0], [0, 1]], p=2)
        assert solve_modulus(problem).value == pytest.approx(2.0)

    def test_shared_measure(self, two_cells):
        solution = solve_modulus(two_cells)
        assert solution.status == "optimal"
        assert solution.value == pytest.approx(0.5)
        assert np.allclose(solution.density, [0.5, 0.5])

    def test_linear_program_for_p_one(self, two_cells):
        solution = solve_modulus(two_cells.with_p(1))
        assert solution.method == "highs"
        assert solution.value == pytest.approx(1.0)

    def test_scaling_measures(self, two_cells):
        # M_p(cE) = c^{-p} M_p(E)
        assert solve_modulus(two_cells.scaled(2.0)).value == pytest.approx(0.5 / 4)

    def test_subfamily_is_smaller(self, random_problem):
        full = solve_modulus(random_problem).value
        part = solve_modulus(random_problem.subfamily(range(10))).value
        assert part <= full * (1 + 1e-8)

    def test_kkt_and_duality(self, random_problem):
        solution = solve_modulus(random_problem, tolerance=1e-8)
        assert solution.converged
        assert solution.kkt_residual <= 1e-8
        assert solution.dual_value == pytest.approx(solution.value, rel=1e-6)
        assert check_admissible(random_problem, solution.density)

    def test_empty_measure_gives_infinity(self, two_cells):
        solution = solve_modulus(with_empty_measure(two_cells))
        assert solution.infinite
        assert solution.converged
        assert solution.value == np.inf
        assert solution.info["empty_rows"] == [1]

    def test_empty_family(self):
        problem = ModulusProblem([[0.0]], [1.0], sparse.csr_matrix((0, 1)), 2.0)
        assert solve_modulus(problem).value == 0.0

    def test_exponent_below_one(self, two_cells):
        with pytest.raises(UnsupportedExponentError, match="nonconvex"):
            solve_modulus(two_cells.with_p(0.5))

    def test_iteration_cap(self, random_problem):
        with pytest.raises(SolverError) as exc_info:
            solve_modulus(random_problem, tolerance=1e-15, max_iter=1)
        assert exc_info.value.info["status"] == "not_converged"

    def test_unconverged_solution_is_returned_on_request(self, random_problem):
        solution = solve_modulus(random_problem, tolerance=1e-15, max_iter=1, require_convergence=False)
        assert solution.status == "not_converged"
        # value always belongs to a feasible density
        assert check_admissible(random_problem, solution.density, slack=1e-9)

    def test_summary_has_no_arrays(self, two_cells):
        summary = solve_modulus(two_cells).summary()
        assert "density" not in summary
        assert summary["status"] == "optimal"


class TestAdmissibility:
    def test_zero_density(self, two_cells):
        report = check_admissible(two_cells, [0.0, 0.0])
        assert not report
        assert report.margin == pytest.approx(-1.0)
        assert report.worst_measure == 0

    def test_negative_density(self, two_cells):
        assert not check_admissible(two_cells, [2.0, -0.5])

    def test_wrong_length(self, two_cells):
        with pytest.raises(DomainError):
            check_admissible(two_cells, [1.0])


class TestAnnulus:
    def test_analytic_value(self):
        assert annulus_modulus(1.0, 2.0, 2.0) == pytest.approx(ANNULUS_P2)
        # ∫_1^2 r^{-1/2} dr = 2(√2 - 1)
        assert annulus_modulus(1.0, 2.0, 3.0) == pytest.approx(2 * np.pi / (2 * (np.sqrt(2) - 1)) ** 2)

    def test_discrete_value(self):
        problem = annulus_family(1.0, 2.0, radial=200, angular=200, p=2)
        assert problem.shape == (200, 40_000)
        assert solve_modulus(problem).value == pytest.approx(ANNULUS_P2, rel=2e-2)

    def test_extremal_density_is_admissible(self):
        problem = annulus_family(1.0, 2.0, radial=40, angular=16, p=3)
        density = annulus_extremal_density(problem)
        assert check_admissible(problem, density)
        value = float(np.sum(problem.masses * density**3))
        assert value == pytest.approx(annulus_modulus(1.0, 2.0, 3.0), rel=1e-2)

    def test_invalid_radii(self):
        with pytest.raises(DomainError):
            annulus_family(2.0, 1.0)
        with pytest.raises(DomainError):
            annulus_modulus(1.0, 2.0, 1.0)

    def test_extremal_density_needs_annulus(self, two_cells):
        with pytest.raises(DomainError):
            annulus_extremal_density(two_cells)


class TestLogPolarCells:
    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_masses_fill_the_unit_ball(self, dim):
        cells = LogPolarCells.schedule(dim, 0, 4, 2, 2, 16)
        assert len(cells.masses()) == cells.size
        assert cells.masses().sum() == pytest.approx(ball_volume(dim))

    def test_subspace_row_carries_the_subspace_volume(self):
        cells = LogPolarCells.schedule(3, 1, 4, 2, 3, 16)
        basis = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 2)))[0]
        assert cells.subspace_row(basis, 720).sum() == pytest.approx(ball_volume(2))

    def test_refinement_shrinks_the_core(self):
        coarse = LogPolarCells.schedule(2, 0, 4, 2, 2, 16)
        fine = LogPolarCells.schedule(2, 1, 4, 2, 2, 16)
        assert fine.r_min == pytest.approx(coarse.r_min**2)

    def test_dimension_limit(self):
        with pytest.raises(UnsupportedError):
            LogPolarCells.schedule(5, 0, 4, 2, 2, 16)


class TestSubspaceFamily:
    def test_shape_and_meta(self):
        problem = subspace_family(euclidean(2), 1, planes=8, seed=1)
        assert problem.shape[0] == 8
        assert problem.meta["family"] == "subspace"
        assert problem.meta["shape"] == [1, 0]
        # every segment has length 2
        assert np.allclose(problem.row_masses, 2.0)

    def test_seeded_builds_are_identical(self):
        a = subspace_family(real_heisenberg(2), 2, planes=4, seed=3)
        b = subspace_family(real_heisenberg(2), 2, planes=4, seed=3)
        assert np.array_equal(a.constraints.toarray(), b.constraints.toarray())

    def test_vertical_shape(self):
        problem = subspace_family(real_heisenberg(1), 1, 1, planes=4, seed=0)
        assert problem.meta["shape"] == [1, 1]
        # segment times segment: |B^1| |B^1| = 4
        assert np.allclose(problem.row_masses, 4.0)

    def test_ball_radius_scales_measures(self):
        unit = subspace_family(euclidean(2), 1, planes=4, seed=2)
        big = subspace_family(euclidean(2), 1, planes=4, seed=2, radius=2.0)
        assert np.allclose(big.row_masses, 2.0 * unit.row_masses)
        assert big.masses.sum() == pytest.approx(4.0 * unit.masses.sum())

    def test_inadmissible_shape(self):
        with pytest.raises(DomainError):
            subspace_family(euclidean(2), 2, planes=4, seed=0)


class TestStudyVerdict:
    def test_decreasing_below_floor(self):
        verdict, ratios = study_verdict([1.0, 0.5, 0.2, 0.1], 0.25, 0.1)
        assert verdict == "exceptional"
        assert len(ratios) == 3

    def test_flat_sequence(self):
        assert study_verdict([1.0, 0.99, 1.01], 0.25, 0.1)[0] == "bounded"

    def test_reaching_zero_is_a_decrease(self):
        verdict, ratios = study_verdict([1.0, 0.0, 0.0], 0.25, 0.1)
        assert verdict == "exceptional"
        assert ratios == (-np.inf, -np.inf)

    def test_growth_out_of_zero(self):
        verdict, ratios = study_verdict([0.0, 1.0], 0.25, 0.1)
        assert verdict == "bounded"
        assert np.isnan(ratios[0])

    def test_all_infinite(self):
        assert study_verdict([np.inf, np.inf], 0.25, 0.1)[0] == "inadmissible"


class TestRefinementStudy:
    def test_lines_in_the_plane_are_two_exceptional(self):
        builder = subspace_family_builder(euclidean(2), 1, planes=16, seed=1)
        study = fuglede_refinement_study(builder, p=2, refinements=3)
        assert study.verdict == "exceptional"
        assert study.values[-1] < study.values[0]

    def test_lines_in_the_plane_are_bounded_for_p_three(self):
        builder = subspace_family_builder(euclidean(2), 1, planes=16, seed=1)
        study = fuglede_refinement_study(builder, p=3, refinements=3)
        assert study.verdict == "bounded"

    def test_exceptional_trend_drops_by_thirty_percent(self):
        builder = subspace_family_builder(euclidean(2), 1, planes=16, seed=1)
        study = fuglede_refinement_study(builder, p=2, refinements=3)
        assert all(np.exp(r) <= 0.7 for r in study.log_ratios)

    def test_bounded_trend_varies_by_less_than_a_fifth(self):
        builder = subspace_family_builder(euclidean(2), 1, seed=1)
        study = fuglede_refinement_study(builder, p=3, refinements=3)
        assert study.verdict == "bounded"
        assert study.variation < 0.2

    def test_rows_and_dict(self):
        builder = subspace_family_builder(euclidean(2), 1, planes=4, seed=1)
        study = fuglede_refinement_study(builder, p=3, refinements=1)
        rows = study.rows()
        assert [row["level"] for row in rows] == [0, 1]
        data = study.to_dict()
        assert data["levels"] == [0, 1]
        assert len(data["solver"]) == 2

    def test_needs_a_refinement(self):
        builder = subspace_family_builder(euclidean(2), 1, planes=4, seed=1)
        with pytest.raises(DomainError):
            fuglede_refinement_study(builder, p=2, refinements=0)
