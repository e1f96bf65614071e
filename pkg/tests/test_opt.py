"""Coupling-strength sweeps and the fixed-marginal threshold search."""

import numpy as np
import pytest

from corr_ldpc.de import threshold
from corr_ldpc.dist import joint_independent, edge_from_node
from corr_ldpc.opt import (
    InfeasibleCellError,
    MarginalConstraint,
    joint_from_free_cells,
    optimize_joint,
    sweep_q,
)


class TestSweep:
    def test_single_point_grid_matches_independent(self, td):
        independent = joint_independent(
            edge_from_node(td.p_x), edge_from_node(td.p_y)
        )
        expected = threshold(independent, precision=1e-4).delta_star
        for pi in ((2, 1), (1, 2)):
            import dataclasses

            template = dataclasses.replace(td.template, pi=pi)
            result = sweep_q(td.p_x, td.p_y, template, [0.0], precision=1e-4)
            (q, res), = result.points
            assert q == 0.0
            assert abs(res.delta_star - expected) <= 1e-4

    def test_anti_assortative_curve_is_unimodal(self, td):
        grid = [round(0.05 * k, 2) for k in range(21)]
        result = sweep_q(td.p_x, td.p_y, td.template, grid, precision=1e-5)
        values = [res.delta_star for _, res in result.points]
        diffs = [b - a for a, b in zip(values, values[1:])]
        tol = 2e-5
        signs = [0 if abs(d) <= tol else (1 if d > 0 else -1) for d in diffs]
        signs = [s for s in signs if s != 0]
        flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
        assert flips == 1

    def test_points_sorted_and_best_exposed(self, td):
        result = sweep_q(td.p_x, td.p_y, td.template, [0.4, 0.0, 0.2])
        assert [q for q, _ in result.points] == [0.0, 0.2, 0.4]
        best_q, best = result.best
        assert best.delta_star == max(r.delta_star for _, r in result.points)

    def test_csv_header(self, td):
        result = sweep_q(td.p_x, td.p_y, td.template, [0.0])
        assert result.csv().splitlines()[0] == "q,delta_star,lower_bound,upper_bound"


class TestFreeCells:
    def test_default_parameterization(self, ss_constraint, bazzi_constraint):
        assert ss_constraint.free_cells == ((2, 8), (3, 8), (7, 8))
        assert bazzi_constraint.free_cells == ((3, 7),)

    def test_product_point_recovers_product_joint(self, bazzi_constraint):
        joint = joint_from_free_cells(
            bazzi_constraint, bazzi_constraint.product_point()
        )
        product = joint_independent(
            bazzi_constraint.edge_x, bazzi_constraint.edge_y
        )
        assert joint.max_abs_diff(product) <= 1e-12

    def test_marginals_preserved_for_random_feasible_points(self, ss_constraint):
        rng = np.random.default_rng(8)
        box = ss_constraint.box()
        kept = 0
        while kept < 25:
            values = [float(rng.uniform(lo, hi)) for lo, hi in box]
            try:
                joint = joint_from_free_cells(ss_constraint, values)
            except InfeasibleCellError:
                continue
            kept += 1
            for x, p in ss_constraint.edge_x.entries.items():
                assert joint.edge_x.prob(x) == pytest.approx(p, abs=1e-12)
            for y, p in ss_constraint.edge_y.entries.items():
                assert joint.edge_y.prob(y) == pytest.approx(p, abs=1e-12)

    def test_reference_search_points(self, ss_constraint):
        improved = joint_from_free_cells(ss_constraint, [0.1534, 0.1789, 0.1035])
        assert threshold(improved, precision=1e-5).delta_star == pytest.approx(
            0.49568, abs=5e-4
        )
        equivalent = joint_from_free_cells(ss_constraint, [0.1669, 0.1143, 0.1712])
        assert threshold(equivalent, precision=1e-5).delta_star == pytest.approx(
            0.49553, abs=5e-4
        )

    def test_infeasible_point_rejected(self, ss_constraint):
        # pushing the whole first column onto small rows starves the last row
        values = [0.26, 0.18, 0.26]
        with pytest.raises(InfeasibleCellError):
            joint_from_free_cells(ss_constraint, values)

    def test_free_cell_cannot_sit_in_dependent_row(self, ss_constraint):
        with pytest.raises(ValueError, match="dependent"):
            MarginalConstraint(
                ss_constraint.edge_x,
                ss_constraint.edge_y,
                free_cells=((30, 8),),
            )


class TestOptimize:
    def test_small_budget_beats_baseline(self, bazzi_constraint):
        out = optimize_joint(bazzi_constraint, budget=150, seed=3)
        assert out.result.delta_star >= out.baseline.delta_star - 1e-5
        assert out.evaluations <= 150
        for x, p in bazzi_constraint.edge_x.entries.items():
            assert out.best_joint.edge_x.prob(x) == pytest.approx(p, abs=1e-12)

    def test_determinism(self, bazzi_constraint):
        a = optimize_joint(bazzi_constraint, budget=80, seed=4)
        b = optimize_joint(bazzi_constraint, budget=80, seed=4)
        assert a.best_values == b.best_values
        assert a.result.delta_star == b.result.delta_star

    def test_report_fields(self, bazzi_constraint):
        out = optimize_joint(bazzi_constraint, budget=60, seed=1)
        report = out.report()
        assert set(report) == {
            "best_joint",
            "delta_star",
            "evaluations",
            "baseline_independent",
        }
        assert all(isinstance(p, str) for _, _, p in report["best_joint"])
