"""Density-evolution recursion, thresholds, and analytic bounds."""

import numpy as np
import pytest

from corr_ldpc.de import (
    capacity_upper_bound,
    de_run,
    de_step,
    de_trajectory,
    stability_lower_bound,
    threshold,
)
from corr_ldpc.dist import (
    EdgeDegreeDistribution,
    JointEdgeDistribution,
    joint_independent,
)

from conftest import random_joint, random_product_joint, scalar_recursion_step


class TestDeStep:
    def test_zero_erasure_rate(self, td):
        joint = td.joint(q=0.4)
        alpha0 = {x: 0.7 for x in joint.variable_degrees}
        state = de_step(joint, 0.0, alpha0)
        assert all(a == 0.0 for a in state.alpha.values())
        assert state.gamma == 1.0

    def test_zero_alpha_is_fixed_point(self, td):
        joint = td.joint(q=0.4)
        state = de_step(joint, 0.6, {x: 0.0 for x in joint.variable_degrees})
        assert all(b == 0.0 for b in state.beta.values())
        assert all(a == 0.0 for a in state.alpha.values())
        assert state.gamma == 1.0

    def test_product_joint_single_step_matches_scalar(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            joint = random_product_joint(rng)
            delta = float(rng.uniform(0.05, 0.95))
            alpha0 = {x: delta for x in joint.variable_degrees}
            state = de_step(joint, delta, alpha0)
            a0 = sum(delta * p for p in joint.edge_x.entries.values())
            a1 = sum(
                state.alpha[x] * joint.edge_x.prob(x)
                for x in joint.variable_degrees
            )
            expected = scalar_recursion_step(joint.edge_x, joint.edge_y, delta, a0)
            assert a1 == pytest.approx(expected, abs=1e-12)

    def test_rejects_mismatched_support(self, td):
        joint = td.joint(q=0.1)
        with pytest.raises(ValueError, match="support"):
            de_step(joint, 0.3, {1: 0.1})


class TestDeRun:
    def test_two_degree_converges_below_threshold(self, td):
        state, converged = de_run(td.joint(q=0.0), 0.25)
        assert converged
        assert state.gamma == pytest.approx(1.0, abs=1e-6)

    def test_two_degree_diverges_above_threshold(self, td):
        state, converged = de_run(td.joint(q=0.37), 0.32)
        assert not converged
        assert state.alpha_max > 1e-3

    def test_contraction_regime_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            joint = random_joint(rng, min_var_degree=2)
            d_c_max = max(joint.check_degrees)
            d_v_min = min(joint.variable_degrees)
            delta = float(rng.uniform(0.1, 0.95)) / (d_c_max - 1)
            rate = ((d_c_max - 1) * delta) ** (d_v_min - 1)
            states = de_trajectory(joint, delta, 60)
            for i, state in enumerate(states):
                bound = rate ** (i + 1) * delta
                assert state.alpha_max <= bound * (1 + 1e-9) + 1e-300

    def test_iterates_non_increasing(self, td):
        for delta in (0.2, 0.3, 0.33):
            states = de_trajectory(td.joint(q=0.5), delta, 200)
            prev = {x: delta for x in states[0].alpha}
            for state in states:
                for x, a in state.alpha.items():
                    assert a <= prev[x] * (1 + 1e-12)
                prev = state.alpha


class TestThreshold:
    def test_two_degree_reference_points(self, td):
        r0 = threshold(td.joint(q=0.0), precision=1e-4)
        assert r0.delta_star == pytest.approx(0.2741, abs=5e-4)
        r37 = threshold(td.joint(q=0.37), precision=1e-4)
        assert r37.delta_star == pytest.approx(0.3066, abs=5e-4)

    def test_independent_reference_point(self, ss_constraint):
        joint = joint_independent(ss_constraint.edge_x, ss_constraint.edge_y)
        result = threshold(joint, precision=1e-4)
        assert result.delta_star == pytest.approx(0.49553, abs=5e-4)

    def test_bracket_and_bounds_are_consistent(self, td):
        result = threshold(td.joint(q=0.4), precision=1e-4)
        lo, hi = result.bracket
        assert lo <= result.delta_star <= hi
        assert hi - lo <= 1e-4
        assert result.lower_bound - 1e-4 <= result.delta_star
        assert result.delta_star <= result.upper_bound + 1e-4
        assert not result.monotone_anomaly
        assert result.gamma_at_threshold == pytest.approx(1.0, abs=1e-6)

    def test_degree_one_variables_threshold_zero(self):
        joint = joint_independent(
            EdgeDegreeDistribution({1: 0.6, 2: 0.4}),
            EdgeDegreeDistribution({9: 1.0}),
        )
        result = threshold(joint, precision=1e-3)
        # a degree-1 variable end keeps alpha = delta forever
        assert result.delta_star <= 1e-3


class TestTrajectoryCsv:
    def test_columns_and_length(self, td):
        from corr_ldpc.de import trajectory_csv

        text = trajectory_csv(td.joint(q=0.4), 0.25, 5)
        lines = text.strip().splitlines()
        assert lines[0] == "iter,alpha_3,alpha_6,beta_9,beta_18,gamma"
        assert len(lines) == 6
        assert lines[1].split(",")[0] == "1"


class TestBounds:
    def test_stability_bound_values(self, td, ss_constraint):
        ss = joint_independent(ss_constraint.edge_x, ss_constraint.edge_y)
        assert stability_lower_bound(ss) == pytest.approx(0.125, abs=1e-15)
        assert stability_lower_bound(td.joint(q=0.2)) == pytest.approx(
            1 / 17, abs=1e-15
        )

    def test_stability_bound_needs_degree_two(self):
        joint = joint_independent(
            EdgeDegreeDistribution({1: 0.5, 3: 0.5}),
            EdgeDegreeDistribution({9: 1.0}),
        )
        with pytest.raises(ValueError, match="hypothesis"):
            stability_lower_bound(joint)

    def test_capacity_bound_values(self, td, ss_constraint):
        assert capacity_upper_bound(td.joint(q=0.9)) == pytest.approx(
            1 / 3, abs=1e-12
        )
        ss = joint_independent(ss_constraint.edge_x, ss_constraint.edge_y)
        assert capacity_upper_bound(ss) == pytest.approx(0.5, abs=1e-4)
        point = joint_independent(
            EdgeDegreeDistribution({3: 1.0}), EdgeDegreeDistribution({6: 1.0})
        )
        assert capacity_upper_bound(point) == pytest.approx(0.5, abs=1e-12)


class TestTrajectoryProperties:
    def test_gamma_one_at_zero_erasure(self, td):
        states = de_trajectory(td.joint(q=0.3), 0.0, 5)
        assert all(s.gamma == 1.0 for s in states)

    def test_gamma_non_increasing_in_delta(self, td):
        joint = td.joint(q=0.4)
        k = 10
        deltas = [0.05, 0.15, 0.25, 0.32]
        runs = [de_trajectory(joint, d, k)[-1] for d in deltas]
        for lo_state, hi_state in zip(runs, runs[1:]):
            assert hi_state.gamma <= lo_state.gamma + 1e-12
            for x in lo_state.gamma_by_degree:
                assert (
                    hi_state.gamma_by_degree[x]
                    <= lo_state.gamma_by_degree[x] + 1e-12
                )

    def test_bounded_iterates(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            joint = random_joint(rng, min_var_degree=1)
            delta = float(rng.uniform(0, 1))
            for state in de_trajectory(joint, delta, 15):
                assert all(0.0 <= a <= delta for a in state.alpha.values())
                assert all(0.0 <= b <= 1.0 for b in state.beta.values())

    def test_four_cell_equivalent_trajectories(self, td):
        d, g = td.d, td.g
        q = 0.37
        p1, p2 = (1 - q) / 4, (1 + q) / 4
        general = JointEdgeDistribution(
            {
                (2 * d, 2 * g * d): p1,
                (2 * d, g * d): p2,
                (d, 2 * g * d): p2,
                (d, g * d): 1 - p1 - 2 * p2,
            }
        )
        blocked = td.joint(q=q)
        for sa, sb in zip(
            de_trajectory(blocked, 0.3, 200), de_trajectory(general, 0.3, 200)
        ):
            for x in sa.alpha:
                assert abs(sa.alpha[x] - sb.alpha[x]) < 1e-12

    def test_independent_reduction_per_iteration(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            joint = random_product_joint(rng)
            delta = float(rng.uniform(0.05, 0.9))
            states = de_trajectory(joint, delta, 100)
            a_prev = sum(delta * p for p in joint.edge_x.entries.values())
            for state in states:
                a_now = sum(
                    state.alpha[x] * joint.edge_x.prob(x) for x in state.alpha
                )
                expected = scalar_recursion_step(
                    joint.edge_x, joint.edge_y, delta, a_prev
                )
                assert a_now == pytest.approx(expected, abs=1e-12)
                a_prev = a_now
