"""Threshold searches over ensembles.

Two searches: a sweep of the block-coupling strength q (the threshold
curve is unimodal in q for anti-assortative pairings, so the sweep both
locates the peak and documents the shape), and a derivative-free search
over bivariate edge distributions with both marginals pinned, which is
where correlated ensembles beat the classical independent designs.

The fixed-marginal family is parameterized by the upper-left
(rows-1) x (cols-1) block of the joint table, listed column by column;
the last column and last row are determined by the marginals.  Candidates
whose determined cells go negative are infeasible and are rejected, never
repaired, so every evaluated joint has exactly the prescribed marginals.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .de import ThresholdResult, threshold
from .dist import (
    BlockSpec,
    EdgeDegreeDistribution,
    JointEdgeDistribution,
    NodeDegreeDistribution,
    joint_from_block,
    joint_independent,
)

# a determined cell this far below zero is treated as exactly zero;
# anything lower marks the candidate infeasible
NEG_CELL_TOL = 1e-12


class InfeasibleCellError(ValueError):
    """A determined cell of the completed joint is negative."""


@dataclass(frozen=True)
class SweepResult:
    """Thresholds along a parameter grid, sorted by parameter."""

    points: tuple[tuple[float, ThresholdResult], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple(sorted(self.points, key=lambda p: p[0]))
        )

    @property
    def best(self) -> tuple[float, ThresholdResult]:
        return max(self.points, key=lambda p: p[1].delta_star)

    def csv(self) -> str:
        lines = ["q,delta_star,lower_bound,upper_bound"]
        for q, res in self.points:
            lines.append(
                f"{q:.6f},{res.delta_star:.6f},{res.lower_bound:.6f},"
                f"{res.upper_bound:.6f}"
            )
        return "\n".join(lines) + "\n"


def sweep_q(
    p_x: NodeDegreeDistribution,
    p_y: NodeDegreeDistribution,
    template: BlockSpec,
    q_grid: list[float],
    precision: float = 1e-4,
    max_iter: int = 20_000,
    epsilon: float = 1e-8,
) -> SweepResult:
    """Threshold of the block ensemble at each q, template fixed otherwise."""
    points = []
    for q in q_grid:
        joint = joint_from_block(p_x, p_y, dataclasses.replace(template, q=float(q)))
        points.append(
            (float(q), threshold(joint, precision=precision, max_iter=max_iter,
                                 epsilon=epsilon))
        )
    return SweepResult(points=tuple(points))


@dataclass(frozen=True)
class MarginalConstraint:
    """Both edge-perspective marginals pinned; free cells parameterize the rest."""

    edge_x: EdgeDegreeDistribution
    edge_y: EdgeDegreeDistribution
    free_cells: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        xs = self.edge_x.degrees
        ys = self.edge_y.degrees
        if not self.free_cells:
            object.__setattr__(
                self,
                "free_cells",
                tuple((x, y) for y in ys[:-1] for x in xs[:-1]),
            )
        for x, y in self.free_cells:
            if x not in self.edge_x.entries or y not in self.edge_y.entries:
                raise ValueError(f"free cell {(x, y)} outside the marginals")
            if x == xs[-1] or y == ys[-1]:
                raise ValueError("last row and column must stay dependent")

    def box(self) -> list[tuple[float, float]]:
        """Per-cell bounds implied by the marginals alone."""
        return [
            (0.0, min(self.edge_x.prob(x), self.edge_y.prob(y)))
            for x, y in self.free_cells
        ]

    def product_point(self) -> list[float]:
        return [
            self.edge_x.prob(x) * self.edge_y.prob(y) for x, y in self.free_cells
        ]


def joint_from_free_cells(
    constraint: MarginalConstraint, values: list[float]
) -> JointEdgeDistribution:
    """Complete the joint table from the free cells.

    Each non-final row is closed by its last column, each non-final column
    by the last row, and the corner by either (they agree because both
    marginals have unit mass).  A determined cell below -1e-12 raises
    InfeasibleCellError; tinier negatives are rounded to zero.
    """
    if len(values) != len(constraint.free_cells):
        raise ValueError("wrong number of free-cell values")
    xs = constraint.edge_x.degrees
    ys = constraint.edge_y.degrees
    cells = {cell: float(v) for cell, v in zip(constraint.free_cells, values)}
    for x, y in constraint.free_cells:
        if cells[(x, y)] < 0.0:
            raise InfeasibleCellError(f"free cell {(x, y)} is negative")

    def close(cell, value):
        if value < -NEG_CELL_TOL:
            raise InfeasibleCellError(f"determined cell {cell} = {value!r} < 0")
        cells[cell] = max(value, 0.0)

    for x in xs[:-1]:
        row = math.fsum(cells.get((x, y), 0.0) for y in ys[:-1])
        close((x, ys[-1]), constraint.edge_x.prob(x) - row)
    for y in ys[:-1]:
        col = math.fsum(cells.get((x, y), 0.0) for x in xs[:-1])
        close((xs[-1], y), constraint.edge_y.prob(y) - col)
    last_row = math.fsum(cells.get((xs[-1], y), 0.0) for y in ys[:-1])
    close((xs[-1], ys[-1]), constraint.edge_x.prob(xs[-1]) - last_row)
    return JointEdgeDistribution(cells)


@dataclass(frozen=True)
class OptimizeResult:
    best_joint: JointEdgeDistribution
    result: ThresholdResult
    baseline: ThresholdResult
    evaluations: int
    best_values: tuple[float, ...]

    def report(self) -> dict:
        return {
            "best_joint": [
                [x, y, repr(p)] for (x, y), p in self.best_joint.entries.items()
            ],
            "delta_star": self.result.delta_star,
            "evaluations": self.evaluations,
            "baseline_independent": self.baseline.delta_star,
        }


def optimize_joint(
    constraint: MarginalConstraint,
    budget: int = 2000,
    seed: int = 0,
    coarse_precision: float = 1e-4,
    final_precision: float = 1e-5,
    crossover: float = 0.9,
    scale: float = 0.7,
    refine_top: int = 5,
) -> OptimizeResult:
    """Maximize the erasure threshold over the fixed-marginal family.

    Plain differential evolution (rand/1/bin) on the free-cell box:
    population of 10 per dimension, mutation scale 0.7, crossover 0.9,
    infeasible mutants resampled.  The product (independent) point is
    seeded into the initial population, so the search can never end below
    the independent baseline.  Thresholds are evaluated coarsely during
    the search; the coarse score quantizes at about half the coarse
    precision, so the refine_top best-scoring survivors (not just the
    single incumbent) are re-ranked at final_precision at the end.
    """
    dim = len(constraint.free_cells)
    if dim == 0:
        raise ValueError("the marginals determine the joint; nothing to optimize")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    box = constraint.box()
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    rng = np.random.Generator(np.random.PCG64(seed))
    pop_size = max(4, 10 * dim)

    evaluations = 0

    def evaluate(vec: np.ndarray) -> float:
        nonlocal evaluations
        try:
            joint = joint_from_free_cells(constraint, list(vec))
        except InfeasibleCellError:
            return -1.0
        evaluations += 1
        return threshold(joint, precision=coarse_precision).delta_star

    def random_feasible() -> np.ndarray:
        for _ in range(200):
            vec = rng.uniform(lo, hi)
            try:
                joint_from_free_cells(constraint, list(vec))
            except InfeasibleCellError:
                continue
            return vec
        # the product point is always feasible; perturb toward it
        base = np.array(constraint.product_point())
        return base + 0.01 * rng.uniform(-1.0, 1.0, size=dim) * (hi - lo)

    pop = [np.array(constraint.product_point())]
    while len(pop) < pop_size:
        pop.append(random_feasible())
    scores = []
    for vec in pop:
        if evaluations >= budget:
            scores.append(-1.0)
            continue
        scores.append(evaluate(vec))

    best_idx = int(np.argmax(scores))
    best_vec, best_score = pop[best_idx].copy(), scores[best_idx]

    while evaluations < budget:
        for i in range(pop_size):
            if evaluations >= budget:
                break
            others = np.array([k for k in range(pop_size) if k != i])
            trial = None
            for _ in range(20):
                a, b, c = (int(k) for k in rng.choice(others, size=3, replace=False))
                mutant = pop[a] + scale * (pop[b] - pop[c])
                np.clip(mutant, lo, hi, out=mutant)
                cand = pop[i].copy()
                cross = rng.random(dim) < crossover
                cross[rng.integers(dim)] = True
                cand[cross] = mutant[cross]
                try:
                    joint_from_free_cells(constraint, list(cand))
                except InfeasibleCellError:
                    continue
                trial = cand
                break
            if trial is None:
                continue
            score = evaluate(trial)
            if score >= scores[i]:
                pop[i], scores[i] = trial, score
                if score > best_score:
                    best_vec, best_score = trial.copy(), score

    finalists = {tuple(best_vec): best_score}
    for rank in np.argsort(scores)[::-1][:refine_top]:
        if scores[rank] > -1.0:
            finalists.setdefault(tuple(pop[rank]), scores[rank])
    best_vec, refined = None, None
    for vec in finalists:
        joint = joint_from_free_cells(constraint, list(vec))
        res = threshold(joint, precision=final_precision)
        if refined is None or res.delta_star > refined.delta_star:
            best_vec, refined = vec, res
    best_joint = joint_from_free_cells(constraint, list(best_vec))
    baseline = threshold(
        joint_independent(constraint.edge_x, constraint.edge_y),
        precision=final_precision,
    )
    return OptimizeResult(
        best_joint=best_joint,
        result=refined,
        baseline=baseline,
        evaluations=evaluations,
        best_values=tuple(float(v) for v in best_vec),
    )
