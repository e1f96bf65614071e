"""Shared fixtures and reference oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from corr_ldpc.construct import TannerGraph
from corr_ldpc.dist import EdgeDegreeDistribution, JointEdgeDistribution
from corr_ldpc.presets import marginal_presets, two_degree


@pytest.fixture(scope="session")
def td():
    """The two-degree block ensemble with d = 3, rate ratio 3."""
    return two_degree(d=3, g=3)


@pytest.fixture(scope="session")
def ss_constraint():
    return marginal_presets("shokrollahi-storn")


@pytest.fixture(scope="session")
def ru_constraint():
    return marginal_presets("ru-ex363")


@pytest.fixture(scope="session")
def bazzi_constraint():
    return marginal_presets("bazzi")


def random_edge_dist(rng, degrees_pool, max_support=4) -> EdgeDegreeDistribution:
    k = int(rng.integers(1, max_support + 1))
    degs = rng.choice(degrees_pool, size=min(k, len(degrees_pool)), replace=False)
    probs = rng.uniform(0.05, 1.0, size=len(degs))
    probs /= probs.sum()
    return EdgeDegreeDistribution({int(d): float(p) for d, p in zip(degs, probs)})


def random_joint(rng, min_var_degree=2) -> JointEdgeDistribution:
    """Random bivariate edge distribution with full support on its grid.

    Variable degrees stay at most 8 and check degrees at least 9, which
    pins the rate ratio above 1 for any cell values.
    """
    nx = int(rng.integers(1, 5))
    ny = int(rng.integers(1, 5))
    xs = rng.choice(np.arange(min_var_degree, 9), size=nx, replace=False)
    ys = rng.choice(np.arange(9, 25), size=ny, replace=False)
    vals = rng.uniform(0.05, 1.0, size=(nx, ny))
    vals /= vals.sum()
    return JointEdgeDistribution(
        {
            (int(x), int(y)): float(vals[i, j])
            for i, x in enumerate(sorted(xs))
            for j, y in enumerate(sorted(ys))
        }
    )


def random_product_joint(rng, min_var_degree=2) -> JointEdgeDistribution:
    ex = random_edge_dist(rng, np.arange(min_var_degree, 9))
    ey = random_edge_dist(rng, np.arange(9, 25))
    return JointEdgeDistribution(
        {
            (x, y): px * py
            for x, px in ex.entries.items()
            for y, py in ey.entries.items()
        }
    )


def scalar_recursion_step(
    edge_x: EdgeDegreeDistribution,
    edge_y: EdgeDegreeDistribution,
    delta: float,
    a: float,
) -> float:
    """Classical single-variable update a -> delta * lam(1 - rho(1 - a)).

    lam and rho are the edge-perspective generating polynomials
    sum_d p(d) z^(d-1), evaluated directly with floating powers; this is
    the independent-ensemble reference the two-sided recursion must
    reproduce on product joints.
    """
    rho = sum(p * (1.0 - a) ** (y - 1) for y, p in edge_y.entries.items())
    z = 1.0 - rho
    lam = sum(p * z ** (x - 1) for x, p in edge_x.entries.items())
    return delta * lam


def random_small_graph(rng, max_vars=12, max_checks=8, max_edges=24) -> TannerGraph:
    nv = int(rng.integers(1, max_vars + 1))
    nc = int(rng.integers(1, max_checks + 1))
    ne = int(rng.integers(0, max_edges + 1))
    edges = np.column_stack(
        (rng.integers(0, nv, size=ne), rng.integers(0, nc, size=ne))
    ).astype(np.int64)
    return TannerGraph(
        n=nv,
        m=nc,
        variable_degrees=np.bincount(edges[:, 0], minlength=nv),
        check_degrees=np.bincount(edges[:, 1], minlength=nc),
        edges=edges,
    )


def peel_fixed_point(graph: TannerGraph, erased: set[int], order=None) -> set[int]:
    """Brute-force reference decoder: rescan all checks until no check sees
    exactly one unresolved erased neighbor (parallel edges counted).

    `order` fixes the scan order of checks within each sweep; the fixed
    point must not depend on it.
    """
    by_check: list[list[int]] = [[] for _ in range(graph.m)]
    for v, c in graph.edges:
        by_check[int(c)].append(int(v))
    scan = list(range(graph.m)) if order is None else list(order)
    recovered: set[int] = set()
    changed = True
    while changed:
        changed = False
        for c in scan:
            live = [v for v in by_check[c] if v in erased and v not in recovered]
            if len(live) == 1:
                recovered.add(live[0])
                changed = True
    return recovered
