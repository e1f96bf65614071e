"""Sampling finite bipartite code graphs from degree ensembles.

Two samplers share one integer realization step:

* the general construction types every edge by its endpoint degree pair
  and wires each type with an independent uniform stub matching;
* the block construction splits the stubs of each side into equal-mass
  blocks, marks a fraction q of every block as type 1, matches type-1
  stubs block-to-permuted-block, and matches type-2 stubs globally.

Randomness comes from numpy's PCG64 generator seeded with a 64-bit
integer, so a (spec, seed) pair reproduces the same graph everywhere;
graphs are immutable once sampled and distinct seeds can be drawn
concurrently.  Parallel edges are kept, as in the plain configuration
model.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dist import (
    BlockSpec,
    JointEdgeDistribution,
    NodeDegreeDistribution,
    edge_from_node,
    validate_block_spec,
)

# BFS budget for the stub-balance repair; generous, the search is tiny.
REPAIR_MAX_MOVES = 64


class InfeasibleRealizationError(RuntimeError):
    """No consistent integer node/edge counts exist for this (ensemble, n)."""


@dataclass(frozen=True)
class TannerGraph:
    """Sampled bipartite multigraph of variable and check nodes."""

    n: int
    m: int
    variable_degrees: np.ndarray
    check_degrees: np.ndarray
    edges: np.ndarray  # shape (E, 2): variable index, check index

    def __post_init__(self):
        vdeg = np.asarray(self.variable_degrees, dtype=np.int64)
        cdeg = np.asarray(self.check_degrees, dtype=np.int64)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "variable_degrees", vdeg)
        object.__setattr__(self, "check_degrees", cdeg)
        object.__setattr__(self, "edges", edges)
        if vdeg.shape[0] != self.n or cdeg.shape[0] != self.m:
            raise ValueError("degree arrays do not match node counts")
        if vdeg.sum() != cdeg.sum() or vdeg.sum() != edges.shape[0]:
            raise ValueError("stub totals and edge count disagree")
        if edges.shape[0]:
            if edges[:, 0].min() < 0 or edges[:, 0].max() >= self.n:
                raise ValueError("variable index out of range")
            if edges[:, 1].min() < 0 or edges[:, 1].max() >= self.m:
                raise ValueError("check index out of range")
        if not np.array_equal(np.bincount(edges[:, 0], minlength=self.n), vdeg):
            raise ValueError("variable degrees do not match edge incidence")
        if not np.array_equal(np.bincount(edges[:, 1], minlength=self.m), cdeg):
            raise ValueError("check degrees do not match edge incidence")

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])


@dataclass(frozen=True)
class EnsembleSpec:
    """A bivariate edge distribution together with a target graph size."""

    joint: JointEdgeDistribution
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 1:
            raise ValueError("realized check count would be < 1")

    @property
    def m(self) -> int:
        return round(self.n / self.joint.rate_ratio)


@dataclass(frozen=True)
class RealizedCounts:
    """Consistent integer node and edge-type counts for one finite graph."""

    variable_nodes: dict[int, int]
    check_nodes: dict[int, int]
    edge_types: dict[tuple[int, int], int]
    n: int = field(init=False)
    m: int = field(init=False)
    num_edges: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", sum(self.variable_nodes.values()))
        object.__setattr__(self, "m", sum(self.check_nodes.values()))
        object.__setattr__(self, "num_edges", sum(self.edge_types.values()))
        for x, count in self.variable_nodes.items():
            stubs = sum(e for (ex, _), e in self.edge_types.items() if ex == x)
            if stubs != x * count:
                raise InfeasibleRealizationError(
                    f"variable-degree-{x} stub total {stubs} != {x * count}"
                )
        for y, count in self.check_nodes.items():
            stubs = sum(e for (_, ey), e in self.edge_types.items() if ey == y)
            if stubs != y * count:
                raise InfeasibleRealizationError(
                    f"check-degree-{y} stub total {stubs} != {y * count}"
                )


def _largest_remainder(weights: dict[int, float], total: int) -> dict[int, int]:
    """Apportion `total` units proportionally to nonnegative weights."""
    floors = {k: int(math.floor(w)) for k, w in weights.items()}
    short = total - sum(floors.values())
    if short < 0:
        # float sums can overshoot by a unit; trim from the smallest fractions
        order = sorted(weights, key=lambda k: (weights[k] - floors[k], -k))
        for k in order:
            if short == 0:
                break
            if floors[k] > 0:
                floors[k] -= 1
                short += 1
    order = sorted(weights, key=lambda k: (-(weights[k] - floors[k]), k))
    for k in order[:short]:
        floors[k] += 1
    return floors


def _balance_stub_totals(
    v_counts: dict[int, int], c_counts: dict[int, int]
) -> None:
    """Equalize sum(x v_x) and sum(y c_y) by minimal node degree swaps.

    A swap moves one node between two degrees of the same side, changing
    that side's stub total by the degree gap.  Shortest swap sequences are
    found by breadth-first search over the residual imbalance; if none
    exists within the budget the realization is infeasible.
    """
    delta = sum(x * v for x, v in v_counts.items()) - sum(
        y * c for y, c in c_counts.items()
    )
    if delta == 0:
        return
    moves: dict[int, list[tuple[str, int, int]]] = {}
    for side, counts in (("v", v_counts), ("c", c_counts)):
        degs = sorted(counts)
        for a in degs:
            for b in degs:
                if a == b:
                    continue
                step = (b - a) if side == "v" else (a - b)
                moves.setdefault(step, []).append((side, a, b))
    if not moves:
        raise InfeasibleRealizationError(
            f"stub totals differ by {delta} and no degree swap is available"
        )
    max_step = max(abs(s) for s in moves)
    bound = abs(delta) + max_step * max_step + REPAIR_MAX_MOVES
    seen = {delta: None}
    queue = deque([delta])
    while queue and 0 not in seen:
        r = queue.popleft()
        for step in moves:
            nxt = r + step
            if abs(nxt) <= bound and nxt not in seen:
                seen[nxt] = (r, step)
                queue.append(nxt)
    if 0 not in seen:
        raise InfeasibleRealizationError(
            f"stub totals differ by {delta}, unreachable by degree swaps"
        )
    path = []
    r = 0
    while seen[r] is not None:
        prev, step = seen[r]
        path.append(step)
        r = prev
    if len(path) > REPAIR_MAX_MOVES:
        raise InfeasibleRealizationError(
            f"stub-total repair needs {len(path)} swaps, over budget"
        )
    for step in path:
        applied = False
        for side, a, b in sorted(
            moves[step],
            key=lambda mv: -(v_counts if mv[0] == "v" else c_counts)[mv[1]],
        ):
            counts = v_counts if side == "v" else c_counts
            if counts[a] > 0:
                counts[a] -= 1
                counts[b] += 1
                applied = True
                break
        if not applied:
            raise InfeasibleRealizationError(
                f"no node left to reassign for a degree swap of gap {step}"
            )


def _realize_node_counts(
    joint: JointEdgeDistribution, n: int
) -> tuple[dict[int, int], dict[int, int], int]:
    p_x = joint.node_x()
    p_y = joint.node_y()
    m = round(n / joint.rate_ratio)
    if m < 1:
        raise InfeasibleRealizationError("realized check count is < 1")
    v = _largest_remainder({x: n * p for x, p in p_x.entries.items()}, n)
    c = _largest_remainder({y: m * p for y, p in p_y.entries.items()}, m)
    _balance_stub_totals(v, c)
    return v, c, m


def realize_counts(spec: EnsembleSpec) -> RealizedCounts:
    """Integerize node counts and per-type edge counts consistently.

    Node counts come from largest-remainder apportionment (stub totals
    balanced by minimal degree swaps); edge types are apportioned within
    each variable-degree row and then repaired column by column so that
    every row and column stub identity holds exactly.  Repairs only touch
    cells the ensemble actually supports.
    """
    joint = spec.joint
    v, c, _ = _realize_node_counts(joint, spec.n)
    xs = sorted({x for x, _ in joint.entries})
    ys = sorted({y for _, y in joint.entries})
    total = sum(x * cnt for x, cnt in v.items())

    counts: dict[tuple[int, int], int] = {}
    for x in xs:
        row_support = [y for y in ys if (x, y) in joint.entries]
        weights = {y: x * v[x] * joint.prob(x, y) / joint.edge_x.prob(x)
                   for y in row_support}
        row = _largest_remainder(weights, x * v[x])
        for y, e in row.items():
            counts[(x, y)] = e

    target = {y: y * c[y] for y in ys}
    col = {y: sum(counts.get((x, y), 0) for x in xs) for y in ys}
    deviation = {
        (x, y): counts.get((x, y), 0) - total * joint.prob(x, y)
        for x in xs
        for y in ys
        if (x, y) in joint.entries
    }
    guard = sum(abs(col[y] - target[y]) for y in ys) + 1
    while True:
        over = [y for y in ys if col[y] > target[y]]
        under = [y for y in ys if col[y] < target[y]]
        if not over and not under:
            break
        guard -= 1
        if guard < 0:
            raise InfeasibleRealizationError("edge-type repair did not converge")
        y_over = max(over, key=lambda y: col[y] - target[y])
        y_under = max(under, key=lambda y: target[y] - col[y])
        best = None
        for x in xs:
            if counts.get((x, y_over), 0) < 1 or (x, y_under) not in joint.entries:
                continue
            gain = deviation[(x, y_over)] - deviation[(x, y_under)]
            if best is None or gain > best[0]:
                best = (gain, x)
        if best is None:
            raise InfeasibleRealizationError(
                f"check-degree-{y_under} stub total {col[y_under]} cannot reach "
                f"{target[y_under]} within the ensemble support"
            )
        x = best[1]
        counts[(x, y_over)] -= 1
        counts[(x, y_under)] = counts.get((x, y_under), 0) + 1
        deviation[(x, y_over)] -= 1
        deviation[(x, y_under)] += 1
        col[y_over] -= 1
        col[y_under] += 1

    counts = {k: e for k, e in counts.items() if e > 0}
    return RealizedCounts(variable_nodes=v, check_nodes=c, edge_types=counts)


def _assign_node_ids(node_counts: dict[int, int]) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Consecutive ids grouped by ascending degree; returns (degrees, ids per degree)."""
    total = sum(node_counts.values())
    degrees = np.empty(total, dtype=np.int64)
    ids: dict[int, np.ndarray] = {}
    at = 0
    for deg in sorted(node_counts):
        cnt = node_counts[deg]
        degrees[at : at + cnt] = deg
        ids[deg] = np.arange(at, at + cnt, dtype=np.int64)
        at += cnt
    return degrees, ids


def _stub_array(ids: np.ndarray, degree: int) -> np.ndarray:
    return np.repeat(ids, degree)


def sample_general(spec: EnsembleSpec, seed: int) -> TannerGraph:
    """Sample via typed stub matching from the bivariate edge distribution.

    For each endpoint-degree pair (x, y), the realized number of stubs is
    drawn without replacement from both sides and matched by a uniform
    permutation, so the empirical pair frequencies concentrate on the
    ensemble's cells as n grows.
    """
    counts = realize_counts(spec)
    rng = np.random.Generator(np.random.PCG64(seed))
    return _sample_general_rng(counts, rng)


def _sample_general_rng(counts: RealizedCounts, rng: np.random.Generator) -> TannerGraph:
    vdeg, vids = _assign_node_ids(counts.variable_nodes)
    cdeg, cids = _assign_node_ids(counts.check_nodes)
    xs = sorted(counts.variable_nodes)
    ys = sorted(counts.check_nodes)

    var_slices: dict[tuple[int, int], np.ndarray] = {}
    for x in xs:
        stubs = rng.permutation(_stub_array(vids[x], x))
        at = 0
        for y in ys:
            e = counts.edge_types.get((x, y), 0)
            if e:
                var_slices[(x, y)] = stubs[at : at + e]
                at += e
    chk_slices: dict[tuple[int, int], np.ndarray] = {}
    for y in ys:
        stubs = rng.permutation(_stub_array(cids[y], y))
        at = 0
        for x in xs:
            e = counts.edge_types.get((x, y), 0)
            if e:
                chk_slices[(x, y)] = stubs[at : at + e]
                at += e

    pieces = [
        np.column_stack((var_slices[key], chk_slices[key]))
        for key in sorted(counts.edge_types)
    ]
    edges = np.concatenate(pieces) if pieces else np.empty((0, 2), dtype=np.int64)
    return TannerGraph(
        n=counts.n, m=counts.m, variable_degrees=vdeg, check_degrees=cdeg, edges=edges
    )


def sample_block(
    p_x: NodeDegreeDistribution,
    p_y: NodeDegreeDistribution,
    spec: BlockSpec,
    n: int,
    seed: int,
) -> TannerGraph:
    """Sample via the two-type block matching.

    Stubs of each side are grouped into the spec's blocks (which must hold
    an equal share of the stubs); round-half-even of q times the block
    size stubs per block are marked type 1 at random.  Type-1 stubs of
    variable block i pair uniformly with type-1 stubs of check block
    pi(i); all type-2 stubs pair uniformly across blocks.
    """
    validate_block_spec(p_x, p_y, spec)
    g = edge_from_node(p_y).node_mean() / edge_from_node(p_x).node_mean()
    v, c = _block_node_counts(p_x, p_y, g, n)
    rng = np.random.Generator(np.random.PCG64(seed))

    vdeg, vids = _assign_node_ids(v)
    cdeg, cids = _assign_node_ids(c)
    total = int(vdeg.sum())
    if total != int(cdeg.sum()):
        raise InfeasibleRealizationError("stub totals differ after realization")
    if total % spec.b:
        raise InfeasibleRealizationError(
            f"{total} stubs cannot split into {spec.b} equal blocks"
        )
    size = total // spec.b

    def split(blocks: dict[int, int], ids: dict[int, np.ndarray], side: str):
        per_block: dict[int, list[np.ndarray]] = {i: [] for i in range(1, spec.b + 1)}
        for deg in sorted(ids, reverse=True):
            per_block[blocks[deg]].append(_stub_array(ids[deg], deg))
        out = {}
        for i, pieces in per_block.items():
            stubs = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)
            if stubs.shape[0] != size:
                raise InfeasibleRealizationError(
                    f"{side} block {i} holds {stubs.shape[0]} stubs, expected {size}"
                )
            out[i] = rng.permutation(stubs)
        return out

    vblocks = split(spec.variable_blocks, vids, "variable")
    cblocks = split(spec.check_blocks, cids, "check")
    t1 = round(spec.q * size)

    edge_parts = []
    v_rest, c_rest = [], []
    for i in range(1, spec.b + 1):
        vstubs = vblocks[i]
        cstubs = cblocks[spec.image_of(i)]
        edge_parts.append(np.column_stack((vstubs[:t1], cstubs[:t1])))
        v_rest.append(vstubs[t1:])
        c_rest.append(cblocks[i][t1:])
    v_pool = rng.permutation(np.concatenate(v_rest)) if v_rest else np.empty(0, np.int64)
    c_pool = rng.permutation(np.concatenate(c_rest)) if c_rest else np.empty(0, np.int64)
    edge_parts.append(np.column_stack((v_pool, c_pool)))
    edges = np.concatenate(edge_parts)
    return TannerGraph(
        n=len(vdeg), m=len(cdeg), variable_degrees=vdeg, check_degrees=cdeg, edges=edges
    )


def _block_node_counts(p_x, p_y, g, n):
    """Node counts for the block sampler (shares the repair machinery)."""
    m = round(n / g)
    if m < 1:
        raise InfeasibleRealizationError("realized check count is < 1")
    v = _largest_remainder({x: n * p for x, p in p_x.entries.items()}, n)
    c = _largest_remainder({y: m * p for y, p in p_y.entries.items()}, m)
    _balance_stub_totals(v, c)
    return v, c


def empirical_joint(graph: TannerGraph) -> JointEdgeDistribution:
    """Relative frequency of endpoint-degree pairs over the graph's edges."""
    if graph.num_edges == 0:
        raise ValueError("graph has no edges")
    dx = graph.variable_degrees[graph.edges[:, 0]]
    dy = graph.check_degrees[graph.edges[:, 1]]
    pairs, counts = np.unique(np.column_stack((dx, dy)), axis=0, return_counts=True)
    total = graph.num_edges
    return JointEdgeDistribution(
        {(int(x), int(y)): int(k) / total for (x, y), k in zip(pairs, counts)}
    )


# ---------------------------------------------------------------------------
# Export formats
# ---------------------------------------------------------------------------


def to_alist(graph: TannerGraph) -> str:
    """Serialize in alist form (1-based neighbor lists, zero padded)."""
    n, m = graph.n, graph.m
    var_nbrs: list[list[int]] = [[] for _ in range(n)]
    chk_nbrs: list[list[int]] = [[] for _ in range(m)]
    for v, c in graph.edges:
        var_nbrs[v].append(int(c) + 1)
        chk_nbrs[c].append(int(v) + 1)
    dmax_v = max((len(r) for r in var_nbrs), default=0)
    dmax_c = max((len(r) for r in chk_nbrs), default=0)
    lines = [f"{n} {m}", f"{dmax_v} {dmax_c}"]
    lines.append(" ".join(str(len(r)) for r in var_nbrs))
    lines.append(" ".join(str(len(r)) for r in chk_nbrs))
    for r in var_nbrs:
        lines.append(" ".join(str(i) for i in sorted(r) + [0] * (dmax_v - len(r))))
    for r in chk_nbrs:
        lines.append(" ".join(str(i) for i in sorted(r) + [0] * (dmax_c - len(r))))
    return "\n".join(lines) + "\n"


def to_graph_json(graph: TannerGraph) -> dict:
    return {
        "n": graph.n,
        "m": graph.m,
        "edges": [[int(v), int(c)] for v, c in graph.edges],
    }
