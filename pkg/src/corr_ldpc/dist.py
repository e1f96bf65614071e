"""Degree distributions for sparse bipartite code graphs.

Node-perspective and edge-perspective (size-biased) degree distributions,
the bivariate distribution of the two endpoint degrees of a uniformly
random edge, and the block coupling that induces degree-degree correlation
between the variable side and the check side.

All probability mass functions are kept in canonical form: integer degrees
of at least 1, strictly positive probabilities, total mass 1 within
``SUM_TOL``.  Instances are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SUM_TOL = 1e-12
BLOCK_MASS_TOL = 1e-9


def _canonical_entries(entries, what: str) -> dict[int, float]:
    """Validate and canonicalize a degree pmf (drop exact zeros)."""
    clean: dict[int, float] = {}
    for deg, p in entries.items():
        d = int(deg)
        if d != deg or d < 1:
            raise ValueError(f"{what}: degree {deg!r} is not an integer >= 1")
        p = float(p)
        if p < 0.0:
            raise ValueError(f"{what}: negative probability {p!r} at degree {d}")
        if p == 0.0:
            continue
        if d in clean:
            raise ValueError(f"{what}: duplicate degree {d}")
        clean[d] = p
    if not clean:
        raise ValueError(f"{what}: empty distribution")
    total = math.fsum(clean.values())
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"{what}: probabilities sum to {total!r}, not 1")
    return dict(sorted(clean.items()))


@dataclass(frozen=True)
class NodeDegreeDistribution:
    """Degree distribution of a uniformly random node on one side."""

    entries: dict[int, float]

    def __post_init__(self):
        object.__setattr__(
            self, "entries", _canonical_entries(self.entries, "node distribution")
        )

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(self.entries)

    def prob(self, degree: int) -> float:
        return self.entries.get(degree, 0.0)

    def mean(self) -> float:
        return math.fsum(d * p for d, p in self.entries.items())


@dataclass(frozen=True)
class EdgeDegreeDistribution:
    """Degree distribution of one endpoint of a uniformly random edge.

    This is the size-biased companion of ``NodeDegreeDistribution``:
    p_e(d) is proportional to d * p(d).
    """

    entries: dict[int, float]

    def __post_init__(self):
        object.__setattr__(
            self, "entries", _canonical_entries(self.entries, "edge distribution")
        )

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(self.entries)

    def prob(self, degree: int) -> float:
        return self.entries.get(degree, 0.0)

    def node_mean(self) -> float:
        """Mean node degree implied by this edge-perspective pmf."""
        return 1.0 / math.fsum(p / d for d, p in self.entries.items())


def edge_from_node(node_dist: NodeDegreeDistribution) -> EdgeDegreeDistribution:
    """Size-bias a node-perspective pmf: p_e(d) = d p(d) / mean."""
    mean = node_dist.mean()
    return EdgeDegreeDistribution(
        {d: d * p / mean for d, p in node_dist.entries.items()}
    )


def node_from_edge(edge_dist: EdgeDegreeDistribution) -> NodeDegreeDistribution:
    """Invert the size bias: p(d) proportional to p_e(d) / d."""
    norm = math.fsum(p / d for d, p in edge_dist.entries.items())
    return NodeDegreeDistribution(
        {d: (p / d) / norm for d, p in edge_dist.entries.items()}
    )


@dataclass(frozen=True)
class JointEdgeDistribution:
    """Bivariate pmf of (variable-end degree, check-end degree) of a random edge.

    Cached alongside the cells: both edge-perspective marginals, the implied
    mean node degrees of the two sides, and the rate ratio
    ``G = mean_check / mean_variable = n / (n - k)``.  A code with at least
    one information bit needs G > 1, which is enforced here.
    """

    entries: dict[tuple[int, int], float]
    edge_x: EdgeDegreeDistribution = field(init=False)
    edge_y: EdgeDegreeDistribution = field(init=False)
    mean_x: float = field(init=False)
    mean_y: float = field(init=False)
    rate_ratio: float = field(init=False)

    def __post_init__(self):
        cells: dict[tuple[int, int], float] = {}
        for (x, y), p in self.entries.items():
            xi, yi = int(x), int(y)
            if xi != x or yi != y or xi < 1 or yi < 1:
                raise ValueError(f"joint: bad degree pair {(x, y)!r}")
            p = float(p)
            if p < 0.0:
                raise ValueError(f"joint: negative probability at {(xi, yi)}")
            if p == 0.0:
                continue
            if (xi, yi) in cells:
                raise ValueError(f"joint: duplicate cell {(xi, yi)}")
            cells[(xi, yi)] = p
        if not cells:
            raise ValueError("joint: empty distribution")
        total = math.fsum(cells.values())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"joint: probabilities sum to {total!r}, not 1")
        cells = dict(sorted(cells.items()))

        row: dict[int, list[float]] = {}
        col: dict[int, list[float]] = {}
        for (x, y), p in cells.items():
            row.setdefault(x, []).append(p)
            col.setdefault(y, []).append(p)
        edge_x = EdgeDegreeDistribution({x: math.fsum(ps) for x, ps in row.items()})
        edge_y = EdgeDegreeDistribution({y: math.fsum(ps) for y, ps in col.items()})
        mean_x = edge_x.node_mean()
        mean_y = edge_y.node_mean()
        ratio = mean_y / mean_x
        if ratio <= 1.0:
            raise ValueError(
                f"joint: rate ratio G = {ratio!r} <= 1; the check side must be "
                "sparser than the variable side"
            )
        object.__setattr__(self, "entries", cells)
        object.__setattr__(self, "edge_x", edge_x)
        object.__setattr__(self, "edge_y", edge_y)
        object.__setattr__(self, "mean_x", mean_x)
        object.__setattr__(self, "mean_y", mean_y)
        object.__setattr__(self, "rate_ratio", ratio)

    @property
    def variable_degrees(self) -> tuple[int, ...]:
        return self.edge_x.degrees

    @property
    def check_degrees(self) -> tuple[int, ...]:
        return self.edge_y.degrees

    def prob(self, x: int, y: int) -> float:
        return self.entries.get((x, y), 0.0)

    def node_x(self) -> NodeDegreeDistribution:
        return node_from_edge(self.edge_x)

    def node_y(self) -> NodeDegreeDistribution:
        return node_from_edge(self.edge_y)

    def max_abs_diff(self, other: JointEdgeDistribution) -> float:
        keys = set(self.entries) | set(other.entries)
        return max(abs(self.prob(x, y) - other.prob(x, y)) for x, y in keys)

    def allclose(self, other: JointEdgeDistribution, tol: float = SUM_TOL) -> bool:
        return self.max_abs_diff(other) <= tol


def joint_independent(
    x_edge: EdgeDegreeDistribution, y_edge: EdgeDegreeDistribution
) -> JointEdgeDistribution:
    """Product joint: endpoint degrees of a random edge drawn independently."""
    return JointEdgeDistribution(
        {
            (x, y): px * py
            for x, px in x_edge.entries.items()
            for y, py in y_edge.entries.items()
        }
    )


@dataclass(frozen=True)
class BlockSpec:
    """Parameters of the block coupling.

    The edge stubs on each side are split into ``b`` blocks of equal edge
    mass, whole degrees per block.  A fraction ``q`` of every block is
    marked type 1; type-1 stubs of variable block i pair only with type-1
    stubs of check block pi(i), the rest pair uniformly.  ``pi`` is 1-based,
    as are the block indices in the two degree-to-block maps.
    """

    b: int
    q: float
    pi: tuple[int, ...]
    variable_blocks: dict[int, int]
    check_blocks: dict[int, int]

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("block count must be >= 1")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        pi = tuple(int(i) for i in self.pi)
        if sorted(pi) != list(range(1, self.b + 1)):
            raise ValueError(f"pi = {pi!r} is not a permutation of 1..{self.b}")
        object.__setattr__(self, "pi", pi)
        for name, blocks in (
            ("variable_blocks", self.variable_blocks),
            ("check_blocks", self.check_blocks),
        ):
            for deg, idx in blocks.items():
                if not 1 <= idx <= self.b:
                    raise ValueError(f"{name}: block index {idx} for degree {deg}")

    def image_of(self, block: int) -> int:
        """Check block paired with the given variable block."""
        return self.pi[block - 1]


def _block_masses(
    edge_dist: EdgeDegreeDistribution, blocks: dict[int, int], b: int, side: str
) -> list[float]:
    masses = [0.0] * b
    for deg, p in edge_dist.entries.items():
        if deg not in blocks:
            raise ValueError(f"{side} degree {deg} is not assigned to a block")
        masses[blocks[deg] - 1] += p
    return masses


def validate_block_spec(
    p_x: NodeDegreeDistribution, p_y: NodeDegreeDistribution, spec: BlockSpec
) -> None:
    """Check the equal-edge-mass requirement of the block coupling.

    Every block must carry edge mass 1/b on each side; the coupled joint is
    only a probability distribution under that balance, so imbalance is an
    error rather than something to renormalize away.
    """
    for side, dist, blocks in (
        ("variable", edge_from_node(p_x), spec.variable_blocks),
        ("check", edge_from_node(p_y), spec.check_blocks),
    ):
        masses = _block_masses(dist, blocks, spec.b, side)
        for i, mass in enumerate(masses, start=1):
            if abs(mass - 1.0 / spec.b) > BLOCK_MASS_TOL:
                raise ValueError(
                    f"{side} block {i} carries edge mass {mass!r}, "
                    f"expected 1/{spec.b}"
                )


def joint_from_block(
    p_x: NodeDegreeDistribution, p_y: NodeDegreeDistribution, spec: BlockSpec
) -> JointEdgeDistribution:
    """Bivariate edge distribution induced by the block coupling.

    Cell (x, y) gets (b q + 1 - q) px_e(x) py_e(y) when y's block is the
    image of x's block under pi, and (1 - q) px_e(x) py_e(y) otherwise.
    With q = 0 this is exactly the product joint.
    """
    validate_block_spec(p_x, p_y, spec)
    px_e = edge_from_node(p_x)
    py_e = edge_from_node(p_y)
    matched = spec.b * spec.q + (1.0 - spec.q)
    unmatched = 1.0 - spec.q
    cells = {}
    for x, px in px_e.entries.items():
        target = spec.image_of(spec.variable_blocks[x])
        for y, py in py_e.entries.items():
            factor = matched if spec.check_blocks[y] == target else unmatched
            cells[(x, y)] = factor * px * py
    return JointEdgeDistribution(cells)


def pearson_correlation(joint: JointEdgeDistribution) -> float:
    """Pearson correlation between the two endpoint degrees of a random edge."""
    for side, dist in (("variable", joint.edge_x), ("check", joint.edge_y)):
        if len(dist.entries) < 2:
            raise ValueError(
                f"correlation undefined: {side}-side degree has a single "
                "support point (zero variance)"
            )
    ex = math.fsum(x * p for x, p in joint.edge_x.entries.items())
    ey = math.fsum(y * p for y, p in joint.edge_y.entries.items())
    ex2 = math.fsum(x * x * p for x, p in joint.edge_x.entries.items())
    ey2 = math.fsum(y * y * p for y, p in joint.edge_y.entries.items())
    exy = math.fsum(x * y * p for (x, y), p in joint.entries.items())
    var_x = ex2 - ex * ex
    var_y = ey2 - ey * ey
    return (exy - ex * ey) / (math.sqrt(var_x) * math.sqrt(var_y))


def conditionals(
    joint: JointEdgeDistribution,
) -> tuple[dict[int, dict[int, float]], dict[int, dict[int, float]]]:
    """Conditional endpoint-degree distributions of a random edge.

    Returns (P(check degree | variable degree), P(variable degree | check
    degree)) as nested degree-keyed maps.  Rows cannot have zero mass in
    canonical form, so both families are total.
    """
    y_given_x: dict[int, dict[int, float]] = {x: {} for x in joint.variable_degrees}
    x_given_y: dict[int, dict[int, float]] = {y: {} for y in joint.check_degrees}
    for (x, y), p in joint.entries.items():
        y_given_x[x][y] = p / joint.edge_x.prob(x)
        x_given_y[y][x] = p / joint.edge_y.prob(y)
    return y_given_x, x_given_y


# ---------------------------------------------------------------------------
# Ensemble description files
# ---------------------------------------------------------------------------
#
# Three equivalent JSON forms, probabilities serialized as decimal strings so
# golden files do not depend on binary float formatting:
#   {"joint": [[x, y, "p"], ...]}
#   {"independent": {"edge_x": [[d, "p"], ...], "edge_y": [[d, "p"], ...]}}
#   {"node_x": [[d, "p"], ...], "node_y": [[d, "p"], ...],
#    "block": {"b": int, "q": "q", "pi": [int, ...],
#              "blocks_x": {"deg": block, ...}, "blocks_y": {...}}}


def _pairs_to_map(pairs) -> dict[int, float]:
    return {int(d): float(p) for d, p in pairs}


def ensemble_from_dict(obj: dict) -> JointEdgeDistribution:
    """Build the bivariate edge distribution from a parsed ensemble object."""
    if "joint" in obj:
        return JointEdgeDistribution(
            {(int(x), int(y)): float(p) for x, y, p in obj["joint"]}
        )
    if "independent" in obj:
        ind = obj["independent"]
        return joint_independent(
            EdgeDegreeDistribution(_pairs_to_map(ind["edge_x"])),
            EdgeDegreeDistribution(_pairs_to_map(ind["edge_y"])),
        )
    if "block" in obj:
        blk = obj["block"]
        spec = BlockSpec(
            b=int(blk["b"]),
            q=float(blk["q"]),
            pi=tuple(int(i) for i in blk["pi"]),
            variable_blocks={int(d): int(i) for d, i in blk["blocks_x"].items()},
            check_blocks={int(d): int(i) for d, i in blk["blocks_y"].items()},
        )
        return joint_from_block(
            NodeDegreeDistribution(_pairs_to_map(obj["node_x"])),
            NodeDegreeDistribution(_pairs_to_map(obj["node_y"])),
            spec,
        )
    raise ValueError(
        "ensemble object needs one of 'joint', 'independent' or 'block'"
    )


def load_ensemble(path: str) -> JointEdgeDistribution:
    with open(path) as fh:
        return ensemble_from_dict(json.load(fh))


def ensemble_to_dict(joint: JointEdgeDistribution) -> dict:
    """Serialize as the explicit-joint form with decimal-string probabilities."""
    return {
        "joint": [[x, y, repr(p)] for (x, y), p in joint.entries.items()]
    }


def dump_ensemble(joint: JointEdgeDistribution, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(joint), fh, indent=1)
        fh.write("\n")
