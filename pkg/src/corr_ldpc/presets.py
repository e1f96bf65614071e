"""Built-in ensembles used throughout the tool's reference experiments.

* ``two-degree``: two variable degrees (d and 2d) and two check degrees
  (Gd and 2Gd) with a two-block coupling; the knobs are the coupling
  strength q and the block pairing (2,1) for negative correlation or
  (1,2) for positive.
* ``shokrollahi-storn``: the classic rate-1/2 irregular design with
  variable-side edge degrees {2, 3, 7, 30} and check-side {8, 9}.
* ``ru-ex363``: the rate-1/2 textbook design with variable-side edge
  degrees {2, 3, 11, 20} and check-side {8, 9}.
* ``bazzi``: the rate-1/2 two-by-two family with variable-side edge
  degrees {3, 4} and check-side {7, 8}, parameterized by a.

Marginal digits are given as the published five-decimal strings; the
shokrollahi-storn variable-side digits add up to 0.99997, so every
marginal is normalized to unit mass on load (thresholds move by well
under 1e-4).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .dist import (
    BlockSpec,
    EdgeDegreeDistribution,
    JointEdgeDistribution,
    NodeDegreeDistribution,
    joint_from_block,
    joint_independent,
)
from .opt import MarginalConstraint

PRESET_NAMES = ("two-degree", "shokrollahi-storn", "ru-ex363", "bazzi")


def _normalized_edge(digits: dict[int, str]) -> EdgeDegreeDistribution:
    vals = {d: float(p) for d, p in digits.items()}
    total = math.fsum(vals.values())
    return EdgeDegreeDistribution({d: p / total for d, p in vals.items()})


_SS_X = {2: "0.26328", 3: "0.18020", 7: "0.27000", 30: "0.28649"}
_SS_Y = {8: "0.63407", 9: "0.36593"}
_RU_X = {2: "0.10626", 3: "0.48666", 11: "0.01039", 20: "0.39669"}
_RU_Y = {8: "0.5", 9: "0.5"}
_BAZZI_A = 0.1115


@dataclass(frozen=True)
class TwoDegreePreset:
    """The two-degree block ensemble with its node distributions and template."""

    d: int
    g: int
    p_x: NodeDegreeDistribution
    p_y: NodeDegreeDistribution
    template: BlockSpec

    def joint(self, q: float, pi: tuple[int, int] = (2, 1)) -> JointEdgeDistribution:
        return joint_from_block(
            self.p_x, self.p_y, dataclasses.replace(self.template, q=q, pi=pi)
        )


def two_degree(d: int = 3, g: int = 3, q: float = 0.0,
               pi: tuple[int, int] = (2, 1)) -> TwoDegreePreset:
    """One third of the variable nodes carry degree 2d, the rest degree d."""
    if d < 1 or g < 2:
        raise ValueError("need d >= 1 and an integer rate ratio g >= 2")
    p_x = NodeDegreeDistribution({2 * d: 1.0 / 3.0, d: 2.0 / 3.0})
    p_y = NodeDegreeDistribution({2 * g * d: 1.0 / 3.0, g * d: 2.0 / 3.0})
    template = BlockSpec(
        b=2,
        q=q,
        pi=pi,
        variable_blocks={2 * d: 1, d: 2},
        check_blocks={2 * g * d: 1, g * d: 2},
    )
    return TwoDegreePreset(d=d, g=g, p_x=p_x, p_y=p_y, template=template)


def marginal_presets(name: str, a: float = _BAZZI_A) -> MarginalConstraint:
    """Fixed-marginal families for the named classical designs."""
    if name == "shokrollahi-storn":
        return MarginalConstraint(_normalized_edge(_SS_X), _normalized_edge(_SS_Y))
    if name == "ru-ex363":
        return MarginalConstraint(_normalized_edge(_RU_X), _normalized_edge(_RU_Y))
    if name == "bazzi":
        if not 0.0 < a < 3.0 / 7.0:
            raise ValueError("bazzi parameter a must lie in (0, 3/7)")
        edge_x = EdgeDegreeDistribution({3: a, 4: 1.0 - a})
        edge_y = EdgeDegreeDistribution({7: 7.0 * a / 3.0, 8: 1.0 - 7.0 * a / 3.0})
        return MarginalConstraint(edge_x, edge_y)
    raise ValueError(f"unknown marginal preset {name!r}")


def preset_joint(
    name: str,
    q: float = 0.0,
    pi: tuple[int, int] = (2, 1),
    d: int = 3,
    g: int = 3,
    a: float = _BAZZI_A,
) -> JointEdgeDistribution:
    """The independent (or block-coupled, for two-degree) joint of a preset."""
    if name == "two-degree":
        return two_degree(d=d, g=g).joint(q=q, pi=pi)
    constraint = marginal_presets(name, a=a)
    return joint_independent(constraint.edge_x, constraint.edge_y)
