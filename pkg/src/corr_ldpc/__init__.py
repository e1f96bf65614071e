"""Degree-degree correlated LDPC code ensembles over the binary erasure channel.

Construction of correlated bipartite code graphs, density evolution for
their erasure thresholds, Monte-Carlo peeling-decoder validation, and
fixed-marginal searches for threshold improvements.
"""

from .dist import (
    BlockSpec,
    EdgeDegreeDistribution,
    JointEdgeDistribution,
    NodeDegreeDistribution,
    conditionals,
    dump_ensemble,
    edge_from_node,
    ensemble_from_dict,
    ensemble_to_dict,
    joint_from_block,
    joint_independent,
    load_ensemble,
    node_from_edge,
    pearson_correlation,
)
from .construct import (
    EnsembleSpec,
    InfeasibleRealizationError,
    RealizedCounts,
    TannerGraph,
    empirical_joint,
    realize_counts,
    sample_block,
    sample_general,
    to_alist,
    to_graph_json,
)
from .de import (
    DEState,
    ThresholdResult,
    capacity_upper_bound,
    de_run,
    de_step,
    de_trajectory,
    stability_lower_bound,
    threshold,
    trajectory_csv,
)
from .opt import (
    InfeasibleCellError,
    MarginalConstraint,
    OptimizeResult,
    SweepResult,
    joint_from_free_cells,
    optimize_joint,
    sweep_q,
)
from .presets import marginal_presets, preset_joint, two_degree
from .sim import ErasurePattern, SimResult, erase, monte_carlo, peel, results_csv

__all__ = [
    "BlockSpec",
    "DEState",
    "EdgeDegreeDistribution",
    "EnsembleSpec",
    "ErasurePattern",
    "InfeasibleCellError",
    "InfeasibleRealizationError",
    "JointEdgeDistribution",
    "MarginalConstraint",
    "NodeDegreeDistribution",
    "OptimizeResult",
    "RealizedCounts",
    "SimResult",
    "SweepResult",
    "TannerGraph",
    "ThresholdResult",
    "capacity_upper_bound",
    "conditionals",
    "de_run",
    "de_step",
    "de_trajectory",
    "dump_ensemble",
    "edge_from_node",
    "empirical_joint",
    "ensemble_from_dict",
    "ensemble_to_dict",
    "erase",
    "joint_from_block",
    "joint_from_free_cells",
    "joint_independent",
    "load_ensemble",
    "marginal_presets",
    "monte_carlo",
    "node_from_edge",
    "optimize_joint",
    "pearson_correlation",
    "peel",
    "preset_joint",
    "realize_counts",
    "results_csv",
    "sample_block",
    "sample_general",
    "stability_lower_bound",
    "sweep_q",
    "threshold",
    "to_alist",
    "to_graph_json",
    "trajectory_csv",
    "two_degree",
]

__version__ = "0.1.0"
