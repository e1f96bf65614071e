"""Command-line front end.

Subcommands: analyze (erasure threshold of an ensemble), simulate
(Monte-Carlo peeling decoding), sweep (threshold versus the block-coupling
strength q), optimize (fixed-marginal threshold search), construct (sample
a graph to alist or JSON).  Ensembles come from --preset or from an
ensemble JSON file; every command is deterministic given its flags, and
numeric output uses fixed decimal formats.

Exit codes: 0 success, 2 invalid input, 3 infeasible construction.
CORR_LDPC_THREADS caps worker processes for simulation trials.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import de, dist, presets, sim
from .construct import (
    EnsembleSpec,
    InfeasibleRealizationError,
    sample_block,
    sample_general,
    to_alist,
    to_graph_json,
)
from .opt import MarginalConstraint, optimize_joint, sweep_q


def _worker_cap() -> int:
    try:
        return max(1, int(os.environ.get("CORR_LDPC_THREADS", "1")))
    except ValueError:
        return 1


def _parse_deltas(text: str) -> list[float]:
    """Accept '0.3', '0.1,0.2,0.3', or 'start:stop:step' (endpoints included)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range syntax is start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("step must be positive")
        out = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + step / 2:
                break
            out.append(round(v, 12))
            k += 1
        return out
    return [float(p) for p in text.split(",") if p]


def _parse_pi(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _load_joint(args) -> dist.JointEdgeDistribution:
    if args.ensemble and args.preset:
        raise ValueError("give either --preset or --ensemble, not both")
    if args.ensemble:
        return dist.load_ensemble(args.ensemble)
    if args.preset:
        return presets.preset_joint(
            args.preset,
            q=getattr(args, "q", 0.0),
            pi=_parse_pi(getattr(args, "pi", "2,1")),
            d=getattr(args, "d", 3),
            g=getattr(args, "g", 3),
            a=getattr(args, "a", 0.1115),
        )
    raise ValueError("an ensemble is required: --preset NAME or --ensemble FILE")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_ensemble_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=presets.PRESET_NAMES)
    parser.add_argument("--ensemble", metavar="FILE", help="ensemble JSON file")
    parser.add_argument("--q", type=float, default=0.0,
                        help="coupling strength for the two-degree preset")
    parser.add_argument("--pi", default="2,1",
                        help="block pairing for the two-degree preset (e.g. 2,1)")
    parser.add_argument("--d", type=int, default=3,
                        help="base degree of the two-degree preset")
    parser.add_argument("--g", type=int, default=3,
                        help="rate ratio of the two-degree preset")
    parser.add_argument("--a", type=float, default=0.1115,
                        help="parameter a of the bazzi preset")


def cmd_analyze(args) -> int:
    joint = _load_joint(args)
    result = de.threshold(
        joint,
        precision=args.precision,
        max_iter=args.max_iter,
        epsilon=args.epsilon,
    )
    if args.trajectory:
        delta = args.trajectory_delta
        if delta is None:
            delta = result.delta_star
        with open(args.trajectory, "w") as fh:
            fh.write(de.trajectory_csv(joint, delta, args.trajectory_iters))
    _emit(json.dumps(result.as_dict(), indent=1) + "\n", args.output)
    return 0


def cmd_simulate(args) -> int:
    joint = _load_joint(args)
    spec = EnsembleSpec(joint=joint, n=args.n)
    results = sim.monte_carlo(
        spec,
        deltas=_parse_deltas(args.deltas),
        trials=args.trials,
        seed=args.seed,
        resample_graph_per_trial=not args.fixed_graph,
        workers=_worker_cap(),
    )
    _emit(sim.results_csv(results), args.output)
    return 0


def cmd_sweep(args) -> int:
    if args.preset != "two-degree":
        raise ValueError("sweep applies to the two-degree block preset")
    preset = presets.two_degree(d=args.d, g=args.g, pi=_parse_pi(args.pi))
    steps = round(1.0 / args.q_step)
    grid = [min(1.0, k * args.q_step) for k in range(steps + 1)]
    result = sweep_q(
        preset.p_x,
        preset.p_y,
        preset.template,
        grid,
        precision=args.precision,
        max_iter=args.max_iter,
        epsilon=args.epsilon,
    )
    _emit(result.csv(), args.output)
    return 0


def cmd_optimize(args) -> int:
    if args.marginals:
        with open(args.marginals) as fh:
            obj = json.load(fh)
        constraint = MarginalConstraint(
            dist.EdgeDegreeDistribution({int(d): float(p) for d, p in obj["edge_x"]}),
            dist.EdgeDegreeDistribution({int(d): float(p) for d, p in obj["edge_y"]}),
        )
    elif args.preset:
        constraint = presets.marginal_presets(args.preset, a=args.a)
    else:
        raise ValueError("optimize needs --preset or --marginals FILE")
    outcome = optimize_joint(constraint, budget=args.budget, seed=args.seed)
    _emit(json.dumps(outcome.report(), indent=1) + "\n", args.output)
    return 0


def cmd_construct(args) -> int:
    if args.preset == "two-degree" and args.q > 0:
        preset = presets.two_degree(d=args.d, g=args.g)
        graph = sample_block(
            preset.p_x,
            preset.p_y,
            dataclasses.replace(preset.template, q=args.q, pi=_parse_pi(args.pi)),
            n=args.n,
            seed=args.seed,
        )
    else:
        joint = _load_joint(args)
        graph = sample_general(EnsembleSpec(joint=joint, n=args.n), seed=args.seed)
    if args.format == "alist":
        _emit(to_alist(graph), args.output)
    else:
        _emit(json.dumps(to_graph_json(graph)) + "\n", args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corr-ldpc",
        description=(
            "Degree-degree correlated LDPC ensembles over the binary erasure "
            "channel: thresholds, simulation, sweeps, and searches."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="erasure threshold of an ensemble")
    _add_ensemble_flags(p)
    p.add_argument("--precision", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=de.DEFAULT_MAX_ITER)
    p.add_argument("--epsilon", type=float, default=de.DEFAULT_EPSILON)
    p.add_argument("--trajectory", metavar="FILE",
                   help="also write a per-iteration recursion CSV here")
    p.add_argument("--trajectory-delta", type=float, default=None,
                   help="erasure rate for the trajectory (default: delta_star)")
    p.add_argument("--trajectory-iters", type=int, default=200)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte-Carlo peeling decoding")
    _add_ensemble_flags(p)
    p.add_argument("--n", type=int, default=18_000)
    p.add_argument("--deltas", default="0:0.4:0.02",
                   help="single value, comma list, or start:stop:step")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed-graph", action="store_true",
                   help="reuse one sampled graph for all trials")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="threshold versus the coupling strength q")
    p.add_argument("--preset", default="two-degree",
                   choices=("two-degree",))
    p.add_argument("--pi", default="2,1")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--g", type=int, default=3)
    p.add_argument("--q-step", type=float, default=0.01)
    p.add_argument("--precision", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=de.DEFAULT_MAX_ITER)
    p.add_argument("--epsilon", type=float, default=de.DEFAULT_EPSILON)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="fixed-marginal threshold search")
    p.add_argument("--preset", choices=("shokrollahi-storn", "ru-ex363", "bazzi"))
    p.add_argument("--marginals", metavar="FILE",
                   help='JSON {"edge_x": [[d, p], ...], "edge_y": [[d, p], ...]}')
    p.add_argument("--a", type=float, default=0.1115)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("construct", help="sample a graph and export it")
    _add_ensemble_flags(p)
    p.add_argument("--n", type=int, default=18_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("alist", "json"), default="alist")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=cmd_construct)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleRealizationError as exc:
        print(f"infeasible construction: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
