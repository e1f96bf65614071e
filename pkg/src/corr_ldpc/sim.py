"""Monte-Carlo peeling-decoder validation over the erasure channel.

Decoding operates on the all-zeros codeword (linear-code symmetry makes
erasure performance codeword independent), so a trial is: erase each
variable independently with probability delta, then repeatedly resolve
any check with exactly one remaining erased neighbor until none is left.
Parallel edges count separately toward a check's residual degree, so a
doubly-connected erased neighbor never looks resolvable through that
check.

Trials are independent; each derives its own generator from
(seed, trial index) via numpy's SeedSequence, so results do not depend on
scheduling and a fixed seed reproduces the whole experiment.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .construct import EnsembleSpec, TannerGraph, _sample_general_rng, realize_counts


@dataclass(frozen=True)
class ErasurePattern:
    """Set of erased variable indices for one channel use."""

    n: int
    erased: frozenset[int]

    def __post_init__(self):
        if any(i < 0 or i >= self.n for i in self.erased):
            raise ValueError("erased index out of range")

    @property
    def count(self) -> int:
        return len(self.erased)


@dataclass(frozen=True)
class SimResult:
    """Decoded-fraction statistics at one erasure probability."""

    delta: float
    trials: int
    decoded_fraction_mean: float
    decoded_fraction_std: float
    decoded_fraction_by_degree: dict[int, float]
    per_trial: tuple[float, ...] | None = None


def erase(n: int, delta: float, seed: int) -> ErasurePattern:
    """Erase each of n positions independently with probability delta."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    mask = rng.random(n) < delta
    return ErasurePattern(n=n, erased=frozenset(np.flatnonzero(mask).tolist()))


def _erase_mask(rng: np.random.Generator, n: int, delta: float) -> np.ndarray:
    return rng.random(n) < delta


def peel(graph: TannerGraph, pattern: ErasurePattern) -> set[int]:
    """Run the peeling decoder; returns the recovered variable indices.

    The result is the unique maximal recoverable set: processing order
    cannot matter because resolving one check never disables another
    (it only lowers residual degrees).
    """
    mask = np.zeros(graph.n, dtype=bool)
    if pattern.n != graph.n:
        raise ValueError("pattern size does not match graph")
    mask[list(pattern.erased)] = True
    return set(np.flatnonzero(_peel_mask(graph, mask)).tolist())


def _peel_mask(graph: TannerGraph, erased: np.ndarray) -> np.ndarray:
    """Boolean-mask core of the decoder; returns the recovered mask."""
    edges = graph.edges
    m = graph.m
    # residual degree of each check and the index sum of its erased
    # neighbors; at residual degree 1 the sum IS the neighbor
    live = erased[edges[:, 0]]
    resid = np.bincount(edges[live, 1], minlength=m)
    vsum = np.bincount(edges[live, 1], weights=edges[live, 0], minlength=m).astype(
        np.int64
    )
    # CSR over variables for the release step
    order = np.argsort(edges[:, 0], kind="stable")
    nbr = edges[order, 1]
    starts = np.zeros(graph.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(edges[:, 0], minlength=graph.n), out=starts[1:])

    recovered = np.zeros(graph.n, dtype=bool)
    stack = list(np.flatnonzero(resid == 1))
    while stack:
        c = stack.pop()
        if resid[c] != 1:
            continue
        v = int(vsum[c])
        recovered[v] = True
        for c2 in nbr[starts[v] : starts[v + 1]]:
            resid[c2] -= 1
            vsum[c2] -= v
            if resid[c2] == 1:
                stack.append(c2)
    return recovered


def _decoded_stats(
    graph: TannerGraph, erased: np.ndarray, recovered: np.ndarray
) -> tuple[float, dict[int, float]]:
    """Overall and per-degree decoded fractions (unerased bits count as decoded)."""
    failed = erased & ~recovered
    frac = 1.0 - failed.sum() / graph.n
    by_degree = {}
    degs = np.unique(graph.variable_degrees)
    for d in degs:
        sel = graph.variable_degrees == d
        by_degree[int(d)] = 1.0 - failed[sel].sum() / sel.sum()
    return float(frac), by_degree


def _run_trial(args) -> tuple[float, dict[int, float]]:
    counts, delta, seed, trial, fresh_graph = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, trial))))
    if not fresh_graph:
        graph_rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((seed, 0)))
        )
        graph = _sample_general_rng(counts, graph_rng)
    else:
        graph = _sample_general_rng(counts, rng)
    erased = _erase_mask(rng, graph.n, delta)
    recovered = _peel_mask(graph, erased)
    return _decoded_stats(graph, erased, recovered)


def monte_carlo(
    spec: EnsembleSpec,
    deltas: list[float],
    trials: int,
    seed: int,
    resample_graph_per_trial: bool = True,
    keep_trials: bool = False,
    workers: int = 1,
) -> list[SimResult]:
    """Average decoded fractions over independent trials per erasure rate.

    By default every trial samples a fresh graph; with
    resample_graph_per_trial=False one graph (from (seed, 0)) is reused
    and only the erasures vary.  Workers above 1 fan trials out to
    processes; the per-trial streams make the output identical either way.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = realize_counts(spec)
    results = []
    for delta in deltas:
        if not 0.0 <= delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        jobs = [
            (counts, float(delta), int(seed), t, resample_graph_per_trial)
            for t in range(trials)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_run_trial, jobs, chunksize=4))
        else:
            outcomes = [_run_trial(job) for job in jobs]
        fracs = np.array([f for f, _ in outcomes])
        degs = sorted(outcomes[0][1])
        by_deg = {
            d: float(np.mean([bd[d] for _, bd in outcomes])) for d in degs
        }
        results.append(
            SimResult(
                delta=float(delta),
                trials=trials,
                decoded_fraction_mean=float(fracs.mean()),
                decoded_fraction_std=float(fracs.std(ddof=1)) if trials > 1 else 0.0,
                decoded_fraction_by_degree=by_deg,
                per_trial=tuple(fracs.tolist()) if keep_trials else None,
            )
        )
    return results


def results_csv(results: list[SimResult]) -> str:
    """CSV with one row per erasure rate, per-degree columns appended."""
    degs = sorted({d for r in results for d in r.decoded_fraction_by_degree})
    header = ["delta", "trials", "gamma_mean", "gamma_std"] + [
        f"gamma_deg_{d}" for d in degs
    ]
    lines = [",".join(header)]
    for r in sorted(results, key=lambda r: r.delta):
        row = [
            f"{r.delta:.6f}",
            str(r.trials),
            f"{r.decoded_fraction_mean:.6f}",
            f"{r.decoded_fraction_std:.6f}",
        ]
        row += [
            f"{r.decoded_fraction_by_degree.get(d, float('nan')):.6f}" for d in degs
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
