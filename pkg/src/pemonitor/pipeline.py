"""Glue between the stages: graphs to PETs, simulations to traces."""

from __future__ import annotations

import dataclasses
import warnings

from .entropy import PET, UndefinedEntropyError, VertexCountWarning, persistent_entropy
from .filtration import WeightedGraph, build_clique_filtration, edge_filter_values
from .monitor import MPEA, batch_statistics, label_execution
from .pea import PEA, idiotypic_pea
from .pelts import execute
from .persistence import compute_persistence, truncate_barcode
from .sim import SimConfig, simulate


class EmptyGraphError(ValueError):
    def __init__(self, timestamp):
        super().__init__(f"empty graph at t={timestamp}")
        self.timestamp = timestamp


def graph_barcode(g: WeightedGraph, max_dim: int = 1, order: str = "descending-rank"):
    """Truncated barcode of the clique filtration of ``g``."""
    if not g.vertices:
        raise EmptyGraphError(g.timestamp)
    f = build_clique_filtration(g, max_dim, order)
    return truncate_barcode(compute_persistence(f, max_dim))


def graph_entropy(
    g: WeightedGraph, max_dim: int = 1, order: str = "descending-rank", dim: int | None = None
) -> float:
    try:
        return persistent_entropy(graph_barcode(g, max_dim, order), dim=dim)
    except UndefinedEntropyError:
        raise UndefinedEntropyError(timestamp=g.timestamp) from None


def _signature(g: WeightedGraph, order: str):
    # The filtration depends on the weights only through their filter values.
    values = edge_filter_values(g, order)
    return tuple(sorted(g.vertices)), tuple(sorted(values.items()))


def _entropies(graphs, max_dim, order, dim):
    cache: dict = {}
    out = []
    for g in graphs:
        if not g.vertices:
            raise EmptyGraphError(g.timestamp)
        key = _signature(g, order)
        h = cache.get(key)
        if h is None:
            h = cache[key] = graph_entropy(g, max_dim, order, dim)
        out.append(h)
    return out


def graphs_to_pet(
    graphs,
    max_dim: int = 1,
    order: str = "descending-rank",
    dim: int | None = None,
    jobs: int = 1,
    warn_vertex_changes: bool = False,
) -> PET:
    """One entropy observation per graph, stamped with the graph's timestamp."""
    graphs = list(graphs)
    if jobs > 1 and len(graphs) > 1:
        from joblib import Parallel, delayed

        chunk = -(-len(graphs) // jobs)
        parts = Parallel(n_jobs=jobs)(
            delayed(_entropies)(graphs[i : i + chunk], max_dim, order, dim)
            for i in range(0, len(graphs), chunk)
        )
        values = [h for part in parts for h in part]
    else:
        values = _entropies(graphs, max_dim, order, dim)
    if warn_vertex_changes:
        for prev, cur in zip(graphs, graphs[1:]):
            if len(prev.vertices) != len(cur.vertices):
                warnings.warn(
                    f"vertex count changes at t={cur.timestamp}", VertexCountWarning, stacklevel=2
                )
    return PET(tuple(g.timestamp for g in graphs), tuple(values))


def simulation_pet(cfg: SimConfig, **kw) -> PET:
    return graphs_to_pet(simulate(cfg).graphs(), **kw)


def idiotypic_monitor() -> MPEA:
    return MPEA.by_state_name(idiotypic_pea())


def simulate_trace(cfg: SimConfig, monitor: MPEA | None = None):
    monitor = monitor or idiotypic_monitor()
    return label_execution(execute(monitor.pea, simulation_pet(cfg)), monitor)


def _batch_worker(cfg, seeds, pea_dict):
    monitor = MPEA.by_state_name(PEA.from_dict(pea_dict))
    return [
        simulate_trace(dataclasses.replace(cfg, seed=s), monitor).symbols()
        for s in seeds
    ]


def run_batch(cfg: SimConfig, seeds, pea: PEA | None = None, jobs: int = 1) -> list:
    """Simulate every seed and return the symbol strings of the MPEA traces."""
    seeds = list(seeds)
    pea_dict = (pea or idiotypic_pea()).to_dict()
    if jobs <= 1:
        return _batch_worker(cfg, seeds, pea_dict)
    from joblib import Parallel, delayed

    chunk = -(-len(seeds) // (jobs * 4))
    parts = Parallel(n_jobs=jobs)(
        delayed(_batch_worker)(cfg, seeds[i : i + chunk], pea_dict)
        for i in range(0, len(seeds), chunk)
    )
    return [s for part in parts for s in part]


def batch_report(traces) -> dict:
    stats = batch_statistics(traces)
    return {**stats, "total": sum(stats.values())}

