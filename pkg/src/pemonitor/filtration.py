"""Weighted graphs and their clique (flag) filtrations."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, TextIO

ORDERS = ("descending-rank", "ascending-rank", "raw-weight")


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph observed at one time tick.

    ``edges`` maps a sorted vertex pair ``(u, v)`` to a strictly positive weight.
    """

    vertices: frozenset
    edges: dict = field(default_factory=dict)
    timestamp: int = 0

    def __post_init__(self):
        vertices = frozenset(int(v) for v in self.vertices)
        edges = {}
        for key, w in self.edges.items():
            u, v = int(key[0]), int(key[1])
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            pair = (u, v) if u < v else (v, u)
            if pair in edges:
                raise ValueError(f"duplicate edge {pair}")
            w = float(w)
            if not (math.isfinite(w) and w > 0):
                raise ValueError(f"edge {pair} has non-positive or non-finite weight {w}")
            if u not in vertices or v not in vertices:
                raise ValueError(f"edge {pair} references an unknown vertex")
            edges[pair] = w
        if any(v < 0 for v in vertices):
            raise ValueError("vertex ids must be non-negative")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Iterable = (), timestamp: int = 0):
        """Build a graph from ``(u, v, w)`` triples; endpoints are added as vertices."""
        vs = set(vertices)
        emap = {}
        for u, v, w in edges:
            vs.update((u, v))
            pair = (u, v) if u < v else (v, u)
            if pair in emap:
                raise ValueError(f"duplicate edge {pair}")
            emap[pair] = w
        return cls(frozenset(vs), emap, timestamp)

    def neighbours(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True, order=True)
class Simplex:
    filter_value: float
    vertices: tuple

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class Filtration:
    """Simplices in filtration order: (filter value, dimension, vertices)."""

    simplices: tuple
    t_max: float
    # homology dimensions the clique construction is complete for
    hom_dim: int | None = None

    def __len__(self):
        return len(self.simplices)

    def __iter__(self) -> Iterator[Simplex]:
        return iter(self.simplices)

    @property
    def max_dim(self) -> int:
        return max((s.dim for s in self.simplices), default=-1)

    def is_valid(self) -> bool:
        """Check face closure and that every face precedes its cofaces."""
        position = {}
        for i, s in enumerate(self.simplices):
            if list(s.vertices) != sorted(set(s.vertices)):
                return False
            if s.vertices in position:
                return False
            if s.dim > 0:
                for face in combinations(s.vertices, len(s.vertices) - 1):
                    j = position.get(face)
                    if j is None or self.simplices[j].filter_value > s.filter_value:
                        return False
            position[s.vertices] = i
        return True


def enumerate_cliques(g: WeightedGraph, k: int) -> set:
    """All k-cliques of ``g`` as sorted vertex tuples."""
    if k < 1:
        raise ValueError("k must be positive")
    adj = g.neighbours()
    out = set()

    def extend(clique, candidates):
        if len(clique) == k:
            out.add(tuple(clique))
            return
        for v in sorted(candidates):
            if clique and v < clique[-1]:
                continue
            extend(clique + [v], candidates & adj[v])

    extend([], set(g.vertices))
    return out


def edge_filter_values(g: WeightedGraph, order: str = "descending-rank") -> dict:
    """Filter value of every edge under the requested weight ordering.

    Rank orders use the 1-based rank of the edge weight among the distinct weights.
    """
    if order not in ORDERS:
        raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")
    if order == "raw-weight":
        return dict(g.edges)
    distinct = sorted(set(g.edges.values()), reverse=(order == "descending-rank"))
    rank = {w: i + 1 for i, w in enumerate(distinct)}
    return {e: float(rank[w]) for e, w in g.edges.items()}


def build_clique_filtration(
    g: WeightedGraph, max_dim: int = 1, order: str = "descending-rank"
) -> Filtration:
    """Flag-complex filtration of ``g`` with cliques up to ``max_dim + 2`` vertices.

    Vertices enter at 0, edges at their (rank) filter value and each higher
    clique at the largest filter value among its edges.
    """
    if not g.vertices:
        raise ValueError("empty graph")
    if max_dim not in (1, 2):
        raise ValueError("unsupported dimension")
    values = edge_filter_values(g, order)
    simplices = [Simplex(0.0, (v,)) for v in g.vertices]
    simplices += [Simplex(fv, e) for e, fv in values.items()]
    for k in range(3, max_dim + 3):
        for clique in enumerate_cliques(g, k):
            fv = max(values[e] for e in combinations(clique, 2))
            simplices.append(Simplex(fv, clique))
    simplices.sort(key=lambda s: (s.filter_value, len(s.vertices), s.vertices))
    t_max = max((s.filter_value for s in simplices), default=0.0)
    return Filtration(tuple(simplices), t_max, max_dim)


# -- graph snapshot files -------------------------------------------------

def read_graphs(source) -> list:
    """Read a snapshot CSV (``time,u,v,weight``) into graphs ordered by time.

    Comment lines ``#vertices: 0,1,...`` declare isolated vertices; a line
    ``#vertices@T: ...`` scopes the declaration to tick ``T``.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return _read_graphs(fh)
    return _read_graphs(source)


def _read_graphs(fh: TextIO) -> list:
    global_vertices: set = set()
    scoped: dict = {}
    rows = []
    for line in fh:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            head, _, tail = stripped[1:].partition(":")
            head = head.strip()
            ids = {int(x) for x in tail.replace(" ", "").split(",") if x}
            if head == "vertices":
                global_vertices |= ids
            elif head.startswith("vertices@"):
                scoped.setdefault(int(head.split("@", 1)[1]), set()).update(ids)
            continue
        rows.append(stripped)
    if not rows or rows[0].replace(" ", "") != "time,u,v,weight":
        raise ValueError("graph file must start with header 'time,u,v,weight'")
    by_time: dict = {t: [] for t in scoped}
    for rec in csv.reader(rows[1:]):
        t, u, v, w = int(rec[0]), int(rec[1]), int(rec[2]), float(rec[3])
        by_time.setdefault(t, []).append((u, v, w))
    graphs = []
    for t in sorted(by_time):
        vs = global_vertices | scoped.get(t, set())
        graphs.append(WeightedGraph.from_edges(by_time[t], vs, timestamp=t))
    return graphs


def write_graphs(graphs: Iterable[WeightedGraph], dest=None) -> str:
    """Serialise graphs to the snapshot CSV format; returns the text."""
    buf = io.StringIO()
    buf.write("time,u,v,weight\n")
    for g in graphs:
        isolated = sorted(g.vertices - {x for e in g.edges for x in e})
        if isolated or not g.edges:
            buf.write(f"#vertices@{g.timestamp}: {','.join(map(str, isolated))}\n")
        for (u, v), w in sorted(g.edges.items()):
            buf.write(f"{g.timestamp},{u},{v},{w!r}\n")
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return text
