"""Persistent homology over Z/2 by boundary-matrix column reduction."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from itertools import combinations

from .filtration import Filtration

INF = math.inf


@dataclass(frozen=True)
class Interval:
    dim: int
    birth: float
    death: float = INF
    generator: tuple | None = field(default=None, compare=False)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.death)

    @property
    def length(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    intervals: tuple
    t_max: float

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def in_dim(self, dim: int) -> list:
        return [iv for iv in self.intervals if iv.dim == dim]

    def multiset(self) -> list:
        """Sorted ``(dim, birth, death)`` triples, handy for comparisons."""
        return sorted((iv.dim, iv.birth, iv.death) for iv in self.intervals)


def reduce_boundary(filtration: Filtration):
    """Column-reduce the boundary matrix of ``filtration``.

    Columns are Python ints used as Z/2 bit vectors, bit ``i`` standing for
    the ``i``-th simplex. Returns ``(pairs, unpaired, cycles)`` where
    ``pairs`` maps a death index to its birth index and ``cycles`` holds the
    reduced chain (as a bitset) recorded for every zero column.
    """
    simplices = filtration.simplices
    index = {s.vertices: i for i, s in enumerate(simplices)}
    pivot_owner: dict[int, int] = {}
    pairs: dict[int, int] = {}
    chains: dict[int, int] = {}
    for j, s in enumerate(simplices):
        col = 0
        if s.dim > 0:
            for face in combinations(s.vertices, len(s.vertices) - 1):
                i = index.get(face)
                if i is None or i >= j or simplices[i].filter_value > s.filter_value:
                    raise ValueError("invalid filtration")
                col ^= 1 << i
        chain = 1 << j
        while col:
            low = col.bit_length() - 1
            other = pivot_owner.get(low)
            if other is None:
                break
            col ^= chains[other][0]
            chain ^= chains[other][1]
        chains[j] = (col, chain)
        if col:
            low = col.bit_length() - 1
            pivot_owner[low] = j
            pairs[j] = low
    births = set(pairs.values())
    unpaired = [j for j in range(len(simplices)) if j not in births and j not in pairs]
    cycles = {j: chains[j][1] for j in unpaired}
    return pairs, unpaired, cycles


def _bits(x: int) -> list:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def compute_persistence(filtration: Filtration, max_hom_dim: int | None = None) -> Barcode:
    """Barcode of ``filtration`` in dimensions ``0..max_hom_dim``.

    Zero-length pairs are dropped. Infinite intervals carry a generator: the
    vertex for dimension 0, the simplices of a representative cycle otherwise.
    """
    if max_hom_dim is None:
        max_hom_dim = filtration.hom_dim if filtration.hom_dim is not None else max(filtration.max_dim, 0)
    simplices = filtration.simplices
    pairs, unpaired, cycles = reduce_boundary(filtration)
    intervals = []
    for death_idx, birth_idx in pairs.items():
        birth, death = simplices[birth_idx], simplices[death_idx]
        if birth.dim <= max_hom_dim and death.filter_value > birth.filter_value:
            intervals.append(Interval(birth.dim, birth.filter_value, death.filter_value))
    for j in unpaired:
        s = simplices[j]
        if s.dim > max_hom_dim:
            continue
        gen = tuple(simplices[i].vertices for i in _bits(cycles[j]))
        intervals.append(Interval(s.dim, s.filter_value, INF, gen))
    intervals.sort(key=lambda iv: (iv.dim, iv.birth, iv.death))
    return Barcode(tuple(intervals), filtration.t_max)


def truncate_barcode(barcode: Barcode) -> Barcode:
    """Replace every ``[x, inf)`` by ``[x, t_max + 1)``."""
    m = barcode.t_max + 1
    return Barcode(
        tuple(replace(iv, death=m) if iv.is_infinite else iv for iv in barcode.intervals),
        barcode.t_max,
    )


def betti_at(barcode: Barcode, dim: int, t: float) -> int:
    return sum(1 for iv in barcode.intervals if iv.dim == dim and iv.birth <= t < iv.death)


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def format_barcode(barcode: Barcode, mode: str = "text") -> str:
    """Render a barcode as ``dim birth death [generator]`` lines or as CSV."""
    buf = io.StringIO()
    if mode == "csv":
        buf.write("dim,birth,death\n")
        for iv in barcode.intervals:
            buf.write(f"{iv.dim},{_fmt(iv.birth)},{_fmt(iv.death)}\n")
    elif mode == "text":
        for iv in barcode.intervals:
            line = f"{iv.dim} {_fmt(iv.birth)} {_fmt(iv.death)}"
            if iv.generator:
                line += " " + " ".join("[" + ",".join(map(str, s)) + "]" for s in iv.generator)
            buf.write(line + "\n")
    else:
        raise ValueError(f"unknown barcode format {mode!r}")
    return buf.getvalue()


def parse_barcode(text: str, t_max: float) -> Barcode:
    """Inverse of :func:`format_barcode` for either mode (generators are dropped)."""
    intervals = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == "dim,birth,death":
            continue
        parts = line.replace(",", " ", 2).split() if "," in line and "[" not in line else line.split()
        dim, birth, death = int(parts[0]), float(parts[1]), float(parts[2])
        intervals.append(Interval(dim, birth, death))
    return Barcode(tuple(intervals), t_max)
