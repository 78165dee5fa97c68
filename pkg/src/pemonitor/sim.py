"""A small phenomenological idiotypic-network simulator.

Antibody clones carry 12-bit idiotypes; two idiotypes interact when their
Hamming distance reaches ``min_match`` (near-complementary strings). The
dynamics are a discrete-time caricature: antigen-affine clones expand while
antigen is present, anti-idiotypic clones follow them, antigen is cleared in
proportion to the affine volume, and clones that were strongly stimulated
settle on a persistent memory level instead of vanishing. None of the rate
constants come from a calibrated immune model.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .filtration import WeightedGraph


def hamming(a, b, nbits: int | None = None) -> int:
    """Number of differing bit positions of two bit-strings.

    Accepts equal-length ``'0101'`` strings or integers (with ``nbits``).
    """
    if isinstance(a, str) or isinstance(b, str):
        if len(a) != len(b):
            raise ValueError(f"bit-strings differ in length ({len(a)} vs {len(b)})")
        return sum(x != y for x, y in zip(a, b))
    if nbits is not None and (a >> nbits or b >> nbits):
        raise ValueError(f"idiotype wider than {nbits} bits")
    return bin(a ^ b).count("1")


def coexistence_index(d: float, vol_i: float, vol_j: float, total_vol: float) -> float:
    if total_vol <= 0:
        raise ValueError("total volume must be positive")
    return d * (vol_i * vol_j) / total_vol


@dataclass(frozen=True)
class Antibody:
    idiotype: int
    volume: float


def build_coexistence_graph(pop, min_match: int = 11, nbits: int = 12, timestamp: int = 0):
    """Coexistence graph of a population (sequence of :class:`Antibody`).

    Vertices are the indices of clones with positive volume; an edge joins two
    such clones when ``min_match <= hamming <= nbits`` and the index is positive.
    """
    pop = list(pop)
    if not pop:
        raise ValueError("empty population")
    total = sum(ab.volume for ab in pop)
    alive = [i for i, ab in enumerate(pop) if ab.volume > 0]
    if total <= 0:
        return WeightedGraph(frozenset(), {}, timestamp)
    edges = {}
    for x, i in enumerate(alive):
        for j in alive[x + 1 :]:
            d = hamming(pop[i].idiotype, pop[j].idiotype, nbits)
            if min_match <= d <= nbits:
                w = coexistence_index(d, pop[i].volume, pop[j].volume, total)
                if w > 0:
                    edges[(i, j)] = w
    return WeightedGraph(frozenset(alive), edges, timestamp)


@dataclass(frozen=True)
class SimConfig:
    nbits: int = 12
    n_antibodies: int = 64
    ticks: int = 2190
    # None: a first injection at ``first_injection`` and a second one drawn
    # uniformly from the middle third of the run.
    injection_ticks: tuple | None = None
    first_injection: int = 10
    antigen_volume: float = 10.0
    min_match: int = 11
    # fraction of the repertoire drawn near the antigen or its complement
    focus: float = 0.5
    stimulation: float = 0.3
    idiotypic: float = 0.05
    clearance: float = 0.01
    # antigen below this fraction of one dose counts as cleared
    cleared_fraction: float = 0.01
    decay: float = 0.05
    naive_decay: float = 0.15
    contraction: float = 0.5
    memory_boost: float = 2.0
    memory_threshold: float = 0.2
    capacity: float = 50.0
    recruitment: float = 0.05
    noise: float = 0.3
    detection: float = 0.05
    natural_volume: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.min_match <= self.nbits:
            raise ValueError("min_match must lie in (0, nbits]")
        if self.ticks <= 0:
            raise ValueError("ticks must be positive")
        if self.n_antibodies < 1:
            raise ValueError("n_antibodies must be positive")
        if self.injection_ticks is not None:
            object.__setattr__(self, "injection_ticks", tuple(int(t) for t in self.injection_ticks))
            if self.injection_ticks and self.ticks <= max(self.injection_ticks):
                raise ValueError("ticks must exceed every injection tick")
        elif self.ticks <= self.first_injection:
            raise ValueError("ticks must exceed the first injection tick")

    # -- flat key=value files --------------------------------------------

    @classmethod
    def from_mapping(cls, values: dict) -> "SimConfig":
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for key, raw in values.items():
            if key not in kinds:
                raise ValueError(f"unknown config key {key!r}")
            if key == "injection_ticks":
                raw = raw.strip() if isinstance(raw, str) else raw
                if raw in (None, "", "auto", "none"):
                    kw[key] = None
                elif isinstance(raw, str):
                    kw[key] = tuple(int(x) for x in raw.split(",") if x.strip())
                else:
                    kw[key] = tuple(raw)
                continue
            default = getattr(cls, key)
            kw[key] = type(default)(raw) if not isinstance(raw, type(default)) else raw
        return cls(**kw)

    @classmethod
    def read(cls, path) -> "SimConfig":
        values = {}
        with open(path) as fh:
            for n, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"line {n}: expected key=value")
                k, v = line.split("=", 1)
                values[k.strip()] = v.strip()
        return cls.from_mapping(values)

    def dumps(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "injection_ticks":
                v = "auto" if v is None else ",".join(map(str, v))
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"


@dataclass
class Simulation:
    """Result of :func:`simulate`: repertoire plus per-tick volumes."""

    config: SimConfig
    idiotypes: np.ndarray
    antigen: int
    injections: tuple
    volumes: np.ndarray  # row k is tick k + 1; detection applied
    antigen_load: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.volumes)

    def population(self, tick: int) -> list:
        row = self.volumes[tick - 1]
        return [Antibody(int(x), float(v)) for x, v in zip(self.idiotypes, row)]

    def snapshots(self):
        """``(tick, population)`` pairs for ticks ``1..ticks``."""
        for t in range(1, len(self.volumes) + 1):
            yield t, self.population(t)

    def graphs(self):
        aff = self._affinity()
        d = self._distances()
        for t in range(len(self.volumes)):
            yield _graph_from_volumes(self.volumes[t], aff, d, t + 1)

    def _distances(self):
        x = self.idiotypes
        return _popcount(x[:, None] ^ x[None, :])

    def _affinity(self):
        d = self._distances()
        return (d >= self.config.min_match) & (d <= self.config.nbits)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    out = np.zeros_like(a)
    while a.any():
        out += a & 1
        a = a >> 1
    return out


def _graph_from_volumes(vol, aff, dist, t):
    alive = np.flatnonzero(vol > 0)
    total = float(vol.sum())
    if total <= 0:
        return WeightedGraph(frozenset(), {}, t)
    sub = aff[np.ix_(alive, alive)]
    iu, ju = np.nonzero(np.triu(sub, 1))
    edges = {}
    for a, b in zip(iu, ju):
        i, j = int(alive[a]), int(alive[b])
        w = dist[i, j] * (vol[i] * vol[j]) / total
        if w > 0:
            edges[(i, j)] = float(w)
    return WeightedGraph(frozenset(int(i) for i in alive), edges, t)


def _neighbourhood(centre: int, nbits: int) -> list:
    return [centre] + [centre ^ (1 << b) for b in range(nbits)]


def sample_repertoire(cfg: SimConfig, rng: np.random.Generator):
    """Antigen idiotype and ``n_antibodies`` distinct clone idiotypes.

    Clone 0 is a natural antibody unrelated to the antigen; a ``focus``
    fraction of the rest is drawn from the one-bit neighbourhoods of the
    antigen and of its complement, the remainder uniformly.
    """
    space = 1 << cfg.nbits
    mask = space - 1
    antigen = int(rng.integers(space))
    near = _neighbourhood(antigen, cfg.nbits) + _neighbourhood(antigen ^ mask, cfg.nbits)
    near_set = set(near)
    far = [x for x in range(space) if x not in near_set]
    chosen = [int(far[rng.integers(len(far))])]
    taken = set(chosen)
    near_pool = [x for x in rng.permutation(near).tolist() if x not in taken]
    while len(chosen) < min(cfg.n_antibodies, space):
        if near_pool and rng.random() < cfg.focus:
            x = near_pool.pop()
        else:
            x = int(rng.integers(space))
        if x not in taken:
            taken.add(x)
            chosen.append(x)
            if x in near_pool:
                near_pool.remove(x)
    return antigen, np.array(chosen, dtype=np.int64)


def simulate(cfg: SimConfig = SimConfig()) -> Simulation:
    rng = np.random.default_rng(cfg.seed)
    antigen, ids = sample_repertoire(cfg, rng)
    n = len(ids)
    if cfg.injection_ticks is None:
        lo, hi = cfg.ticks // 3, (2 * cfg.ticks) // 3
        second = int(rng.integers(lo, max(hi, lo + 1)))
        injections = tuple(sorted({cfg.first_injection, second}))
    else:
        injections = tuple(cfg.injection_ticks)

    d = _popcount(ids[:, None] ^ ids[None, :])
    aff = ((d >= cfg.min_match) & (d <= cfg.nbits)).astype(float)
    ag_aff = (_popcount(ids ^ antigen) >= cfg.min_match).astype(float)
    ag_aff[0] = 0.0
    quality = rng.uniform(0.5, 1.5, n)

    v = np.zeros(n)
    v[0] = cfg.natural_volume
    memory = np.zeros(n)
    memory[0] = cfg.natural_volume
    a = 0.0
    inject = {}
    for t in injections:
        inject[t] = inject.get(t, 0) + 1
    volumes = np.empty((cfg.ticks, n))
    load = np.empty(cfg.ticks)
    half = cfg.antigen_volume / 2
    for t in range(cfg.ticks):
        a += cfg.antigen_volume * inject.get(t + 1, 0)
        if a > 0:
            act = a / (a + half)
            drive = cfg.stimulation * ag_aff * (v + cfg.recruitment)
            drive += cfg.idiotypic * (aff @ v) * (ag_aff == 0)
            v = v + act * drive * np.clip(1.0 - v / cfg.capacity, 0.0, None)
            a = max(0.0, a - cfg.clearance * a * float(ag_aff @ v))
            if a < cfg.cleared_fraction * cfg.antigen_volume:
                a = 0.0
        promoted = (v >= cfg.memory_threshold) & (ag_aff > 0)
        memory = np.where(promoted, np.maximum(memory, cfg.memory_boost * quality), memory)
        rate = np.where(memory > 0, cfg.decay, cfg.naive_decay if a > 0 else cfg.contraction)
        v = memory + (v - memory) * (1.0 - rate)
        # fluctuations scale with the excess over the memory level
        excess = np.clip((v - memory) / np.maximum(v, 1e-12), 0.0, 1.0)
        v = np.maximum(v * np.exp(cfg.noise * excess * rng.standard_normal(n)), 0.0)
        if a == 0:
            # without antigen nothing recruits, so clones below detection are lost
            v = np.where(v >= cfg.detection, v, 0.0)
        v[0] = cfg.natural_volume
        volumes[t] = np.where(v >= cfg.detection, v, 0.0)
        load[t] = a
    return Simulation(cfg, ids, antigen, injections, volumes, load)
