"""Persistent Entropy Automata and their data-driven mining from a PET."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .conditions import DEFAULT_EPS_EQ, EquilibriumCondition, parse_condition
from .entropy import PET

DEFAULT_MIN_LEN = 5
DEFAULT_EPS_DERIV_FRACTION = 1e-6
DEFAULT_LEVEL_TOL_FRACTION = 0.05


class NoSteadyBehaviourError(ValueError):
    def __init__(self):
        super().__init__("no steady behaviour found")


@dataclass(frozen=True)
class Transition:
    source: str
    label: str
    target: str


@dataclass
class PEA:
    """Steady states with equilibrium conditions and labelled transitions.

    ``states`` keeps insertion order; ``transitions`` keeps declaration order,
    which the PELTS engine uses to resolve non-determinism.
    """

    states: dict
    initial: str
    transitions: list = field(default_factory=list)

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial!r} is not a state")
        for tr in self.transitions:
            for end in (tr.source, tr.target):
                if end not in self.states:
                    raise ValueError(f"transition {tr} references unknown state {end!r}")

    @property
    def labels(self) -> list:
        return list(dict.fromkeys(tr.label for tr in self.transitions))

    def successors(self, state: str) -> list:
        return [tr for tr in self.transitions if tr.source == state]

    def condition(self, state: str) -> EquilibriumCondition:
        return self.states[state]

    def edge_set(self) -> set:
        return {(tr.source, tr.target) for tr in self.transitions}

    def add_transition(self, source: str, target: str, label: str | None = None) -> Transition:
        """Append ``source -> target`` unless already present; returns the transition."""
        for tr in self.transitions:
            if tr.source == source and tr.target == target and label in (None, tr.label):
                return tr
        if label is None:
            label = _fresh_label(self.transitions)
        tr = Transition(source, label, target)
        self.transitions.append(tr)
        self.__post_init__()
        return tr

    def rename(self, mapping: dict) -> "PEA":
        ren = lambda s: mapping.get(s, s)  # noqa: E731
        return PEA(
            {ren(s): c for s, c in self.states.items()},
            ren(self.initial),
            [Transition(ren(t.source), t.label, ren(t.target)) for t in self.transitions],
        )

    # -- JSON ---------------------------------------------------------

    def to_dict(self) -> dict:
        eps = {c.eps_eq for c in self.states.values()}
        d = {
            "states": [{"name": s, "condition": str(c)} for s, c in self.states.items()],
            "initial": self.initial,
            "transitions": [
                {"from": t.source, "label": t.label, "to": t.target} for t in self.transitions
            ],
        }
        if eps != {DEFAULT_EPS_EQ}:
            d["eps_eq"] = eps.pop() if len(eps) == 1 else DEFAULT_EPS_EQ
        return d

    def to_json(self, dest=None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if dest is not None:
            with open(dest, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "PEA":
        eps = float(d.get("eps_eq", DEFAULT_EPS_EQ))
        states = {s["name"]: parse_condition(s["condition"], eps) for s in d["states"]}
        transitions = [Transition(t["from"], t["label"], t["to"]) for t in d.get("transitions", [])]
        return cls(states, d["initial"], transitions)

    @classmethod
    def from_json(cls, source) -> "PEA":
        if hasattr(source, "read"):
            return cls.from_dict(json.load(source))
        with open(source) as fh:
            return cls.from_dict(json.load(fh))


def _fresh_label(transitions) -> str:
    used = {t.label for t in transitions}
    k = 0
    while f"t{k}" in used:
        k += 1
    return f"t{k}"


def idiotypic_pea() -> PEA:
    """The hand-derived immune-network automaton: virgin and memory with self-loops."""
    return PEA.from_dict(
        {
            "states": [
                {"name": "virgin", "condition": "H = 0 and dH = 0"},
                {"name": "memory", "condition": "H > 0 and dH = 0"},
            ],
            "initial": "virgin",
            "transitions": [
                {"from": "virgin", "label": "t0", "to": "memory"},
                {"from": "memory", "label": "t1", "to": "memory"},
                {"from": "virgin", "label": "t2", "to": "virgin"},
            ],
        }
    )


# -- mining ---------------------------------------------------------------

@dataclass(frozen=True)
class SteadySegment:
    start: int
    end: int  # inclusive
    level: float

    def __len__(self):
        return self.end - self.start + 1


def default_eps_deriv(pet: PET) -> float:
    return DEFAULT_EPS_DERIV_FRACTION * max(pet.values, default=0.0)


def default_level_tol(pet: PET) -> float:
    return DEFAULT_LEVEL_TOL_FRACTION * max(pet.values, default=0.0)


def detect_steady_segments(
    pet: PET, eps_deriv: float | None = None, min_len: int = DEFAULT_MIN_LEN
) -> list:
    """Maximal runs of observations joined by steps with ``|dH| <= eps_deriv``.

    A run needs at least ``min_len`` observations. The observation at index
    ``k`` is reached from ``k - 1`` (or from the ``(0, 0)`` baseline for
    ``k = 0``); a run only constrains the steps between its own members.
    """
    if min_len < 1:
        raise ValueError("min_len must be positive")
    if eps_deriv is None:
        eps_deriv = default_eps_deriv(pet)
    t, h = pet.times, pet.values
    n = len(t)
    segments = []
    start = 0
    for k in range(1, n + 1):
        flat = k < n and abs((h[k] - h[k - 1]) / (t[k] - t[k - 1])) <= eps_deriv
        if not flat:
            if k - start >= min_len:
                members = h[start:k]
                segments.append(SteadySegment(start, k - 1, sum(members) / len(members)))
            start = k
    return segments


@dataclass(frozen=True)
class TransientPeak:
    start: int
    end: int  # inclusive
    height: float

    @property
    def width(self) -> int:
        return self.end - self.start + 1


def transient_peaks(pet: PET, segments, level_tol: float | None = None) -> list:
    """Excursions between consecutive steady segments that rise above the
    terminal plateau by more than ``level_tol``.

    Counting excursions rather than raw local maxima keeps small ripples on a
    ramp from showing up as separate peaks.
    """
    segments = list(segments)
    if not segments:
        return []
    if level_tol is None:
        level_tol = default_level_tol(pet)
    floor = segments[-1].level + level_tol
    peaks = []
    for a, b in zip(segments, segments[1:]):
        if b.start - a.end < 2:
            continue
        gap = pet.values[a.end + 1 : b.start]
        top = max(gap)
        if top > floor:
            peaks.append(TransientPeak(a.end + 1, b.start - 1, top))
    return peaks


def mine_pea(
    segments,
    level_tol: float,
    pet: PET | None = None,
    eps_deriv: float = 0.0,
    eps_eq: float = DEFAULT_EPS_EQ,
    names: list | None = None,
) -> PEA:
    """Cluster steady segments by level into states and link consecutive ones.

    Passing the source ``pet`` widens each state's H band to cover every
    observation of its segments, so mined conditions always hold on them.
    """
    segments = list(segments)
    if not segments:
        raise NoSteadyBehaviourError()
    centroids: list = []
    members: list = []
    assignment = []
    for seg in segments:
        best = None
        if centroids:
            best = min(range(len(centroids)), key=lambda i: abs(centroids[i] - seg.level))
            if abs(centroids[best] - seg.level) > level_tol:
                best = None
        if best is None:
            centroids.append(seg.level)
            members.append([seg])
            best = len(centroids) - 1
        else:
            members[best].append(seg)
            centroids[best] = sum(s.level for s in members[best]) / len(members[best])
        assignment.append(best)

    if names is None:
        names = [f"S{i}" for i in range(len(centroids))]
    elif len(names) < len(centroids):
        raise ValueError(f"{len(centroids)} states mined but only {len(names)} names given")

    states = {}
    for i, c in enumerate(centroids):
        obs = [pet.values[k] for s in members[i] for k in range(s.start, s.end + 1)] if pet else []
        lo, hi = c - level_tol, c + level_tol
        if obs:
            lo, hi = min(lo, min(obs)), max(hi, max(obs))
        if c <= level_tol and all(abs(x) <= eps_eq for x in obs):
            text = "H = 0 and dH = 0"
        else:
            text = f"H >= {lo!r} and H <= {hi!r} and dH >= {-eps_deriv!r} and dH <= {eps_deriv!r}"
        states[names[i]] = parse_condition(text, eps_eq)

    pea = PEA(states, names[assignment[0]], [])
    for a, b in zip(assignment, assignment[1:]):
        pea.add_transition(names[a], names[b])
    return pea


def mine_pet(
    pet: PET,
    eps_deriv: float | None = None,
    min_len: int = DEFAULT_MIN_LEN,
    level_tol: float | None = None,
    eps_eq: float = DEFAULT_EPS_EQ,
    names: list | None = None,
) -> PEA:
    """Segment detection followed by mining, with the default tolerances."""
    if eps_deriv is None:
        eps_deriv = default_eps_deriv(pet)
    if level_tol is None:
        level_tol = default_level_tol(pet)
    segments = detect_steady_segments(pet, eps_deriv, min_len)
    return mine_pea(segments, level_tol, pet=pet, eps_deriv=eps_deriv, eps_eq=eps_eq, names=names)


def augment(pea: PEA, spec: dict) -> PEA:
    """Apply a hand-written augmentation: renames, extra transitions, relabels.

    ``spec`` keys (all optional): ``rename`` ``{old: new}``, ``conditions``
    ``{state: text}``, ``transitions`` ``[{from, to, label?}]``.
    """
    out = pea.rename(spec.get("rename", {}))
    eps = next(iter(out.states.values())).eps_eq
    for state, text in spec.get("conditions", {}).items():
        if state not in out.states:
            raise ValueError(f"unknown state {state!r} in augmentation")
        out.states[state] = parse_condition(text, eps)
    for t in spec.get("transitions", []):
        out.add_transition(t["from"], t["to"], t.get("label"))
    return out


def load_augmentation(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
