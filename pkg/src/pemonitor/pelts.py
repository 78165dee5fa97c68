"""Operational semantics of a PEA: the persistent entropy labelled transition system."""

from __future__ import annotations

import io
from dataclasses import dataclass

from .conditions import eval_condition
from .entropy import PET
from .pea import PEA

EPSILON = None  # the unnamed step label
DEFAULT_CAP = 4096

STEADY, START_T, CONT_T, STOP_T = "Steady", "StartT", "ContT", "StopT"


class StuckError(RuntimeError):
    """No rule applies: the steady condition fails and there is nowhere to go."""

    def __init__(self, t, h):
        super().__init__(f"stuck: no admissible rule at t={t}, h={h}")
        self.t, self.h = t, h


class NonDeterminismExplosion(RuntimeError):
    def __init__(self, cap):
        super().__init__(f"non-determinism explosion: more than {cap} executions")


@dataclass(frozen=True)
class PeltsState:
    t: float
    rho: str
    b: bool
    h: float


@dataclass(frozen=True)
class StepLabel:
    t: float
    h: float
    name: str | None = EPSILON


@dataclass(frozen=True)
class Step:
    rule: str
    label: StepLabel
    target: PeltsState


@dataclass(frozen=True)
class MpeaExecution:
    states: tuple
    labels: tuple
    rules: tuple = ()

    def __len__(self):
        return len(self.states)

    def pet(self) -> PET:
        """The PET this execution reads (the initial state contributes nothing)."""
        return PET(tuple(lb.t for lb in self.labels), tuple(lb.h for lb in self.labels))

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        buf.write("t,rho,b,h,label\n")
        names = (None,) + tuple(lb.name for lb in self.labels)
        for q, name in zip(self.states, names):
            buf.write(f"{q.t},{q.rho},{str(q.b).lower()},{q.h!r},{name or ''}\n")
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text


def initial_state(pea: PEA) -> PeltsState:
    return PeltsState(0, pea.initial, True, 0.0)


def step(q: PeltsState, obs, pea: PEA) -> list:
    """All successors of ``q`` on observation ``obs = (t', h')``.

    Returns a list of :class:`Step`; more than one entry only for StopT
    non-determinism, ordered by transition declaration order.
    """
    t1, h1 = obs
    if not t1 > q.t:
        raise ValueError(f"observation time {t1} does not follow {q.t}")
    hdot = (h1 - q.h) / (t1 - q.t)
    if q.b:
        if eval_condition(pea.condition(q.rho), h1, hdot):
            return [Step(STEADY, StepLabel(t1, h1), PeltsState(t1, q.rho, True, h1))]
        if pea.successors(q.rho):
            return [Step(START_T, StepLabel(t1, h1), PeltsState(t1, q.rho, False, h1))]
        raise StuckError(t1, h1)
    stops = [
        Step(STOP_T, StepLabel(t1, h1, tr.label), PeltsState(t1, tr.target, True, h1))
        for tr in pea.successors(q.rho)
        if eval_condition(pea.condition(tr.target), h1, hdot)
    ]
    if stops:
        return stops
    return [Step(CONT_T, StepLabel(t1, h1), PeltsState(t1, q.rho, False, h1))]


def execute(pea: PEA, pet: PET, policy: str = "first-declared", cap: int = DEFAULT_CAP):
    """Run ``pet`` from the initial state.

    ``first-declared`` returns one :class:`MpeaExecution`, taking the earliest
    declared transition at every StopT choice. ``enumerate-all`` returns the
    list of all executions, failing once more than ``cap`` are live.
    """
    if len(pet) == 0:
        raise ValueError("cannot execute an empty PET")
    if policy == "first-declared":
        q = initial_state(pea)
        states, labels, rules = [q], [], []
        for obs in pet:
            s = step(q, obs, pea)[0]
            states.append(s.target)
            labels.append(s.label)
            rules.append(s.rule)
            q = s.target
        return MpeaExecution(tuple(states), tuple(labels), tuple(rules))
    if policy != "enumerate-all":
        raise ValueError(f"unknown policy {policy!r}")
    runs = [((initial_state(pea),), (), ())]
    for obs in pet:
        nxt = []
        for states, labels, rules in runs:
            for s in step(states[-1], obs, pea):
                nxt.append((states + (s.target,), labels + (s.label,), rules + (s.rule,)))
        if len(nxt) > cap:
            raise NonDeterminismExplosion(cap)
        runs = nxt
    return [MpeaExecution(*r) for r in runs]


def path_form(e: MpeaExecution) -> tuple:
    """``(form, n)`` where form is ``ends-steady`` or ``ends-in-transition``
    and ``n`` counts completed transitions (named steps)."""
    form = "ends-steady" if e.states[-1].b else "ends-in-transition"
    return form, sum(1 for lb in e.labels if lb.name is not EPSILON)


def read_execution(source) -> MpeaExecution:
    """Parse the ``t,rho,b,h,label`` CSV written by :meth:`MpeaExecution.to_csv`."""
    import csv

    fh = source if hasattr(source, "read") else open(source, newline="")
    try:
        rows = [r for r in csv.reader(fh) if r]
    finally:
        if fh is not source:
            fh.close()
    if [c.strip() for c in rows[0]] != ["t", "rho", "b", "h", "label"]:
        raise ValueError("execution file must start with header 't,rho,b,h,label'")
    states, labels, rules = [], [], []
    for k, (t, rho, b, h, name) in enumerate(rows[1:]):
        t = float(t)
        t = int(t) if t.is_integer() else t
        q = PeltsState(t, rho, b.strip().lower() == "true", float(h))
        if k > 0:
            prev = states[-1]
            labels.append(StepLabel(q.t, q.h, name or EPSILON))
            if prev.b:
                rules.append(STEADY if q.b else START_T)
            else:
                rules.append(STOP_T if q.b else CONT_T)
        states.append(q)
    return MpeaExecution(tuple(states), tuple(labels), tuple(rules))
