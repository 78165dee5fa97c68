"""Monitor PEAs: executions to proposition traces, trace groups and verdicts."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from itertools import groupby

from .ltl import OMEGA, Verdict, evaluate
from .pea import PEA
from .pelts import MpeaExecution

GROUPS = ("I.a", "I.b", "II.a", "II.b", "III.a", "III.b", "OTHER")

SYMBOLS = {"V": frozenset({"virgin"}), "M": frozenset({"memory"}), "W": frozenset({OMEGA})}
_LETTER = {v: k for k, v in SYMBOLS.items()}

# Properties from the immune-network case study; one tick is three days.
IDIOTYPIC_PROPERTIES = (
    "G<=30 !memory",
    "G<=2190 (((virgin | memory) & X w) -> F<=180 memory)",
    "F<=50 G<=150 w",
)


@dataclass
class MPEA:
    pea: PEA
    propositions: frozenset
    labelling: dict = field(default_factory=dict)

    def __post_init__(self):
        self.propositions = frozenset(self.propositions)
        if OMEGA in self.propositions:
            raise ValueError(f"{OMEGA!r} is reserved for mid-transition positions")
        missing = set(self.pea.states) - set(self.labelling)
        if missing:
            raise ValueError(f"labelling is not total; missing {sorted(missing)}")
        for state, props in self.labelling.items():
            extra = set(props) - self.propositions
            if extra:
                raise ValueError(f"state {state!r} labelled with unknown propositions {sorted(extra)}")
        self.labelling = {s: frozenset(p) for s, p in self.labelling.items()}

    @classmethod
    def by_state_name(cls, pea: PEA) -> "MPEA":
        """Label each state with a proposition of the same name."""
        return cls(pea, frozenset(pea.states), {s: {s} for s in pea.states})


@dataclass(frozen=True)
class MpeaTrace:
    sets: tuple

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def symbols(self) -> str:
        """Compact ``V``/``M``/``W`` spelling; other sets render as ``?``."""
        return "".join(_LETTER.get(a, "?") for a in self.sets)

    @classmethod
    def from_symbols(cls, text: str) -> "MpeaTrace":
        return cls(tuple(SYMBOLS[c] for c in text if not c.isspace()))


def label_execution(e: MpeaExecution, m: MPEA) -> MpeaTrace:
    sets = []
    for q in e.states:
        if q.rho not in m.labelling:
            raise KeyError(f"state {q.rho!r} is not in the monitor")
        sets.append(m.labelling[q.rho] if q.b else frozenset({OMEGA}))
    return MpeaTrace(tuple(sets))


def classify_trace(tr) -> str:
    """Group of a virgin/memory/omega trace, matched on its run-length shape."""
    s = tr if isinstance(tr, str) else tr.symbols()
    runs = [k for k, _ in groupby(s)]
    if not runs or runs[0] != "V" or any(c not in "VMW" for c in runs):
        return "OTHER"
    rest = runs[1:]
    if not rest:
        return "I.a"
    if rest == ["W", "V"]:
        return "I.b"
    if rest == ["W"]:
        return "III.b"
    tail_w = rest[-1] == "W"
    body = rest[:-1] if tail_w else rest
    if not body or len(body) % 2 or any(body[i : i + 2] != ["W", "M"] for i in range(0, len(body), 2)):
        return "OTHER"
    cycles = len(body) // 2
    if tail_w:
        return "III.a"
    return "II.b" if cycles == 1 else "II.a"


def batch_statistics(traces) -> dict:
    counts = Counter(classify_trace(tr) for tr in traces)
    return {g: counts.get(g, 0) for g in GROUPS}


def check_properties(traces, formulas) -> list:
    """``(trace_id, property_id, verdict)`` rows at position 0 of each trace."""
    return [
        (ti, pi, evaluate(f, tr, 0))
        for ti, tr in enumerate(traces)
        for pi, f in enumerate(formulas)
    ]


def exit_code(verdicts) -> int:
    """0 when every verdict is TRUE, 3 on any FALSE, otherwise 4."""
    verdicts = list(verdicts)
    if any(v is Verdict.FALSE for v in verdicts):
        return 3
    if any(v is Verdict.UNKNOWN for v in verdicts):
        return 4
    return 0


# -- files -----------------------------------------------------------------

def parse_trace(text: str) -> MpeaTrace:
    """One step per line: a ``V``/``M``/``W`` symbol or a set such as ``{p,q}``."""
    sets = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("{"):
            if not line.endswith("}"):
                raise ValueError(f"malformed set {line!r}")
            items = [x.strip() for x in line[1:-1].split(",") if x.strip()]
            sets.append(frozenset("w" if x in ("ω", "omega") else x for x in items))
        elif line in SYMBOLS:
            sets.append(SYMBOLS[line])
        else:
            raise ValueError(f"unknown trace symbol {line!r}")
    return MpeaTrace(tuple(sets))


def format_trace(tr: MpeaTrace, sets: bool = False) -> str:
    lines = []
    for a in tr.sets:
        if not sets and a in _LETTER:
            lines.append(_LETTER[a])
        else:
            lines.append("{" + ",".join(sorted(a)) + "}")
    return "\n".join(lines) + "\n"


def read_properties(text: str) -> list:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]


def format_verdicts(rows, trace_ids=None) -> str:
    buf = io.StringIO()
    buf.write("trace_id,property_id,verdict\n")
    for ti, pi, v in rows:
        tid = trace_ids[ti] if trace_ids else ti
        buf.write(f"{tid},{pi},{v.name}\n")
    return buf.getvalue()
