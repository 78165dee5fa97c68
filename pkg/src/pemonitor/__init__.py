"""Runtime monitoring of complex systems through persistent entropy.

Weighted graph snapshots are turned into persistent entropy traces, steady
regimes of the trace are mined into a persistent entropy automaton, and the
automaton's executions are checked against bounded LTL properties.
"""

from .entropy import PET, UndefinedEntropyError, derivative, persistent_entropy
from .estimators import PEAMiner, PersistentEntropyTransformer
from .filtration import WeightedGraph, build_clique_filtration
from .ltl import Verdict, evaluate, parse_ltl
from .monitor import MPEA, classify_trace, label_execution
from .pea import PEA, detect_steady_segments, idiotypic_pea, mine_pea
from .pelts import StuckError, execute
from .persistence import Barcode, Interval, compute_persistence, truncate_barcode
from .sim import SimConfig, simulate

__version__ = "0.1.0"
