"""scikit-learn style wrappers around the pipeline stages.

``PersistentEntropyTransformer`` maps weighted-graph snapshots to entropies,
``PEAMiner`` learns an automaton from a PET and then turns further PETs into
monitor traces (``transform``) or trace groups (``predict``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .entropy import PET
from .filtration import ORDERS, WeightedGraph
from .monitor import MPEA, classify_trace, label_execution
from .pea import DEFAULT_MIN_LEN, PEA, augment, default_eps_deriv, default_level_tol, detect_steady_segments, mine_pea
from .conditions import DEFAULT_EPS_EQ
from .pelts import execute
from .pipeline import graphs_to_pet


def check_graphs(X) -> list:
    """Validate a sequence of :class:`WeightedGraph` with increasing timestamps."""
    if isinstance(X, WeightedGraph):
        X = [X]
    graphs = list(X)
    if not graphs:
        raise ValueError("expected at least one graph")
    for g in graphs:
        if not isinstance(g, WeightedGraph):
            raise TypeError(f"expected WeightedGraph, got {type(g).__name__}")
    return graphs


def check_pet(X) -> PET:
    """Coerce ``X`` to a PET.

    Accepts a :class:`PET`, an ``(n, 2)`` array of ``(t, h)`` rows or a 1-d
    array of entropies observed at unit steps ``1..n``.
    """
    if isinstance(X, PET):
        return X
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        return PET.from_values(arr.tolist())
    if arr.ndim == 2 and arr.shape[1] == 2:
        return PET.from_pairs(map(tuple, arr.tolist()))
    if arr.ndim == 2 and arr.shape[1] == 1:
        return PET.from_values(arr[:, 0].tolist())
    raise ValueError(f"cannot interpret array of shape {arr.shape} as a PET")


def check_pets(X) -> list:
    """A single PET-like input or a list of them, as a list of PETs."""
    if isinstance(X, PET):
        return [X]
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], (PET, list, tuple, np.ndarray)):
        if isinstance(X[0], PET) or np.ndim(X[0]) >= 1:
            return [check_pet(x) for x in X]
    return [check_pet(X)]


class PersistentEntropyTransformer(BaseEstimator, TransformerMixin):
    """Persistent entropy of the clique filtration of each graph snapshot."""

    def __init__(self, max_dim=1, order="descending-rank", dim=None, n_jobs=1):
        self.max_dim = max_dim
        self.order = order
        self.dim = dim
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.max_dim not in (1, 2):
            raise ValueError("unsupported dimension")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}")
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        pet = self.to_pet(X)
        return np.asarray(pet.values).reshape(-1, 1)

    def to_pet(self, X) -> PET:
        graphs = check_graphs(X)
        return graphs_to_pet(graphs, self.max_dim, self.order, self.dim, jobs=self.n_jobs)


class PEAMiner(BaseEstimator):
    """Mine a PEA from a PET and use it as a runtime monitor.

    Tolerances left as ``None`` are derived from the fitted PET: the
    derivative threshold is ``1e-6`` and the level tolerance ``5%`` of the
    largest entropy.
    """

    def __init__(
        self,
        eps_deriv=None,
        min_len=DEFAULT_MIN_LEN,
        level_tol=None,
        eps_eq=DEFAULT_EPS_EQ,
        state_names=None,
        augmentation=None,
    ):
        self.eps_deriv = eps_deriv
        self.min_len = min_len
        self.level_tol = level_tol
        self.eps_eq = eps_eq
        self.state_names = state_names
        self.augmentation = augmentation

    def fit(self, X, y=None):
        pet = check_pet(X)
        self.eps_deriv_ = default_eps_deriv(pet) if self.eps_deriv is None else self.eps_deriv
        self.level_tol_ = default_level_tol(pet) if self.level_tol is None else self.level_tol
        self.segments_ = detect_steady_segments(pet, self.eps_deriv_, self.min_len)
        pea = mine_pea(
            self.segments_,
            self.level_tol_,
            pet=pet,
            eps_deriv=self.eps_deriv_,
            eps_eq=self.eps_eq,
            names=self.state_names,
        )
        if self.augmentation:
            pea = augment(pea, self.augmentation)
        self.pea_ = pea
        self.monitor_ = MPEA.by_state_name(pea)
        return self

    @classmethod
    def from_pea(cls, pea: PEA, **params) -> "PEAMiner":
        """A monitor around an existing automaton, no mining needed."""
        est = cls(**params)
        est.pea_ = pea
        est.monitor_ = MPEA.by_state_name(pea)
        return est

    def execute(self, X) -> list:
        """One first-declared execution per input PET."""
        check_is_fitted(self, "pea_")
        return [execute(self.pea_, pet) for pet in check_pets(X)]

    def transform(self, X) -> list:
        """MPEA traces, one per input PET."""
        return [label_execution(e, self.monitor_) for e in self.execute(X)]

    def predict(self, X) -> np.ndarray:
        """Trace group (``I.a`` ... ``III.b`` or ``OTHER``) for each PET."""
        return np.array([classify_trace(tr) for tr in self.transform(X)], dtype=object)
