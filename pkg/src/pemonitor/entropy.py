"""Persistent entropy of barcodes and persistent entropy traces (PETs)."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .persistence import Barcode


class UndefinedEntropyError(ValueError):
    """Raised when a barcode has zero total length."""

    def __init__(self, message="undefined entropy", timestamp=None):
        if timestamp is not None:
            message = f"{message} at t={timestamp}"
        super().__init__(message)
        self.timestamp = timestamp


class VertexCountWarning(UserWarning):
    pass


def persistent_entropy(barcode: Barcode, dim: int | None = None, base: float = math.e) -> float:
    """Shannon entropy of the normalised bar lengths.

    ``dim`` restricts the computation to one homology dimension; by default
    all dimensions are pooled. The barcode must already be truncated.
    """
    lengths = [iv.length for iv in barcode.intervals if dim is None or iv.dim == dim]
    if any(math.isinf(x) for x in lengths):
        raise ValueError("barcode has infinite intervals; truncate it first")
    lengths = [x for x in lengths if x > 0]
    total = math.fsum(lengths)
    if total <= 0:
        raise UndefinedEntropyError()
    h = -math.fsum((x / total) * math.log(x / total) for x in lengths)
    if base != math.e:
        h /= math.log(base)
    # -0.0 for a single bar
    return h if h > 0 else 0.0


@dataclass(frozen=True)
class PET:
    """Time-stamped persistent entropy observations, strictly increasing in time."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(int(t) if float(t).is_integer() else float(t) for t in self.times)
        values = tuple(float(h) for h in self.values)
        if len(times) != len(values):
            raise ValueError("times and values differ in length")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("PET timestamps must be strictly increasing")
        if any(not (h >= 0) for h in values):
            raise ValueError("PET values must be non-negative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "PET":
        pairs = list(pairs)
        return cls(tuple(t for t, _ in pairs), tuple(h for _, h in pairs))

    @classmethod
    def from_values(cls, values: Sequence[float], start: int = 1) -> "PET":
        """Unit-step PET whose first observation is at ``start``."""
        return cls(tuple(range(start, start + len(values))), tuple(values))

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.values))

    def __getitem__(self, i):
        return self.times[i], self.values[i]

    def with_baseline(self) -> "PET":
        """Prepend the ``(0, 0)`` observation unless the PET already starts at 0."""
        if self.times and self.times[0] == 0:
            return self
        return PET((0,) + self.times, (0.0,) + self.values)


@dataclass(frozen=True)
class DerivativeSeries:
    times: tuple
    values: tuple

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.values))


def entropy_series(
    barcodes: Iterable, dim: int | None = None, vertex_counts: Sequence[int] | None = None
) -> PET:
    """PET with one observation per ``(t, truncated barcode)`` pair.

    When ``vertex_counts`` is given, a :class:`VertexCountWarning` is emitted
    wherever consecutive snapshots differ in their number of vertices, since
    entropies are then not directly comparable.
    """
    times, values = [], []
    for t, b in barcodes:
        try:
            values.append(persistent_entropy(b, dim=dim))
        except UndefinedEntropyError:
            raise UndefinedEntropyError(timestamp=t) from None
        times.append(t)
    if vertex_counts is not None:
        for k in range(1, len(vertex_counts)):
            if vertex_counts[k] != vertex_counts[k - 1]:
                warnings.warn(
                    f"vertex count changes at t={times[k]} "
                    f"({vertex_counts[k - 1]} -> {vertex_counts[k]})",
                    VertexCountWarning,
                    stacklevel=2,
                )
    return PET(tuple(times), tuple(values))


def derivative(pet: PET) -> DerivativeSeries:
    """Backward difference quotients, one per observation after the first."""
    if len(pet) < 2:
        raise ValueError("derivative needs at least two observations")
    t, h = pet.times, pet.values
    return DerivativeSeries(
        t[1:], tuple((h[k] - h[k - 1]) / (t[k] - t[k - 1]) for k in range(1, len(t)))
    )


# -- CSV IO ---------------------------------------------------------------

def write_pet(pet: PET, dest=None) -> str:
    buf = io.StringIO()
    buf.write("time,entropy\n")
    for t, h in pet:
        buf.write(f"{t},{h!r}\n")
    return _flush(buf, dest)


def write_derivative(ds: DerivativeSeries, dest=None) -> str:
    buf = io.StringIO()
    buf.write("time,dentropy\n")
    for t, d in ds:
        buf.write(f"{t},{d!r}\n")
    return _flush(buf, dest)


def read_pet(source) -> PET:
    if hasattr(source, "read"):
        rows = list(csv.reader(source))
    else:
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows or [c.strip() for c in rows[0]] != ["time", "entropy"]:
        raise ValueError("PET file must start with header 'time,entropy'")
    return PET.from_pairs((_number(t), float(h)) for t, h in rows[1:])


def _number(text: str):
    x = float(text)
    return int(x) if x.is_integer() and "." not in text and "e" not in text.lower() else x


def _flush(buf, dest):
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return text
