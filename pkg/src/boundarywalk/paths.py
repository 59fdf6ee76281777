"""Seeded sampling and transformation of random-walk paths.

Randomness is counter-based: a draw is a pure function of
(seed, stream, sample index, step, channel), so identical configurations
reproduce identical paths regardless of evaluation order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from . import _backend
from .groups import Element, Group
from .measures import FiniteMeasure, NotProbabilityError

# counter layout: (sample << 25) | (step << 4) | channel
STEP_BITS = 21
CHANNEL_BITS = 4
MAX_STEP = 1 << STEP_BITS

CHANNEL_INCREMENT = 0
CHANNEL_AUX = 1


@dataclass(frozen=True)
class SeededStream:
    """Reproducible randomness lane: (seed, stream index)."""

    seed: int
    stream: int = 0

    def key(self) -> int:
        return _backend.stream_key(self.seed, self.stream)

    def sublane(self, offset: int) -> "SeededStream":
        return SeededStream(self.seed, self.stream ^ (offset & 0x7FFFFFFFFFFFFFFF))


def draw_counter(sample_index: int, step: int, channel: int = 0) -> int:
    if not 0 <= step < MAX_STEP:
        raise ValueError(f"step {step} outside counter range")
    return (sample_index << (STEP_BITS + CHANNEL_BITS)) | (step << CHANNEL_BITS) | channel


def step_counters(sample_indices, step: int, channel: int = 0) -> np.ndarray:
    """Vector of counters for one step across many sample indices."""
    if not 0 <= step < MAX_STEP:
        raise ValueError(f"step {step} outside counter range")
    base = np.asarray(sample_indices, dtype=np.uint64)
    shift = np.uint64(STEP_BITS + CHANNEL_BITS)
    return (base << shift) | np.uint64((step << CHANNEL_BITS) | channel)


class SamplingTable:
    """Cached inverse-CDF table for a probability measure, in canonical order."""

    def __init__(self, mu: FiniteMeasure):
        if not mu.is_probability:
            raise NotProbabilityError(f"cannot sample from measure of mass {mu.mass}")
        self.measure = mu
        self.elements: Tuple[Element, ...] = mu.support()
        w = np.array([float(mu(g)) for g in self.elements], dtype=np.float64)
        cdf = np.cumsum(w / w.sum())
        cdf[-1] = 1.0
        self.cdf = cdf

    def indices(self, key: int, counters) -> np.ndarray:
        return _backend.sample_indices(key, counters, self.cdf)

    def draw(self, key: int, counter: int) -> Element:
        u = _backend.uniform(key, counter)
        idx = int(np.searchsorted(self.cdf, u, side="right"))
        return self.elements[min(idx, len(self.elements) - 1)]


class PathPrefix:
    """Finite increment sequence h_1..h_n with derived positions x_i = base h_1...h_i.

    ``base`` defaults to the identity; a non-identity base is only produced by
    left_shift, whose positions keep their original group values.
    """

    __slots__ = ("group", "increments", "base", "_positions")

    def __init__(self, group: Group, increments, base: Optional[Element] = None):
        self.group = group
        self.increments: Tuple[Element, ...] = tuple(increments)
        self.base = group.identity() if base is None else base
        self._positions: Optional[Tuple[Element, ...]] = None

    @property
    def positions(self) -> Tuple[Element, ...]:
        if self._positions is None:
            pos = []
            x = self.base
            for h in self.increments:
                x = self.group.multiply(x, h)
                pos.append(x)
            self._positions = tuple(pos)
        return self._positions

    def position(self, i: int) -> Element:
        """x_i, with x_0 = base."""
        return self.base if i == 0 else self.positions[i - 1]

    def __len__(self) -> int:
        return len(self.increments)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathPrefix):
            return NotImplemented
        return (
            self.group == other.group
            and self.increments == other.increments
            and self.base == other.base
        )

    def __repr__(self):
        return f"PathPrefix({self.group!r}, {self.increments!r}, base={self.base!r})"


def sample_prefix(
    mu: FiniteMeasure, length: int, stream: SeededStream, sample_index: int = 0
) -> PathPrefix:
    """Path of i.i.d. increments with law mu; deterministic given the stream."""
    if length < 0:
        raise ValueError("length must be >= 0")
    table = SamplingTable(mu)
    if length == 0:
        return PathPrefix(mu.group, ())
    key = stream.key()
    counters = np.array(
        [draw_counter(sample_index, t, CHANNEL_INCREMENT) for t in range(1, length + 1)],
        dtype=np.uint64,
    )
    idx = table.indices(key, counters)
    return PathPrefix(mu.group, (table.elements[i] for i in idx))


def increment_stream(
    mu: FiniteMeasure, stream: SeededStream, sample_index: int = 0
) -> Iterator[Element]:
    """Lazy unbounded increment sequence (same draws as sample_prefix)."""
    table = SamplingTable(mu)
    key = stream.key()
    t = 1
    while True:
        yield table.draw(key, draw_counter(sample_index, t, CHANNEL_INCREMENT))
        t += 1


def increment_shift(path: PathPrefix, k: int) -> PathPrefix:
    """U^k: drop the first k increments and re-base at the identity.

    Positions of the result are x_k^{-1} x_{k+j}.
    """
    if not 0 <= k <= len(path):
        raise ValueError(f"shift {k} beyond path length {len(path)}")
    return PathPrefix(path.group, path.increments[k:])


def left_shift(path: PathPrefix, k: int) -> PathPrefix:
    """S^k: drop the first k positions, keeping original group values."""
    if not 0 <= k <= len(path):
        raise ValueError(f"shift {k} beyond path length {len(path)}")
    return PathPrefix(path.group, path.increments[k:], base=path.position(k))
