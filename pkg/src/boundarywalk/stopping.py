"""Markov stopping rules on path prefixes and the transformed measure.

A rule is evaluated incrementally: ``start()`` yields a hashable decision
state, ``step(state, h)`` consumes one increment and reports whether the rule
stops at that index.  The state is all the rule may remember, which enforces
prefix-measurability structurally and lets the exact engine merge prefixes
that share (position, state).

Rules built from a raw verdict function (PrefixRule) have no decision state;
the exact engine then falls back to full tree exploration.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .groups import Element, Group
from .measures import EXACT, FiniteMeasure, NotProbabilityError, coerce_weight
from .paths import (
    CHANNEL_INCREMENT,
    PathPrefix,
    SamplingTable,
    SeededStream,
    step_counters,
)

DEFAULT_EPSILON_EXACT = Fraction(1, 2**20)
DEFAULT_EPSILON_FLOAT = 1e-6
DEFAULT_MAX_HORIZON = 10_000


def default_epsilon(mode: str):
    return DEFAULT_EPSILON_EXACT if mode == EXACT else DEFAULT_EPSILON_FLOAT


class StoppingRule:
    """Base class; subclasses define the decision-state machine."""

    horizon_bound: Optional[int] = None  # stops by this index, if known
    tail_bound: Optional[float] = None  # P(T > n) <= C * tail_bound**n, if known
    has_decision_state = True

    def start(self):
        raise NotImplementedError

    def step(self, state, increment: Element) -> Tuple[object, bool]:
        raise NotImplementedError

    # -- derived path-level views -----------------------------------------

    def stopping_time(self, path: PathPrefix) -> Optional[int]:
        """First index at which the rule stops, or None within this prefix."""
        state = self.start()
        for n, h in enumerate(path.increments, start=1):
            state, stopped = self.step(state, h)
            if stopped:
                return n
        return None

    def verdict(self, path: PathPrefix) -> bool:
        """Stop/Continue verdict for the prefix: has the rule fired by its end?"""
        return self.stopping_time(path) is not None


class ConstantRule(StoppingRule):
    """Stops exactly at a fixed index n >= 1."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("constant rule needs n >= 1")
        self.n = n
        self.horizon_bound = n

    def start(self):
        return self.n

    def step(self, state, increment):
        return state - 1, state == 1

    def __repr__(self):
        return f"ConstantRule({self.n})"


class FirstVisitRule(StoppingRule):
    """Stops at the first n >= 1 with x_n in A.

    Tracks the position reached since the rule started, so it composes
    correctly under sequential iteration (positions are re-based).
    """

    def __init__(self, group: Group, A):
        self.group = group
        self.target = frozenset(group.canonicalize(g) for g in A)
        if not self.target:
            raise ValueError("visit set must be nonempty")

    def start(self):
        return self.group.identity()

    def step(self, state, increment):
        pos = self.group.multiply(state, increment)
        return pos, pos in self.target

    def __repr__(self):
        return f"FirstVisitRule({sorted(self.target, key=self.group.sort_key)!r})"


class FirstIncrementRule(StoppingRule):
    """Stops at the first n with h_n in B; geometric tail with ratio 1 - mu(B)."""

    def __init__(self, group: Group, B):
        self.group = group
        self.flagged = frozenset(group.canonicalize(g) for g in B)
        if not self.flagged:
            raise ValueError("increment set must be nonempty")

    def start(self):
        return None

    def step(self, state, increment):
        return None, increment in self.flagged

    def __repr__(self):
        return f"FirstIncrementRule({sorted(self.flagged, key=self.group.sort_key)!r})"


class SequentialRule(StoppingRule):
    """T = T1 + T2 evaluated sequentially: run first, then second on the
    increment-shifted remainder U^{T1} of the path."""

    def __init__(self, first: StoppingRule, second: StoppingRule):
        self.first = first
        self.second = second
        if first.horizon_bound is not None and second.horizon_bound is not None:
            self.horizon_bound = first.horizon_bound + second.horizon_bound

    def start(self):
        return (0, self.first.start())

    def step(self, state, increment):
        phase, inner = state
        rule = self.first if phase == 0 else self.second
        inner, stopped = rule.step(inner, increment)
        if stopped:
            if phase == 0:
                return (1, self.second.start()), False
            return (1, inner), True
        return (phase, inner), False

    def __repr__(self):
        return f"SequentialRule({self.first!r}, {self.second!r})"


def sequential_compose(first: StoppingRule, second: StoppingRule) -> SequentialRule:
    return SequentialRule(first, second)


class PrefixRule(StoppingRule):
    """Rule from a raw verdict function on PathPrefix; no decision state.

    The exact engine must then explore the full prefix tree, which is
    exponential in the horizon.
    """

    has_decision_state = False

    def __init__(self, group: Group, fn, horizon_bound: Optional[int] = None):
        self.group = group
        self.fn = fn
        self.horizon_bound = horizon_bound

    def start(self):
        return ()

    def step(self, state, increment):
        incs = state + (increment,)
        return incs, bool(self.fn(PathPrefix(self.group, incs)))


def iterate_stops(rule: StoppingRule, path: PathPrefix) -> Tuple[int, ...]:
    """Iterated stop indices T_1 < T_2 < ... contained in the prefix.

    Implements T_{i+1} = T_i + T(U^{T_i} path) by restarting the rule's state
    machine after each stop.
    """
    stops: List[int] = []
    state = rule.start()
    for n, h in enumerate(path.increments, start=1):
        state, stopped = rule.step(state, h)
        if stopped:
            stops.append(n)
            state = rule.start()
    return tuple(stops)


@dataclass
class TransformResult:
    """Outcome of a (exact or Monte Carlo) stopping transform."""

    measure: FiniteMeasure
    mass_deficit: object
    mean_stopping_time: float
    horizon: int
    truncated: bool = False

    @property
    def total_mass(self):
        return self.measure.mass + self.mass_deficit


def exact_transform(
    mu: FiniteMeasure,
    rule: StoppingRule,
    epsilon=None,
    max_horizon: int = DEFAULT_MAX_HORIZON,
) -> TransformResult:
    """Exact law of x_T by breadth-first exploration of the prefix tree.

    Prefixes are merged on (position, decision state); the weight of a prefix
    is the product of its increment weights.  Exploration ends when the
    unstopped mass drops to epsilon or the horizon is hit; the leftover mass
    is reported as the deficit (never renormalized away).
    """
    if not mu.is_probability:
        raise NotProbabilityError(f"transform needs a probability measure, mass {mu.mass}")
    if epsilon is None:
        epsilon = default_epsilon(mu.mode)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not rule.has_decision_state:
        warnings.warn(
            "rule has no decision state: exact transform explores the full "
            "prefix tree (exponential in the horizon)",
            stacklevel=2,
        )
    group = mu.group
    zero = coerce_weight(0, mu.mode)
    items = mu.items_sorted()
    frontier: Dict[Tuple[Element, object], object] = {(group.identity(), rule.start()): coerce_weight(1, mu.mode)}
    stopped: Dict[Element, object] = {}
    time_sum = 0.0
    stopped_mass = zero
    unstopped = coerce_weight(1, mu.mode)
    depth = 0
    while frontier and unstopped > epsilon and depth < max_horizon:
        depth += 1
        nxt: Dict[Tuple[Element, object], object] = {}
        level_stop = zero
        for (pos, state), w in frontier.items():
            for h, wh in items:
                s2, stop = rule.step(state, h)
                pos2 = group.multiply(pos, h)
                w2 = w * wh
                if stop:
                    stopped[pos2] = stopped.get(pos2, zero) + w2
                    level_stop = level_stop + w2
                else:
                    key = (pos2, s2)
                    nxt[key] = nxt.get(key, zero) + w2
        frontier = nxt
        stopped_mass = stopped_mass + level_stop
        unstopped = unstopped - level_stop
        time_sum += depth * float(level_stop)
    measure = FiniteMeasure(group, stopped, mu.mode)
    deficit = coerce_weight(1, mu.mode) - measure.mass
    mean_t = time_sum / float(stopped_mass) if stopped_mass > 0 else float("nan")
    return TransformResult(
        measure=measure,
        mass_deficit=deficit,
        mean_stopping_time=mean_t,
        horizon=depth,
        truncated=bool(deficit > epsilon),
    )


def _mc_chunk(mu, rule, table, key, lo, hi, horizon_cap):
    """Simulate sample indices [lo, hi); batched RNG draws per step."""
    group = mu.group
    counts: Dict[Element, int] = {}
    time_total = 0
    n_stopped = 0
    active = list(range(lo, hi))
    states = [rule.start() for _ in active]
    positions = [group.identity() for _ in active]
    step = 1
    while active and step <= horizon_cap:
        counters = step_counters(active, step, CHANNEL_INCREMENT)
        idx = table.indices(key, counters)
        keep_a: List[int] = []
        keep_s: List[object] = []
        keep_p: List[Element] = []
        elements = table.elements
        for j, sample in enumerate(active):
            h = elements[idx[j]]
            state, stop = rule.step(states[j], h)
            pos = group.multiply(positions[j], h)
            if stop:
                counts[pos] = counts.get(pos, 0) + 1
                time_total += step
                n_stopped += 1
            else:
                keep_a.append(sample)
                keep_s.append(state)
                keep_p.append(pos)
        active, states, positions = keep_a, keep_s, keep_p
        step += 1
    return counts, time_total, n_stopped


def monte_carlo_transform(
    mu: FiniteMeasure,
    rule: StoppingRule,
    samples: int,
    horizon_cap: int = DEFAULT_MAX_HORIZON,
    stream: SeededStream = SeededStream(0),
    workers: int = 1,
) -> TransformResult:
    """Empirical law of x_T over seeded sample paths.

    Each sample owns a counter lane keyed by its index, so the merged
    histogram is identical for any worker count and any execution order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    table = SamplingTable(mu)
    key = stream.key()
    bounds = [samples * w // workers for w in range(workers + 1)]
    chunks = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    if len(chunks) <= 1:
        results = [_mc_chunk(mu, rule, table, key, 0, samples, horizon_cap)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(
                pool.map(
                    lambda c: _mc_chunk(mu, rule, table, key, c[0], c[1], horizon_cap),
                    chunks,
                )
            )
    counts: Dict[Element, int] = {}
    time_total = 0
    n_stopped = 0
    for c, t, n in results:
        for g, k in c.items():
            counts[g] = counts.get(g, 0) + k
        time_total += t
        n_stopped += n
    if mu.mode == EXACT:
        weights = {g: Fraction(k, samples) for g, k in counts.items()}
        deficit = Fraction(samples - n_stopped, samples)
    else:
        weights = {g: k / samples for g, k in counts.items()}
        deficit = (samples - n_stopped) / samples
    measure = FiniteMeasure(mu.group, weights, mu.mode)
    mean_t = time_total / n_stopped if n_stopped else float("nan")
    return TransformResult(
        measure=measure,
        mass_deficit=deficit,
        mean_stopping_time=mean_t,
        horizon=horizon_cap,
        truncated=n_stopped < samples,
    )
