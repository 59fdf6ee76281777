"""Extension of the walk to G x X: auxiliary spaces, extended stopping rules,
and projection of the stopped extended chain back to a measure on G.

Two auxiliary-space variants:

* DiscreteAux     -- weighted points; the uncoupled chain pairs each step with
                     an independent draw.
* IntervalAux     -- the unit interval partitioned into cells I_g of length
                     mu(g), each split into an alpha part A_g and a beta part
                     B_g.  In coupled sampling the increment is read off the
                     uniform draw through the partition.

Extended rules expose both a sampling view (``step`` on (increment, aux draw)
pairs) and an exact view (``arcs``: per-step weighted branches), so the exact
projection reuses the same frontier engine as the plain transform.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import _backend
from .groups import Element, require_same_group
from .measures import (
    EXACT,
    FiniteMeasure,
    NotProbabilityError,
    SplitPair,
    add,
    coerce_weight,
)
from .paths import (
    CHANNEL_AUX,
    CHANNEL_INCREMENT,
    PathPrefix,
    SamplingTable,
    SeededStream,
    draw_counter,
    step_counters,
)
from .stopping import DEFAULT_MAX_HORIZON, TransformResult, default_epsilon


class DiscreteAux:
    """Auxiliary space of weighted points b_1..b_N (weights sum to 1)."""

    def __init__(self, points, weights, mode: str = EXACT):
        self.points = tuple(points)
        self.mode = mode
        self.weights = tuple(coerce_weight(w, mode) for w in weights)
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights differ in length")
        if any(w < 0 for w in self.weights):
            raise ValueError("negative auxiliary weight")
        total = sum(self.weights)
        ok = total == 1 if mode == EXACT else abs(total - 1.0) <= 1e-9
        if not ok:
            raise ValueError(f"auxiliary weights sum to {total}, expected 1")
        w = np.array([float(x) for x in self.weights], dtype=np.float64)
        cdf = np.cumsum(w / w.sum())
        cdf[-1] = 1.0
        self._cdf = cdf

    def draw(self, key: int, counter: int):
        u = _backend.uniform(key, counter)
        idx = int(np.searchsorted(self._cdf, u, side="right"))
        return self.points[min(idx, len(self.points) - 1)]


class IntervalAux:
    """Unit interval (0,1) partitioned by a split mu = alpha + beta.

    Cells follow the canonical element order; within each I_g the alpha part
    A_g sits left of the beta part B_g.  Exact weights are kept alongside the
    float cell boundaries used for sampling.
    """

    def __init__(self, mu: FiniteMeasure, split: SplitPair):
        require_same_group(mu.group, split.alpha.group)
        if add(split.alpha, split.beta) != mu:
            raise ValueError("split does not reassemble the walk's measure")
        self.mu = mu
        self.alpha = split.alpha
        self.beta = split.beta
        self.elements = mu.support()
        # float geometry of the partition (presentation device for sampling)
        self._beta_edge: Dict[Element, float] = {}  # left(I_g) + |A_g|
        self._alpha_frac: Dict[Element, float] = {}  # |A_g| / |I_g|
        edges: List[float] = []
        owners: List[Tuple[Element, bool]] = []  # (element, is_beta_part)
        left = 0.0
        for g in self.elements:
            m = float(mu(g))
            a = float(self.alpha(g))
            self._beta_edge[g] = left + a
            self._alpha_frac[g] = a / m
            if a > 0:
                edges.append(left + a)
                owners.append((g, False))
            if m - a > 0:
                edges.append(left + m)
                owners.append((g, True))
            left += m
        edges[-1] = 1.0
        self._edges = edges
        self._owners = owners

    def locate(self, gamma: float) -> Tuple[Element, bool]:
        """Cell containing gamma: (element, lies in the beta part)."""
        idx = min(bisect.bisect_right(self._edges, gamma), len(self._owners) - 1)
        return self._owners[idx]

    def in_beta_part(self, g: Element, gamma: float) -> bool:
        """Whether a draw gamma known to lie in I_g falls in B_g (A sits left of B)."""
        return gamma >= self._beta_edge[g]

    def beta_coin(self, g: Element, coin: float) -> bool:
        """Conditional thinning for an independent uniform coin: True with
        probability beta(g)/mu(g) -- the coin's relative position inside a
        rescaled copy of I_g."""
        return coin >= self._alpha_frac[g]


class ExtendedPrefix:
    """Pairs (h_i, gamma_i); the first coordinates form a plain PathPrefix."""

    __slots__ = ("group", "pairs", "_path")

    def __init__(self, group, pairs):
        self.group = group
        self.pairs = tuple(pairs)
        self._path: Optional[PathPrefix] = None

    @property
    def path(self) -> PathPrefix:
        if self._path is None:
            self._path = PathPrefix(self.group, (h for h, _ in self.pairs))
        return self._path

    def __len__(self):
        return len(self.pairs)


def sample_extended(
    mu: FiniteMeasure,
    aux,
    length: int,
    stream: SeededStream,
    coupled: bool = False,
    sample_index: int = 0,
) -> ExtendedPrefix:
    """Extended path of (increment, auxiliary draw) pairs.

    Uncoupled: gamma_i are i.i.d. with law m, independent of the increments.
    Coupled (IntervalAux only): gamma_i is uniform and the increment is read
    off it through the partition, so increments still have law mu.
    """
    if not mu.is_probability:
        raise NotProbabilityError(f"cannot sample from measure of mass {mu.mass}")
    if length < 0:
        raise ValueError("length must be >= 0")
    key = stream.key()
    pairs = []
    if coupled:
        if not isinstance(aux, IntervalAux):
            raise ValueError("coupled sampling requires an IntervalAux")
        for t in range(1, length + 1):
            u = _backend.uniform(key, draw_counter(sample_index, t, CHANNEL_INCREMENT))
            g, _ = aux.locate(u)
            pairs.append((g, u))
    else:
        table = SamplingTable(mu)
        for t in range(1, length + 1):
            h = table.draw(key, draw_counter(sample_index, t, CHANNEL_INCREMENT))
            ac = draw_counter(sample_index, t, CHANNEL_AUX)
            if isinstance(aux, IntervalAux):
                gamma = _backend.uniform(key, ac)
            else:
                gamma = aux.draw(key, ac)
            pairs.append((h, gamma))
    return ExtendedPrefix(mu.group, pairs)


class ExtendedRule:
    """Stopping rule on extended prefixes.

    ``step(state, h, gamma)`` drives sampling; ``arcs(state, mu)`` yields the
    per-step weighted branches (h, weight, new_state, stopped) for the exact
    frontier engine.
    """

    def start(self):
        raise NotImplementedError

    def step(self, state, h: Element, gamma) -> Tuple[object, bool]:
        raise NotImplementedError

    def arcs(self, state, mu: FiniteMeasure):
        raise NotImplementedError

    def stopping_time(self, prefix: ExtendedPrefix) -> Optional[int]:
        state = self.start()
        for n, (h, gamma) in enumerate(prefix.pairs, start=1):
            state, stopped = self.step(state, h, gamma)
            if stopped:
                return n
        return None


_FRESH = "fresh"


class AuxFirstCoordinateRule(ExtendedRule):
    """T = gamma_1 for a discrete auxiliary space of positive integer points.

    The projected stopped position x_{gamma_1} has law sum_i a_i mu^{*b_i}.
    """

    def __init__(self, aux: DiscreteAux):
        if not all(isinstance(b, int) and b >= 1 for b in aux.points):
            raise ValueError("auxiliary points must be positive integers")
        self.aux = aux
        self.horizon_bound = max(aux.points)

    def start(self):
        return _FRESH

    def step(self, state, h, gamma):
        remaining = gamma if state == _FRESH else state
        remaining -= 1
        return remaining, remaining == 0

    def arcs(self, state, mu: FiniteMeasure):
        if state == _FRESH:
            for b, a in zip(self.aux.points, self.aux.weights):
                a = coerce_weight(a, mu.mode)
                for h, wh in mu.items_sorted():
                    yield h, a * wh, b - 1, b == 1
        else:
            for h, wh in mu.items_sorted():
                yield h, wh, state - 1, state == 1


class BetaFlagRule(ExtendedRule):
    """Stops the first time the auxiliary draw lands in a beta part B_g.

    Given increment g the conditional stop probability is beta(g)/mu(g); the
    projected law of x_T is the Neumann series sum_n alpha^{*n} * beta, with
    overlapping alpha/beta supports allowed.

    ``coupled`` states how the auxiliary draws are threaded: True means gamma
    determines the increment through the partition (so gamma lies in I_h);
    False means gamma is an independent uniform used as a conditional coin.
    Both yield the same projected law.
    """

    def __init__(self, aux: IntervalAux, coupled: bool = True):
        self.aux = aux
        self.coupled = coupled

    def start(self):
        return None

    def step(self, state, h, gamma):
        if self.coupled:
            return None, self.aux.in_beta_part(h, gamma)
        return None, self.aux.beta_coin(h, gamma)

    def arcs(self, state, mu: FiniteMeasure):
        if mu != self.aux.mu:
            raise ValueError("auxiliary partition was not built from this measure")
        for g in self.aux.elements:
            a = self.aux.alpha(g)
            b = self.aux.beta(g)
            if a > 0:
                yield g, a, None, False
            if b > 0:
                yield g, b, None, True


def exact_project_transform(
    mu: FiniteMeasure,
    aux,
    rule: ExtendedRule,
    epsilon=None,
    max_horizon: int = DEFAULT_MAX_HORIZON,
) -> TransformResult:
    """Exact projected law of x_T for the extended chain.

    Same frontier engine and mass-accounting contract as the plain exact
    transform; branches come from the rule's arcs.
    """
    if not mu.is_probability:
        raise NotProbabilityError(f"transform needs a probability measure, mass {mu.mass}")
    if epsilon is None:
        epsilon = default_epsilon(mu.mode)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    group = mu.group
    zero = coerce_weight(0, mu.mode)
    frontier: Dict[Tuple[Element, object], object] = {
        (group.identity(), rule.start()): coerce_weight(1, mu.mode)
    }
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
            for h, wh, s2, stop in rule.arcs(state, mu):
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


def _mc_project_chunk(mu, aux, rule, coupled, table, key, lo, hi, horizon_cap):
    group = mu.group
    counts: Dict[Element, int] = {}
    time_total = 0
    n_stopped = 0
    active = list(range(lo, hi))
    states = [rule.start() for _ in active]
    positions = [group.identity() for _ in active]
    step = 1
    while active and step <= horizon_cap:
        inc_counters = step_counters(active, step, CHANNEL_INCREMENT)
        if coupled:
            us = _backend.fill_uniforms(key, inc_counters)
            draws = [aux.locate(u)[0] for u in us]
            gammas = us
        else:
            idx = table.indices(key, inc_counters)
            draws = [table.elements[i] for i in idx]
            aux_counters = step_counters(active, step, CHANNEL_AUX)
            if isinstance(aux, IntervalAux):
                gammas = _backend.fill_uniforms(key, aux_counters)
            else:
                gammas = [aux.draw(key, int(c)) for c in aux_counters]
        keep_a: List[int] = []
        keep_s: List[object] = []
        keep_p: List[Element] = []
        for j, sample in enumerate(active):
            h = draws[j]
            state, stop = rule.step(states[j], h, gammas[j])
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


def monte_carlo_project_transform(
    mu: FiniteMeasure,
    aux,
    rule: ExtendedRule,
    samples: int,
    horizon_cap: int = DEFAULT_MAX_HORIZON,
    stream: SeededStream = SeededStream(0),
    coupled: Optional[bool] = None,
    workers: int = 1,
) -> TransformResult:
    """Empirical projected law of x_T under the extended chain."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if coupled is None:
        coupled = bool(getattr(rule, "coupled", False))
    if coupled and not isinstance(aux, IntervalAux):
        raise ValueError("coupled sampling requires an IntervalAux")
    table = None if coupled else SamplingTable(mu)
    key = stream.key()
    bounds = [samples * w // workers for w in range(workers + 1)]
    chunks = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    run = lambda c: _mc_project_chunk(
        mu, aux, rule, coupled, table, key, c[0], c[1], horizon_cap
    )
    if len(chunks) <= 1:
        results = [run((0, samples))]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(run, chunks))
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


def project_transform(
    mu: FiniteMeasure,
    aux,
    rule: ExtendedRule,
    mode: str = "exact",
    **params,
) -> TransformResult:
    """Law of x_T under the extended chain, projected to G."""
    if mode == "exact":
        return exact_project_transform(
            mu,
            aux,
            rule,
            epsilon=params.get("epsilon"),
            max_horizon=params.get("max_horizon", DEFAULT_MAX_HORIZON),
        )
    if mode == "montecarlo":
        return monte_carlo_project_transform(
            mu,
            aux,
            rule,
            samples=params["samples"],
            horizon_cap=params.get("horizon_cap", DEFAULT_MAX_HORIZON),
            stream=params.get("stream", SeededStream(0)),
            coupled=params.get("coupled"),
            workers=params.get("workers", 1),
        )
    raise ValueError(f"unknown projection mode {mode!r}")
