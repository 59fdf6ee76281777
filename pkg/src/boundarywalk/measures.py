"""Algebra of finitely supported (sub)probability measures on a group.

Two arithmetic modes: "exact" (Fraction weights, identities hold exactly) and
"float" (64-bit floats).  Mode is a property of each measure and propagates
through every operation; mixing modes is an error.  Sub-probability measures
(mass < 1) are first-class -- splits and truncated series produce them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .groups import Element, Group, require_same_group

PROBABILITY_TOL = 1e-9  # float-mode tolerance for "is a probability measure"

EXACT = "exact"
FLOAT = "float"


class ModeMismatchError(ValueError):
    """Operands carry different arithmetic modes."""


class DegenerateSplitError(ValueError):
    """A split produced an empty alpha or beta part."""


class NotProbabilityError(ValueError):
    """Operation requires a probability measure."""


class SeriesError(RuntimeError):
    """Neumann series diverges or needs more terms than allowed."""


def coerce_weight(w, mode: str):
    """Coerce a weight literal (int, float, str, Fraction) to the mode's scalar."""
    if mode == EXACT:
        return Fraction(w)
    if mode == FLOAT:
        return float(w)
    raise ValueError(f"unknown arithmetic mode {mode!r}")


class FiniteMeasure:
    """Finitely supported nonnegative weight map over group elements."""

    __slots__ = ("group", "mode", "_weights", "_mass")

    def __init__(self, group: Group, weights: Mapping[Element, object], mode: str = EXACT):
        if mode not in (EXACT, FLOAT):
            raise ValueError(f"unknown arithmetic mode {mode!r}")
        acc: Dict[Element, object] = {}
        for g, w in weights.items():
            w = coerce_weight(w, mode)
            if w < 0:
                raise ValueError(f"negative weight {w} at {g!r}")
            if w == 0:
                continue
            key = group.canonicalize(g)
            acc[key] = acc.get(key, coerce_weight(0, mode)) + w
        self.group = group
        self.mode = mode
        self._weights = acc
        self._mass = sum(acc.values(), coerce_weight(0, mode))

    # -- basic accessors -------------------------------------------------

    @property
    def mass(self):
        return self._mass

    @property
    def is_probability(self) -> bool:
        if self.mode == EXACT:
            return self._mass == 1
        return abs(self._mass - 1.0) <= PROBABILITY_TOL

    def __call__(self, g) -> object:
        return self._weights.get(g, coerce_weight(0, self.mode))

    def __contains__(self, g) -> bool:
        return g in self._weights

    def __len__(self) -> int:
        return len(self._weights)

    def support(self) -> Tuple[Element, ...]:
        return tuple(sorted(self._weights, key=self.group.sort_key))

    def items_sorted(self):
        return [(g, self._weights[g]) for g in self.support()]

    def items(self):
        return self._weights.items()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return (
            self.group == other.group
            and self.mode == other.mode
            and self._weights == other._weights
        )

    def __hash__(self):
        return hash((self.group, self.mode, frozenset(self._weights.items())))

    def __repr__(self):
        entries = ", ".join(f"{g!r}: {w}" for g, w in self.items_sorted()[:6])
        more = "..." if len(self) > 6 else ""
        return f"FiniteMeasure({self.group!r}, {{{entries}{more}}}, mode={self.mode!r})"

    # -- mode / pointwise helpers ----------------------------------------

    def as_float(self) -> "FiniteMeasure":
        if self.mode == FLOAT:
            return self
        return FiniteMeasure(self.group, {g: float(w) for g, w in self.items()}, FLOAT)

    def scale(self, c) -> "FiniteMeasure":
        c = coerce_weight(c, self.mode)
        return FiniteMeasure(self.group, {g: w * c for g, w in self.items()}, self.mode)

    def restrict(self, keep) -> "FiniteMeasure":
        """Restriction to a set (or predicate) of elements."""
        pred = keep if callable(keep) else (lambda g, s=frozenset(keep): g in s)
        return FiniteMeasure(
            self.group, {g: w for g, w in self.items() if pred(g)}, self.mode
        )


def _check_compatible(mu: FiniteMeasure, nu: FiniteMeasure):
    require_same_group(mu.group, nu.group)
    if mu.mode != nu.mode:
        raise ModeMismatchError(f"mixed arithmetic modes: {mu.mode} vs {nu.mode}")


def dirac(group: Group, g, mode: str = EXACT) -> FiniteMeasure:
    return FiniteMeasure(group, {g: 1}, mode)


def uniform_on(group: Group, elements: Iterable[Element], mode: str = EXACT) -> FiniteMeasure:
    elems = [group.canonicalize(g) for g in elements]
    w = Fraction(1, len(elems)) if mode == EXACT else 1.0 / len(elems)
    return FiniteMeasure(group, {g: w for g in elems}, mode)


def add(mu: FiniteMeasure, nu: FiniteMeasure) -> FiniteMeasure:
    """Pointwise sum (masses add)."""
    _check_compatible(mu, nu)
    acc = dict(mu.items())
    for g, w in nu.items():
        acc[g] = acc.get(g, coerce_weight(0, mu.mode)) + w
    return FiniteMeasure(mu.group, acc, mu.mode)


def convolve(mu: FiniteMeasure, nu: FiniteMeasure) -> FiniteMeasure:
    """(mu*nu)(g) = sum_h mu(h) nu(h^-1 g); masses multiply."""
    _check_compatible(mu, nu)
    group = mu.group
    acc: Dict[Element, object] = {}
    zero = coerce_weight(0, mu.mode)
    for h, wh in mu.items():
        for k, wk in nu.items():
            g = group.multiply(h, k)
            acc[g] = acc.get(g, zero) + wh * wk
    return FiniteMeasure(group, acc, mu.mode)


def convolution_power(mu: FiniteMeasure, n: int) -> FiniteMeasure:
    if n < 0:
        raise ValueError("convolution power needs n >= 0")
    out = dirac(mu.group, mu.group.identity(), mu.mode)
    for _ in range(n):
        out = convolve(out, mu)
    return out


def convex_combine(terms) -> FiniteMeasure:
    """Pointwise weighted sum of measures; coefficients must sum to 1."""
    terms = [(c, m) for c, m in terms]
    if not terms:
        raise ValueError("empty combination")
    mode = terms[0][1].mode
    group = terms[0][1].group
    coeffs = [coerce_weight(c, mode) for c, _ in terms]
    if any(c < 0 for c in coeffs):
        raise ValueError("negative coefficient")
    total = sum(coeffs)
    if mode == EXACT:
        if total != 1:
            raise ValueError(f"coefficients sum to {total}, expected 1")
    elif abs(total - 1.0) > PROBABILITY_TOL:
        raise ValueError(f"coefficients sum to {total}, expected 1")
    acc: Dict[Element, object] = {}
    zero = coerce_weight(0, mode)
    for c, m in zip(coeffs, (m for _, m in terms)):
        _check_compatible(terms[0][1], m)
        for g, w in m.items():
            acc[g] = acc.get(g, zero) + c * w
    return FiniteMeasure(group, acc, mode)


def neumann_series(
    alpha: FiniteMeasure,
    beta: FiniteMeasure,
    epsilon,
    max_terms: int = 10_000,
) -> FiniteMeasure:
    """Truncation of sum_{n>=0} alpha^{*n} * beta with geometric tail <= epsilon.

    The residual mass past N terms is beta.mass * a^(N+1) / (1-a) with
    a = alpha.mass; the smallest sufficient N is found analytically before
    any convolution is computed.
    """
    _check_compatible(alpha, beta)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a = alpha.mass
    if a >= 1:
        raise SeriesError(f"alpha mass {a} >= 1: series diverges")
    n_terms = 0
    residual = beta.mass * a / (1 - a) if a > 0 else coerce_weight(0, alpha.mode)
    while residual > epsilon:
        n_terms += 1
        residual *= a
        if n_terms > max_terms:
            raise SeriesError(f"tolerance {epsilon} not met within {max_terms} terms")
    out = beta
    term = beta
    for _ in range(n_terms):
        term = convolve(alpha, term)
        out = add(out, term)
    return out


@dataclass(frozen=True)
class SplitPair:
    """mu = alpha + beta with both parts strictly sub-probability."""

    alpha: FiniteMeasure
    beta: FiniteMeasure


def _split_pair(mu: FiniteMeasure, alpha: FiniteMeasure, beta: FiniteMeasure) -> SplitPair:
    if alpha.mass == 0 or beta.mass == 0:
        raise DegenerateSplitError(
            f"degenerate split: |alpha|={alpha.mass}, |beta|={beta.mass}"
        )
    return SplitPair(alpha, beta)


def split_by_support(mu: FiniteMeasure, B: Iterable[Element]) -> SplitPair:
    """Mutually singular split: beta = mu|_B, alpha = mu|_{B complement}."""
    bset = frozenset(mu.group.canonicalize(g) for g in B)
    if not bset:
        raise ValueError("B must be nonempty")
    beta = mu.restrict(bset)
    alpha = mu.restrict(lambda g: g not in bset)
    return _split_pair(mu, alpha, beta)


def split_by_fraction(mu: FiniteMeasure, fraction: Mapping[Element, object]) -> SplitPair:
    """General split: beta(g) = fraction(g) mu(g); supports may overlap."""
    frac = {}
    for g, f in fraction.items():
        f = coerce_weight(f, mu.mode)
        if f < 0 or f > 1:
            raise ValueError(f"fraction {f} outside [0,1] at {g!r}")
        frac[mu.group.canonicalize(g)] = f
    zero = coerce_weight(0, mu.mode)
    one = coerce_weight(1, mu.mode)
    beta = FiniteMeasure(
        mu.group, {g: w * frac.get(g, zero) for g, w in mu.items()}, mu.mode
    )
    alpha = FiniteMeasure(
        mu.group, {g: w * (one - frac.get(g, zero)) for g, w in mu.items()}, mu.mode
    )
    return _split_pair(mu, alpha, beta)


def threshold_split(
    tau: FiniteMeasure, ref_weights: Mapping[Element, object], c
) -> SplitPair:
    """Density-threshold split: beta = tau on {g : tau(g)/ref(g) < c}.

    Discrete analog of splitting off the part of a measure with small density
    against a reference weighting.
    """
    if c <= 0:
        raise ValueError("threshold c must be positive")
    ref = {}
    for g, w in ref_weights.items():
        w = coerce_weight(w, tau.mode)
        if w <= 0:
            raise ValueError(f"reference weight must be positive at {g!r}")
        ref[tau.group.canonicalize(g)] = w
    missing = [g for g in tau.support() if g not in ref]
    if missing:
        raise ValueError(f"reference weights do not cover support: {missing[:3]}")
    below = frozenset(g for g, w in tau.items() if w / ref[g] < c)
    if not below:
        raise DegenerateSplitError("no density below threshold: choose larger c")
    beta = tau.restrict(below)
    alpha = tau.restrict(lambda g: g not in below)
    return _split_pair(tau, alpha, beta)


def total_variation(mu: FiniteMeasure, nu: FiniteMeasure):
    """(1/2) sum |mu(g) - nu(g)| over the union of supports."""
    _check_compatible(mu, nu)
    zero = coerce_weight(0, mu.mode)
    keys = set(mu._weights) | set(nu._weights)
    tv = sum((abs(mu(g) - nu(g)) for g in keys), zero)
    return tv / 2


def shannon_entropy(mu: FiniteMeasure) -> float:
    """-sum mu(g) log mu(g), natural log; requires a probability measure."""
    if not mu.is_probability:
        raise NotProbabilityError(f"mass is {mu.mass}, not 1")
    return -sum(float(w) * math.log(float(w)) for _, w in mu.items())


def warn_if_not_generating(mu: FiniteMeasure, radius: int = 4):
    """Heuristic check that supp(mu) generates the group; warns, never raises.

    Builds the ball of products of supp(mu) and its inverses up to the given
    radius and checks it contains the group's standard generators.
    """
    group = mu.group
    seed = set(mu.support())
    seed |= {group.inverse(g) for g in seed}
    ball = {group.identity()} | seed
    frontier = set(seed)
    for _ in range(radius - 1):
        frontier = {group.multiply(a, s) for a in frontier for s in seed} - ball
        if not frontier:
            break
        ball |= frontier
    missing = [g for g in group.generators() if g not in ball]
    if missing:
        warnings.warn(
            f"support of measure may not generate the group "
            f"(generators not reached within radius {radius}: {missing[:3]})",
            stacklevel=2,
        )
    return not missing
