"""Executable checks: harmonicity preservation under the stopping transform,
Doob optional-stopping residuals, and entropy diagnostics.

Harmonic functions are represented as bounded evaluators; Monte Carlo ones
(the free-group cylinder function) carry per-point standard errors that the
downstream checks propagate into their tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import _backend, _kernel_py
from .groups import Element, FreeGroup, Group
from .measures import FiniteMeasure, shannon_entropy, convolve, dirac
from .paths import SeededStream, step_counters
from .stopping import StoppingRule, exact_transform, monte_carlo_transform


class UnstableEstimateError(RuntimeError):
    """Ray length too short to stabilize a boundary-cylinder estimate."""


@dataclass
class HarmonicFunction:
    """Bounded function on the group with a sup-norm bound.

    ``standard_error`` is nonzero for Monte Carlo estimates; checks fold it
    into their tolerances.
    """

    evaluate: Callable[[Element], float]
    bound_norm: float
    description: str
    standard_error: Callable[[Element], float] = field(default=lambda g: 0.0)

    def __call__(self, g) -> float:
        return self.evaluate(g)


@dataclass
class CheckReport:
    """Outcome of one verification check; pass iff max residual <= tolerance."""

    check_name: str
    points_tested: int
    max_residual: float
    tolerance: float
    passed: bool
    seeds: Tuple[int, ...] = ()
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.note})" if self.note else ""
        return (
            f"{status} {self.check_name}: residual {self.max_residual:.3e} "
            f"<= tol {self.tolerance:.3e} over {self.points_tested} points{extra}"
        )


def ball(group: Group, radius: int) -> Tuple[Element, ...]:
    """Word-metric ball of the standard generators, in canonical order."""
    seen = {group.identity()}
    frontier = {group.identity()}
    for _ in range(radius):
        frontier = {
            group.multiply(g, s) for g in frontier for s in group.generators()
        } - seen
        seen |= frontier
    return tuple(sorted(seen, key=group.sort_key))


def constant_function(c: float) -> HarmonicFunction:
    return HarmonicFunction(lambda g: c, abs(c), f"constant {c}")


def clipped_ratio_function(p, q, radius: int) -> HarmonicFunction:
    """f(n) = (q/p)^n on Z, clipped to the radius-R ball (absorbed boundary).

    Exactly harmonic for the (p, q) nearest-neighbor walk at every interior
    point |n| < R; checks must restrict to points whose mu_T-neighborhood
    stays interior.
    """
    r = float(q) / float(p)

    def f(g):
        n = g[0]
        n = max(-radius, min(radius, n))
        return r**n

    return HarmonicFunction(
        f, max(r**radius, r**-radius), f"clipped ({q}/{p})^n, radius {radius}"
    )


def interior_points(radius: int, reach: int) -> Tuple[Element, ...]:
    """Points of Z whose neighborhood of the given reach stays in the clipped ball."""
    return tuple((n,) for n in range(-(radius - reach), radius - reach + 1))


def _word_lane(word) -> int:
    """Stable 63-bit lane id for a free-group word (stream separation)."""
    h = _kernel_py._finalize_int(len(word) + 1)
    for letter in word:
        h = _kernel_py._finalize_int(h ^ (letter & _kernel_py.MASK64))
    return h & 0x7FFFFFFFFFFFFFFF


class CylinderHarmonic:
    """Boundary-cylinder harmonic function on F_k via ray sampling.

    f(g) estimates the probability that the SRW started at g converges to a
    boundary ray whose reduced word begins with the given prefix.  Values are
    cached per element together with their standard errors.
    """

    def __init__(
        self,
        group: FreeGroup,
        prefix,
        ray_samples: int,
        ray_length: int,
        stream: SeededStream,
    ):
        prefix = group.canonicalize(prefix)
        if not prefix:
            raise ValueError("prefix must be a nonempty reduced word")
        self.group = group
        self.prefix = prefix
        self.ray_samples = ray_samples
        self.ray_length = ray_length
        self.stream = stream
        self._cache: Dict[Element, Tuple[float, float]] = {}
        codes = []
        for i in range(1, group.rank + 1):
            codes.extend([i, -i])
        self._codes = np.array(codes, dtype=np.int8)

    def _estimate(self, g) -> Tuple[float, float]:
        n = self.ray_samples
        start = np.array(g, dtype=np.int8)
        words = np.zeros((n, len(g) + self.ray_length + 1), dtype=np.int8)
        if len(g):
            words[:, : len(g)] = start
        lengths = np.full(n, len(g), dtype=np.int64)
        rows = np.arange(n)
        key = self.stream.sublane(_word_lane(g)).key()
        n_gen = len(self._codes)
        for t in range(1, self.ray_length + 1):
            u = _backend.fill_uniforms(key, step_counters(rows, t))
            letters = self._codes[np.minimum((u * n_gen).astype(np.int64), n_gen - 1)]
            last = np.where(lengths > 0, words[rows, np.maximum(lengths - 1, 0)], 0)
            cancel = (lengths > 0) & (letters == -last)
            grow = ~cancel
            words[rows[grow], lengths[grow]] = letters[grow]
            lengths += np.where(cancel, -1, 1)
        k = len(self.prefix)
        hits = lengths >= k
        for j, letter in enumerate(self.prefix):
            hits &= words[:, j] == letter
        p = float(np.mean(hits))
        se = math.sqrt(max(p * (1 - p), 1.0 / n) / n)
        return p, se

    def _lookup(self, g) -> Tuple[float, float]:
        g = self.group.canonicalize(g)
        if len(g) >= self.ray_length:
            raise UnstableEstimateError(
                f"word length {len(g)} >= ray length {self.ray_length}"
            )
        if g not in self._cache:
            self._cache[g] = self._estimate(g)
        return self._cache[g]

    def evaluate(self, g) -> float:
        return self._lookup(g)[0]

    def standard_error(self, g) -> float:
        return self._lookup(g)[1]

    def as_harmonic(self) -> HarmonicFunction:
        return HarmonicFunction(
            self.evaluate,
            1.0,
            f"cylinder [{self.prefix}] on F_{self.group.rank}, "
            f"{self.ray_samples} rays x {self.ray_length}",
            standard_error=self.standard_error,
        )


def cylinder_harmonic(
    group: FreeGroup,
    prefix,
    ray_samples: int,
    ray_length: int,
    stream: SeededStream,
) -> HarmonicFunction:
    if group.rank < 2:
        raise ValueError("cylinder functions need a transient free group (k >= 2)")
    return CylinderHarmonic(group, prefix, ray_samples, ray_length, stream).as_harmonic()


def harmonicity_residual(
    f: HarmonicFunction,
    mu: FiniteMeasure,
    points: Sequence[Element],
    tolerance: float = 1e-9,
    name: str = "harmonicity",
) -> CheckReport:
    """max over points of |f(g) - sum_h f(gh) mu(h)|, with MC error folded in."""
    if not points:
        raise ValueError("points must be nonempty")
    group = mu.group
    worst, worst_tol = 0.0, tolerance
    margin = -math.inf
    for g in points:
        mean = 0.0
        se = f.standard_error(g)
        for h, w in mu.items_sorted():
            gh = group.multiply(g, h)
            mean += float(w) * f.evaluate(gh)
            se += float(w) * f.standard_error(gh)
        residual = abs(f.evaluate(g) - mean)
        tol = tolerance + 4 * se
        if residual - tol > margin:
            worst, worst_tol, margin = residual, tol, residual - tol
    return CheckReport(
        check_name=name,
        points_tested=len(points),
        max_residual=worst,
        tolerance=worst_tol,
        passed=worst <= worst_tol,
    )


def doob_check(
    f: HarmonicFunction,
    mu: FiniteMeasure,
    rule: StoppingRule,
    samples: int,
    stream: SeededStream,
    horizon_cap: int = 10_000,
    deficit_cap: float = 0.01,
    name: str = "doob",
) -> CheckReport:
    """|empirical E f(x_T) - f(e)| against 4 standard errors plus the deficit bound."""
    result = monte_carlo_transform(mu, rule, samples, horizon_cap, stream)
    deficit = float(result.mass_deficit)
    emp = result.measure
    mean = 0.0
    mean_sq = 0.0
    se_f = 0.0
    for g, w in emp.items_sorted():
        w = float(w)
        v = f.evaluate(g)
        mean += w * v
        mean_sq += w * v * v
        se_f += w * f.standard_error(g)
    identity = mu.group.identity()
    # unstopped paths are missing from the mean; bound them by the sup norm
    residual = abs(mean - f.evaluate(identity))
    se = math.sqrt(max(mean_sq - mean * mean, 0.0) / samples)
    tolerance = 4 * (se + se_f + f.standard_error(identity)) + deficit * f.bound_norm
    inconclusive = deficit > deficit_cap
    return CheckReport(
        check_name=name,
        points_tested=samples,
        max_residual=residual,
        tolerance=tolerance,
        passed=(residual <= tolerance) and not inconclusive,
        seeds=(stream.seed, stream.stream),
        note="inconclusive: mass deficit too large" if inconclusive else "",
    )


def transfer_check(
    f: HarmonicFunction,
    mu: FiniteMeasure,
    rule: StoppingRule,
    points: Sequence[Element],
    epsilon=None,
    tolerance: float = 1e-9,
    max_horizon: int = 10_000,
    name: str = "transfer",
) -> CheckReport:
    """mu_T-harmonicity residual of f at the given points.

    The testable content of boundary preservation: a function harmonic for mu
    stays harmonic for the transformed measure.  The truncation deficit of the
    exact transform contributes deficit * bound_norm to the tolerance.
    """
    result = exact_transform(mu, rule, epsilon=epsilon, max_horizon=max_horizon)
    tr = result.measure
    deficit = float(result.mass_deficit)
    worst, worst_tol = 0.0, tolerance
    margin = -math.inf
    for g in points:
        mean = 0.0
        se = f.standard_error(g)
        for h, w in tr.items_sorted():
            gh = mu.group.multiply(g, h)
            mean += float(w) * f.evaluate(gh)
            se += float(w) * f.standard_error(gh)
        residual = abs(f.evaluate(g) - mean)
        tol = tolerance + deficit * f.bound_norm + 4 * se
        if residual - tol > margin:
            worst, worst_tol, margin = residual, tol, residual - tol
    return CheckReport(
        check_name=name,
        points_tested=len(points),
        max_residual=worst,
        tolerance=worst_tol,
        passed=worst <= worst_tol,
        note=f"deficit {deficit:.3e}",
    )


def entropy_diagnostic(
    mu: FiniteMeasure, max_n: int, support_cap: int = 200_000
) -> List[Tuple[int, float]]:
    """Exact Shannon entropies of the convolution powers mu^{*n}, n = 1..max_n."""
    out = []
    power = dirac(mu.group, mu.group.identity(), mu.mode)
    for n in range(1, max_n + 1):
        power = convolve(power, mu)
        if len(power) > support_cap:
            raise RuntimeError(
                f"support of power {n} exceeds cap ({len(power)} > {support_cap})"
            )
        out.append((n, shannon_entropy(power)))
    return out
