"""Independent oracles used by the tests.

Everything here recomputes expected values by a different route than the
library code it checks: direct enumeration without state merging, brute-force
generator sequences for the lamplighter product, distance-chain dynamic
programming for free-group return probabilities, and a small linear solve for
boundary-cylinder values.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from boundarywalk.paths import PathPrefix


def enumerate_transform(mu, rule, depth):
    """Depth-limited recursive enumeration of the stopped law, no merging.

    The rule is consulted only through its prefix verdict (replayed from
    scratch on materialized prefixes), independent of the frontier engine.
    Returns (weights dict, deficit).
    """
    group = mu.group
    items = mu.items_sorted()
    weights = {}
    deficit = [Fraction(0) if mu.mode == "exact" else 0.0]

    def rec(increments, w, n):
        if n == depth:
            deficit[0] += w
            return
        for h, wh in items:
            incs = increments + (h,)
            w2 = w * wh
            prefix = PathPrefix(group, incs)
            if rule.verdict(prefix):
                pos = prefix.positions[-1]
                weights[pos] = weights.get(pos, 0) + w2
            else:
                rec(incs, w2, n + 1)

    one = Fraction(1) if mu.mode == "exact" else 1.0
    rec((), one, 0)
    return weights, deficit[0]


def lamplighter_generator_sequence(element):
    """Decompose a rank-1 lamplighter element into elementary generator moves.

    Yields "+", "-" (position moves) and "t" (toggle at the current position);
    applying them left to right from the identity reproduces the element.
    """
    pos, lamps = element
    here = 0
    for (site,) in sorted(lamps):
        while here < site:
            yield "+"
            here += 1
        while here > site:
            yield "-"
            here -= 1
        yield "t"
    target = pos[0]
    while here < target:
        yield "+"
        here += 1
    while here > target:
        yield "-"
        here -= 1


def lamplighter_brute_product(a, b):
    """Product of two rank-1 lamplighter elements by replaying generator moves.

    Applies the generator sequences of a then b to an explicit
    (position, lamp set) state; each elementary move is trivially correct,
    so the composite is an independent check of the closed-form product.
    """
    here = 0
    lit = set()
    for move in list(lamplighter_generator_sequence(a)) + list(
        lamplighter_generator_sequence(b)
    ):
        if move == "+":
            here += 1
        elif move == "-":
            here -= 1
        else:
            lit ^= {here}
    return ((here,), tuple(sorted((x,) for x in lit)))


def free_group_return_probability_by(depth: int) -> Fraction:
    """P(SRW on F_2 returns to e within `depth` steps), via the distance chain.

    The distance from e is a birth-death chain: up with probability 3/4, down
    with 1/4 (from distance >= 1); state 0 is absorbing once revisited.
    """
    # dist[d] = probability of being at distance d without having returned
    dist = {1: Fraction(1)}  # after the first step
    returned = Fraction(0)
    for _ in range(depth - 1):
        nxt = {}
        for d, p in dist.items():
            if d == 1:
                returned += p * Fraction(1, 4)
            else:
                nxt[d - 1] = nxt.get(d - 1, Fraction(0)) + p * Fraction(1, 4)
            nxt[d + 1] = nxt.get(d + 1, Fraction(0)) + p * Fraction(3, 4)
        dist = nxt
    return returned


def cylinder_value_exact(word, prefix_letter: int) -> float:
    """Closed-form boundary-cylinder probability for SRW on F_2.

    From a word at distance d, the walk hits e ever with probability (1/3)^d
    (and then restarts symmetrically); otherwise the limit stays in the
    subtree of the word's first letter.
    """
    d = len(word)
    if d == 0:
        return 0.25
    hit = (1.0 / 3.0) ** d
    stays = 1.0 if word[0] == prefix_letter else 0.0
    return hit * 0.25 + (1 - hit) * stays


def cylinder_value_linear_solve(word, prefix_letter: int, radius: int = 8) -> float:
    """Boundary-cylinder probability by a finite linear solve.

    Collapses the radius-R ball by symmetry to states (distance, in-subtree)
    and solves the harmonicity system with absorbed boundary values
    1 (in-subtree) / 0 (out) at distance R.
    """
    # unknowns: f0, f_in[1..R-1], f_out[1..R-1]
    n = 1 + 2 * (radius - 1)
    A = np.zeros((n, n))
    rhs = np.zeros(n)

    def idx(d, inside):
        if d == 0:
            return 0
        return d if inside else radius - 1 + d

    A[0, 0] = 1.0
    A[0, idx(1, True)] -= 0.25
    A[0, idx(1, False)] -= 0.75
    for inside in (True, False):
        for d in range(1, radius):
            row = idx(d, inside)
            A[row, row] = 1.0
            down = 0 if d == 1 else idx(d - 1, inside)
            A[row, down] -= 0.25
            if d + 1 < radius:
                A[row, idx(d + 1, inside)] -= 0.75
            else:
                rhs[row] += 0.75 * (1.0 if inside else 0.0)
    sol = np.linalg.solve(A, rhs)
    if len(word) == 0:
        return float(sol[0])
    inside = word[0] == prefix_letter
    d = min(len(word), radius - 1)
    return float(sol[idx(d, inside)])


def binomial_entropy(n: int) -> float:
    """Entropy of Binomial(n, 1/2) -- the law of the SRW position on Z after n steps."""
    from math import comb, log

    return -sum(
        (comb(n, k) / 2**n) * log(comb(n, k) / 2**n) for k in range(n + 1)
    )


def geometric_first_increment_weights(horizon: int):
    """Exact stopped law for SRW on Z with B = {-1}: weight 2^-(k+2) at k = n-2."""
    return {(n - 2,): Fraction(1, 2**n) for n in range(1, horizon + 1)}
