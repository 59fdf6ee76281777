"""Canonical-form element arithmetic for the concrete groups used by the walk machinery.

Four group families are supported:

* ``IntLattice(k)``   -- Z^k, elements are k-tuples of ints
* ``Cyclic(m)``       -- Z_m, elements are ints in range(m)
* ``FreeGroup(k)``    -- F_k, elements are reduced words: tuples of nonzero
                         ints in +-1..+-k (sign = inverse)
* ``Lamplighter(k)``  -- Z^k wreath Z_2, elements are (position, lamps) with
                         lamps a sorted tuple of lit sites (k-tuples)

Elements are plain immutable payloads (ints / tuples); the group object owns
the operations.  Canonical form is unique, so structural equality is group
equality and payloads hash cheaply as measure keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Tuple

Element = Any  # payload type varies per group family


class GroupError(ValueError):
    """Structural error: malformed element or mismatched group kinds."""


@dataclass(frozen=True)
class Group:
    """Base class; subclasses implement the operations on canonical payloads."""

    kind = "abstract"

    def identity(self) -> Element:
        raise NotImplementedError

    def multiply(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inverse(self, a: Element) -> Element:
        raise NotImplementedError

    def canonicalize(self, a: Element) -> Element:
        """Return the canonical payload for ``a``, validating structure."""
        raise NotImplementedError

    def sort_key(self, a: Element):
        """Total order on canonical payloads; only used for deterministic output."""
        return a

    def generators(self) -> Tuple[Element, ...]:
        """Standard symmetric generating set (used by the generating-support heuristic)."""
        raise NotImplementedError

    def product(self, elements) -> Element:
        out = self.identity()
        for g in elements:
            out = self.multiply(out, g)
        return out


@dataclass(frozen=True)
class IntLattice(Group):
    """Z^k under addition."""

    rank: int = 1
    kind = "lattice"

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("lattice rank must be >= 1")

    def identity(self):
        return (0,) * self.rank

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def canonicalize(self, a):
        a = tuple(a)
        if len(a) != self.rank or not all(isinstance(x, int) for x in a):
            raise GroupError(f"not a Z^{self.rank} element: {a!r}")
        return a

    def generators(self):
        gens = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            gens.append(tuple(e))
            e[i] = -1
            gens.append(tuple(e))
        return tuple(gens)


@dataclass(frozen=True)
class Cyclic(Group):
    """Z_m under addition mod m."""

    modulus: int = 2
    kind = "cyclic"

    def __post_init__(self):
        if self.modulus < 1:
            raise GroupError("cyclic modulus must be >= 1")

    def identity(self):
        return 0

    def multiply(self, a, b):
        return (a + b) % self.modulus

    def inverse(self, a):
        return (-a) % self.modulus

    def canonicalize(self, a):
        if not isinstance(a, int):
            raise GroupError(f"not a Z_{self.modulus} element: {a!r}")
        return a % self.modulus

    def generators(self):
        if self.modulus == 1:
            return (0,)
        return tuple({1, self.modulus - 1})


def reduce_word(letters) -> Tuple[int, ...]:
    """Freely reduce a word (iterable of nonzero ints); eager cancellation."""
    out: list = []
    for g in letters:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


@dataclass(frozen=True)
class FreeGroup(Group):
    """Free group F_k on generators 1..k; letter -i is the inverse of i."""

    rank: int = 2
    kind = "free"

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("free rank must be >= 1")

    def identity(self):
        return ()

    def multiply(self, a, b):
        # a is already reduced; cancellation can only happen at the seam
        out = list(a)
        for g in b:
            if out and out[-1] == -g:
                out.pop()
            else:
                out.append(g)
        return tuple(out)

    def inverse(self, a):
        return tuple(-g for g in reversed(a))

    def canonicalize(self, a):
        word = tuple(a)
        for g in word:
            if not isinstance(g, int) or g == 0 or abs(g) > self.rank:
                raise GroupError(f"bad letter {g!r} for F_{self.rank}")
        return reduce_word(word)

    def sort_key(self, a):
        # length-lexicographic: deterministic and keeps small balls first
        return (len(a), a)

    def generators(self):
        gens = []
        for i in range(1, self.rank + 1):
            gens.append((i,))
            gens.append((-i,))
        return tuple(gens)


@dataclass(frozen=True)
class Lamplighter(Group):
    """Z^k acting on finitely supported Z_2 lamp configurations over Z^k.

    Element payload: ``(position, lamps)`` where position is a k-tuple and
    lamps is a sorted tuple of lit sites (each a k-tuple).  Off lamps are
    absent, so the payload is canonical by construction.
    """

    rank: int = 1
    kind = "lamplighter"

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("lamplighter rank must be >= 1")

    def identity(self):
        return ((0,) * self.rank, ())

    def multiply(self, a, b):
        (s, f), (t, g) = a, b
        pos = tuple(x + y for x, y in zip(s, t))
        shifted = {tuple(x + y for x, y in zip(s, site)) for site in g}
        lamps = set(f) ^ shifted
        return (pos, tuple(sorted(lamps)))

    def inverse(self, a):
        s, f = a
        neg = tuple(-x for x in s)
        lamps = {tuple(x + y for x, y in zip(neg, site)) for site in f}
        return (neg, tuple(sorted(lamps)))

    def canonicalize(self, a):
        pos, lamps = a
        pos = tuple(pos)
        if len(pos) != self.rank or not all(isinstance(x, int) for x in pos):
            raise GroupError(f"bad lamplighter position: {pos!r}")
        sites = []
        for site in lamps:
            site = tuple(site)
            if len(site) != self.rank or not all(isinstance(x, int) for x in site):
                raise GroupError(f"bad lamp site: {site!r}")
            sites.append(site)
        if len(set(sites)) != len(sites):
            raise GroupError("duplicate lamp site")
        return (pos, tuple(sorted(sites)))

    def sort_key(self, a):
        pos, lamps = a
        return (pos, len(lamps), lamps)

    def generators(self):
        gens = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            gens.append((tuple(e), ()))
            e[i] = -1
            gens.append((tuple(e), ()))
        origin = (0,) * self.rank
        gens.append((origin, (origin,)))
        return tuple(gens)


def require_same_group(a: Group, b: Group):
    if a != b:
        raise GroupError(f"mismatched groups: {a!r} vs {b!r}")
