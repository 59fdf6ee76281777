"""Standard walk measures on the built-in groups (test and CLI defaults)."""

from __future__ import annotations

from .groups import Cyclic, FreeGroup, IntLattice, Lamplighter
from .measures import EXACT, FiniteMeasure, coerce_weight, dirac, uniform_on


def lattice_srw(rank: int = 1, mode: str = EXACT) -> FiniteMeasure:
    """Simple random walk on Z^k: uniform over the 2k unit steps."""
    group = IntLattice(rank)
    return uniform_on(group, group.generators(), mode)


def biased_z_walk(p, q=None, mode: str = EXACT) -> FiniteMeasure:
    """Walk on Z with step +1 w.p. p and -1 w.p. q (default 1-p)."""
    group = IntLattice(1)
    p = coerce_weight(p, mode)
    q = coerce_weight(1, mode) - p if q is None else coerce_weight(q, mode)
    return FiniteMeasure(group, {(1,): p, (-1,): q}, mode)


def cyclic_delta_walk(modulus: int = 2, step: int = 1, mode: str = EXACT) -> FiniteMeasure:
    """Deterministic walk on Z_m: point mass at one residue."""
    return dirac(Cyclic(modulus), step, mode)


def free_srw(rank: int = 2, mode: str = EXACT) -> FiniteMeasure:
    """Uniform walk on the 2k standard generators of F_k."""
    group = FreeGroup(rank)
    return uniform_on(group, group.generators(), mode)


def lamplighter_walk(rank: int = 1, mode: str = EXACT) -> FiniteMeasure:
    """Standard lamplighter walk: uniform over the 2k moves and the toggle at
    the origin."""
    group = Lamplighter(rank)
    return uniform_on(group, group.generators(), mode)
