"""Stopping-time transforms of random walks on groups.

Exact and Monte Carlo computation of the transformed measure of a random walk
stopped by a Markov rule, the extended chain on G x X, and the measure
identities the two constructions satisfy (convolution powers, Neumann series,
convex combinations of powers, overlapping splits).
"""

from ._backend import BACKEND
from .extension import (
    AuxFirstCoordinateRule,
    BetaFlagRule,
    DiscreteAux,
    ExtendedPrefix,
    IntervalAux,
    project_transform,
    sample_extended,
)
from .groups import Cyclic, FreeGroup, Group, IntLattice, Lamplighter
from .measures import (
    FiniteMeasure,
    SplitPair,
    convex_combine,
    convolution_power,
    convolve,
    dirac,
    neumann_series,
    shannon_entropy,
    split_by_fraction,
    split_by_support,
    threshold_split,
    total_variation,
)
from .paths import PathPrefix, SeededStream, increment_shift, left_shift, sample_prefix
from .stopping import (
    ConstantRule,
    FirstIncrementRule,
    FirstVisitRule,
    PrefixRule,
    SequentialRule,
    StoppingRule,
    TransformResult,
    exact_transform,
    iterate_stops,
    monte_carlo_transform,
    sequential_compose,
)
from .verify import (
    CheckReport,
    CylinderHarmonic,
    HarmonicFunction,
    clipped_ratio_function,
    constant_function,
    cylinder_harmonic,
    doob_check,
    entropy_diagnostic,
    harmonicity_residual,
    transfer_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
