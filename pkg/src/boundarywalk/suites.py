"""Named check bundles driven by the CLI `verify` subcommand.

Each bundle returns a list of CheckReports.  The identities bundle exercises
the exact measure identities (constant rule, composition, geometric series,
convex combination via the extension, overlapping split); doob and transfer
run the martingale-based checks on the built-in harmonic functions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List

from .extension import (
    AuxFirstCoordinateRule,
    BetaFlagRule,
    DiscreteAux,
    IntervalAux,
    exact_project_transform,
)
from .groups import FreeGroup
from .measures import (
    FiniteMeasure,
    convex_combine,
    convolution_power,
    convolve,
    neumann_series,
    split_by_fraction,
    split_by_support,
    total_variation,
)
from .paths import SeededStream
from .stopping import (
    ConstantRule,
    FirstIncrementRule,
    exact_transform,
    sequential_compose,
)
from .verify import (
    CheckReport,
    CylinderHarmonic,
    ball,
    clipped_ratio_function,
    doob_check,
    transfer_check,
)
from .walks import (
    biased_z_walk,
    cyclic_delta_walk,
    free_srw,
    lamplighter_walk,
    lattice_srw,
)

EPS = Fraction(1, 2**20)


def _tv_report(name: str, mu_a, mu_b, tolerance) -> CheckReport:
    tv = float(total_variation(mu_a, mu_b))
    return CheckReport(
        check_name=name,
        points_tested=len(set(mu_a.support()) | set(mu_b.support())),
        max_residual=tv,
        tolerance=float(tolerance),
        passed=tv <= tolerance,
    )


def run_identities(seed: int = 0) -> List[CheckReport]:
    reports = []
    walks = {
        "Z2": cyclic_delta_walk(2),
        "Z": lattice_srw(1),
        "F2": free_srw(2),
        "lamplighter": lamplighter_walk(1),
    }
    for label, mu in walks.items():
        for n in (1, 2, 3):
            res = exact_transform(mu, ConstantRule(n), epsilon=EPS)
            reports.append(
                _tv_report(
                    f"constant-rule identity {label} n={n}",
                    res.measure,
                    convolution_power(mu, n),
                    0,
                )
            )

    z = lattice_srw(1)
    rule1 = ConstantRule(2)
    rule2 = FirstIncrementRule(z.group, [(-1,)])
    composed = exact_transform(z, sequential_compose(rule1, rule2), epsilon=EPS)
    pieces = convolve(
        exact_transform(z, rule1, epsilon=EPS).measure,
        exact_transform(z, rule2, epsilon=EPS).measure,
    )
    reports.append(
        _tv_report("composition identity Z", composed.measure, pieces, 2 * EPS)
    )

    geo = exact_transform(z, rule2, epsilon=EPS)
    split = split_by_support(z, [(-1,)])
    series = neumann_series(split.alpha, split.beta, EPS)
    reports.append(
        _tv_report("geometric-series identity Z", geo.measure, series, 2 * EPS)
    )

    for label in ("Z2", "Z"):
        mu = walks[label]
        aux = DiscreteAux([1, 2, 3], [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])
        proj = exact_project_transform(mu, aux, AuxFirstCoordinateRule(aux), epsilon=EPS)
        combo = convex_combine(
            [
                (Fraction(1, 2), convolution_power(mu, 1)),
                (Fraction(1, 4), convolution_power(mu, 2)),
                (Fraction(1, 4), convolution_power(mu, 3)),
            ]
        )
        reports.append(
            _tv_report(f"convex combination via extension {label}", proj.measure, combo, 0)
        )

    mu2 = walks["Z2"]
    split2 = split_by_fraction(mu2, {1: Fraction(1, 2)})
    aux2 = IntervalAux(mu2, split2)
    proj2 = exact_project_transform(mu2, aux2, BetaFlagRule(aux2), epsilon=EPS)
    oracle = FiniteMeasure(mu2.group, {1: Fraction(2, 3), 0: Fraction(1, 3)})
    reports.append(
        _tv_report("overlapping split Z2", proj2.measure, oracle, 2 * EPS)
    )
    return reports


def run_doob(seed: int = 0, samples: int = 100_000) -> List[CheckReport]:
    reports = []
    z = biased_z_walk(Fraction(2, 3))
    f = clipped_ratio_function(Fraction(2, 3), Fraction(1, 3), radius=40)
    reports.append(
        doob_check(
            f, z, ConstantRule(2), samples, SeededStream(seed, 1), name="doob Z constant(2)"
        )
    )
    reports.append(
        doob_check(
            f,
            z,
            FirstIncrementRule(z.group, [(-1,)]),
            samples,
            SeededStream(seed, 2),
            name="doob Z first-increment",
        )
    )
    f2 = FreeGroup(2)
    mu = free_srw(2)
    cyl = CylinderHarmonic(f2, (1,), max(samples // 10, 1000), 40, SeededStream(seed, 3))
    reports.append(
        doob_check(
            cyl.as_harmonic(),
            mu,
            FirstIncrementRule(f2, [(2,), (-2,)]),
            samples,
            SeededStream(seed, 4),
            name="doob F2 cylinder first-increment",
        )
    )
    return reports


def run_transfer(seed: int = 0, ray_samples: int = 100_000) -> List[CheckReport]:
    reports = []
    z = biased_z_walk(Fraction(2, 3))
    radius = 60
    f = clipped_ratio_function(Fraction(2, 3), Fraction(1, 3), radius=radius)
    # points chosen so that point + supp(mu_T) stays interior to the clipped ball
    for name, rule, points in [
        ("transfer Z constant(2)", ConstantRule(2), [(n,) for n in range(-9, 11)]),
        (
            "transfer Z first-increment",
            FirstIncrementRule(z.group, [(-1,)]),
            [(n,) for n in range(-5, 15)],
        ),
    ]:
        reports.append(
            transfer_check(f, z, rule, points, epsilon=EPS, name=name)
        )
    f2 = FreeGroup(2)
    mu = free_srw(2)
    cyl = CylinderHarmonic(f2, (1,), ray_samples, 40, SeededStream(seed, 5))
    points = ball(f2, 1)
    reports.append(
        transfer_check(
            cyl.as_harmonic(),
            mu,
            ConstantRule(2),
            points,
            epsilon=EPS,
            tolerance=0.0,
            name="transfer F2 cylinder constant(2)",
        )
    )
    return reports


BUNDLES = {
    "identities": lambda seed, samples: run_identities(seed),
    "doob": lambda seed, samples: run_doob(seed, samples),
    "transfer": lambda seed, samples: run_transfer(seed, samples),
}


def run_bundle(name: str, seed: int = 0, samples: int = 100_000) -> List[CheckReport]:
    if name == "all":
        out = []
        for key in ("identities", "doob", "transfer"):
            out.extend(BUNDLES[key](seed, samples))
        return out
    if name not in BUNDLES:
        raise KeyError(name)
    return BUNDLES[name](seed, samples)
