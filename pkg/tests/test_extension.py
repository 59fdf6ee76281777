"""Extended chain on G x X: auxiliary spaces, extended rules, projection."""

import math
from fractions import Fraction

import pytest

from boundarywalk.extension import (
    AuxFirstCoordinateRule,
    BetaFlagRule,
    DiscreteAux,
    ExtendedPrefix,
    IntervalAux,
    exact_project_transform,
    monte_carlo_project_transform,
    project_transform,
    sample_extended,
)
from boundarywalk.groups import Cyclic, IntLattice
from boundarywalk.measures import (
    FiniteMeasure,
    SplitPair,
    convex_combine,
    convolution_power,
    dirac,
    neumann_series,
    split_by_fraction,
    split_by_support,
    total_variation,
)
from boundarywalk.paths import SeededStream, sample_prefix
from boundarywalk.walks import cyclic_delta_walk, lamplighter_walk, lattice_srw

Z = IntLattice(1)
Z2 = Cyclic(2)
EPS = Fraction(1, 2**20)
half = Fraction(1, 2)
quarter = Fraction(1, 4)


# -- auxiliary spaces -------------------------------------------------------------


def test_discrete_aux_validation():
    DiscreteAux([1, 2], [half, half])
    with pytest.raises(ValueError):
        DiscreteAux([1, 2], [half])
    with pytest.raises(ValueError):
        DiscreteAux([1, 2], [Fraction(3, 4), half])
    with pytest.raises(ValueError):
        DiscreteAux([1, 2], [Fraction(3, 2), Fraction(-1, 2)])


def test_interval_aux_partition_geometry():
    mu = lattice_srw(1)
    pair = split_by_support(mu, [(-1,)])
    aux = IntervalAux(mu, pair)
    # cells in canonical order: I_{-1} = (0, 1/2] all beta, I_{+1} all alpha
    assert aux.locate(0.25) == ((-1,), True)
    assert aux.locate(0.75) == ((1,), False)
    assert aux.in_beta_part((-1,), 0.1)
    assert not aux.in_beta_part((1,), 0.9)


def test_interval_aux_overlapping_cells():
    mu = dirac(Z2, 1)
    aux = IntervalAux(mu, split_by_fraction(mu, {1: half}))
    assert aux.locate(0.25) == (1, False)
    assert aux.locate(0.75) == (1, True)
    assert aux.beta_coin(1, 0.75)
    assert not aux.beta_coin(1, 0.25)


def test_interval_aux_rejects_foreign_split():
    mu = lattice_srw(1)
    other = FiniteMeasure(Z, {(1,): half, (0,): half})
    with pytest.raises(ValueError):
        IntervalAux(mu, split_by_support(other, [(0,)]))


# -- extended sampling -------------------------------------------------------------


def test_uncoupled_discrete_projection_is_plain_walk():
    # a one-point auxiliary space carries no information: the projected path
    # reuses the same increment draws as the plain sampler
    mu = lattice_srw(1)
    aux = DiscreteAux([1], [1])
    ext = sample_extended(mu, aux, 25, SeededStream(3))
    plain = sample_prefix(mu, 25, SeededStream(3))
    assert ext.path.increments == plain.increments
    assert all(gamma == 1 for _, gamma in ext.pairs)


def test_coupled_increments_have_walk_law():
    mu = lattice_srw(1)
    aux = IntervalAux(mu, split_by_support(mu, [(-1,)]))
    n = 20_000
    ext = sample_extended(mu, aux, n, SeededStream(5), coupled=True)
    ups = sum(1 for h, _ in ext.pairs if h == (1,))
    assert abs(ups / n - 0.5) < 5 * 0.5 / math.sqrt(n)
    # the auxiliary draw always lies in the cell of its own increment
    for h, gamma in ext.pairs[:200]:
        assert aux.locate(gamma)[0] == h


def test_uncoupled_draws_independent_of_increments():
    mu = lattice_srw(1)
    aux = IntervalAux(mu, split_by_support(mu, [(-1,)]))
    n = 40_000
    ext = sample_extended(mu, aux, n, SeededStream(6), coupled=False)
    joint = sum(1 for h, g in ext.pairs if h == (1,) and g < 0.5) / n
    ph = sum(1 for h, _ in ext.pairs if h == (1,)) / n
    pg = sum(1 for _, g in ext.pairs if g < 0.5) / n
    assert abs(joint - ph * pg) < 5 / math.sqrt(n)


def test_coupled_requires_interval_aux():
    mu = lattice_srw(1)
    with pytest.raises(ValueError):
        sample_extended(mu, DiscreteAux([1], [1]), 5, SeededStream(0), coupled=True)


def test_extended_prefix_path_view():
    ext = ExtendedPrefix(Z, [((1,), 0.2), ((-1,), 0.9)])
    assert ext.path.positions == ((1,), (0,))
    assert len(ext) == 2


# -- first-coordinate rule: convex combinations of powers ----------------------------


def convex_aux():
    return DiscreteAux([1, 2, 3], [half, quarter, quarter])


@pytest.mark.parametrize(
    "mu",
    [cyclic_delta_walk(2), lattice_srw(1), lamplighter_walk(1)],
)
def test_aux_first_coordinate_exact(mu):
    aux = convex_aux()
    res = exact_project_transform(mu, aux, AuxFirstCoordinateRule(aux), epsilon=EPS)
    combo = convex_combine(
        [(a, convolution_power(mu, b)) for b, a in zip([1, 2, 3], aux.weights)]
    )
    assert res.measure == combo
    assert res.mass_deficit == 0
    assert res.mean_stopping_time == pytest.approx(1.75)


def test_z2_half_half_beyond_plain_rules():
    # ½(δ0+δ1) on Z_2: reachable through the extension, while any plain rule
    # transform of δ1 is supported on a single parity class per stop index
    mu = cyclic_delta_walk(2)
    aux = DiscreteAux([1, 2], [half, half])
    res = exact_project_transform(mu, aux, AuxFirstCoordinateRule(aux), epsilon=EPS)
    assert res.measure == FiniteMeasure(Z2, {0: half, 1: half})


def test_aux_rule_stopping_time_on_prefix():
    aux = convex_aux()
    rule = AuxFirstCoordinateRule(aux)
    ext = ExtendedPrefix(Z, [((1,), 3), ((1,), 1), ((-1,), 2)])
    assert rule.stopping_time(ext) == 3  # gamma_1 = 3 decides; later draws ignored
    assert rule.horizon_bound == 3
    with pytest.raises(ValueError):
        AuxFirstCoordinateRule(DiscreteAux([0, 1], [half, half]))


def test_aux_first_coordinate_monte_carlo():
    mu = lattice_srw(1)
    aux = convex_aux()
    rule = AuxFirstCoordinateRule(aux)
    exact = exact_project_transform(mu, aux, rule, epsilon=EPS).measure.as_float()
    res = monte_carlo_project_transform(
        mu, aux, rule, 50_000, stream=SeededStream(8)
    )
    assert float(total_variation(res.measure.as_float(), exact)) < 1.5e-2
    assert res.mass_deficit == 0


# -- beta-flag rule: Neumann series, overlapping splits ------------------------------


def test_beta_flag_disjoint_split_matches_plain_geometric():
    mu = lattice_srw(1)
    pair = split_by_support(mu, [(-1,)])
    aux = IntervalAux(mu, pair)
    res = exact_project_transform(mu, aux, BetaFlagRule(aux), epsilon=EPS)
    series = neumann_series(pair.alpha, pair.beta, EPS)
    assert total_variation(res.measure, series) <= 2 * EPS
    for k in range(-1, 15):
        assert res.measure((k,)) == Fraction(1, 2 ** (k + 2))


def test_beta_flag_overlapping_split_z2():
    mu = cyclic_delta_walk(2)
    aux = IntervalAux(mu, split_by_fraction(mu, {1: half}))
    res = exact_project_transform(mu, aux, BetaFlagRule(aux), epsilon=EPS)
    oracle = FiniteMeasure(Z2, {1: Fraction(2, 3), 0: Fraction(1, 3)})
    assert total_variation(res.measure, oracle) <= 2 * EPS
    assert res.mass_deficit <= EPS


def test_beta_flag_full_beta_is_one_step():
    # beta = mu: the flag fires at every step, so T = 1 and the projection is mu
    mu = cyclic_delta_walk(2)
    zero = FiniteMeasure(Z2, {})
    aux = IntervalAux(mu, SplitPair(zero, mu))
    res = exact_project_transform(mu, aux, BetaFlagRule(aux), epsilon=EPS)
    assert res.measure == mu
    assert res.mean_stopping_time == 1


def test_beta_flag_coupled_and_uncoupled_agree():
    mu = cyclic_delta_walk(2)
    aux = IntervalAux(mu, split_by_fraction(mu, {1: half}))
    oracle = FiniteMeasure(
        Z2, {1: Fraction(2, 3), 0: Fraction(1, 3)}
    ).as_float()
    for coupled in (True, False):
        res = monte_carlo_project_transform(
            mu,
            aux,
            BetaFlagRule(aux, coupled=coupled),
            50_000,
            stream=SeededStream(9),
        )
        assert float(total_variation(res.measure.as_float(), oracle)) < 1e-2


def test_beta_flag_worker_invariance():
    mu = lattice_srw(1)
    aux = IntervalAux(mu, split_by_support(mu, [(-1,)]))
    rule = BetaFlagRule(aux)
    a = monte_carlo_project_transform(mu, aux, rule, 4000, stream=SeededStream(2), workers=1)
    b = monte_carlo_project_transform(mu, aux, rule, 4000, stream=SeededStream(2), workers=4)
    assert a.measure == b.measure


def test_beta_flag_rejects_foreign_measure():
    mu = cyclic_delta_walk(2)
    aux = IntervalAux(mu, split_by_fraction(mu, {1: half}))
    other = FiniteMeasure(Z2, {0: half, 1: half})
    with pytest.raises(ValueError):
        list(BetaFlagRule(aux).arcs(None, other))


def test_project_transform_dispatch():
    mu = cyclic_delta_walk(2)
    aux = convex_aux()
    rule = AuxFirstCoordinateRule(aux)
    exact = project_transform(mu, aux, rule, mode="exact", epsilon=EPS)
    mc = project_transform(
        mu, aux, rule, mode="montecarlo", samples=2000, stream=SeededStream(1)
    )
    assert exact.measure.support() == mc.measure.support()
    with pytest.raises(ValueError):
        project_transform(mu, aux, rule, mode="nope")
