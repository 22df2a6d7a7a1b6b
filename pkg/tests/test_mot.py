import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_instance, random_table, scipy_mot_value
from motline.errors import NotMartingale, UnboundedReward
from motline.measures import decompose, dirac, make_measure, uniform
from motline.mot import (
    COMPONENTWISE,
    FORMULATIONS,
    POINTWISE,
    QUASISURE,
    Coupling,
    DualCertificate,
    RewardSpec,
    build_mot_lp,
    chargeable_pairs,
    charging_witness,
    check_optimality_via_gamma,
    constraint_pairs,
    is_polar,
    martingale_coupling,
    monotonicity_set,
    relax_lower_bound,
    solve_primal_dual,
)

HALF, QUARTER = F(1, 2), F(1, 4)
IND = RewardSpec.of("indicator_offdiag")
SQ = RewardSpec.of("square_diff")


@pytest.fixture
def two_component():
    mu = make_measure([(-1, HALF), (1, HALF)])
    nu = make_measure([(-2, QUARTER), (0, HALF), (2, QUARTER)])
    return mu, nu


@pytest.fixture
def dilation():
    return dirac(0), make_measure([(-1, HALF), (1, HALF)])


def test_reward_kinds():
    assert SQ(1, 3) == 4
    assert RewardSpec.of("abs_diff")(1, -2) == 3
    assert IND(1, 1) == 0 and IND(1, 2) == 1
    band = RewardSpec.of("penalized_band", delta=QUARTER)
    assert band(0, F(1, 8)) == 0 and band(0, QUARTER) == -1 and band(0, 1) == float("-inf")
    sq = RewardSpec.of("offblock_sqrt")
    assert sq(F(-1, 4), F(1, 4)) == QUARTER
    assert sq(F(-1, 4), F(-1, 8)) == 0 and sq(F(1, 4), F(1, 4)) == 0
    t = RewardSpec.from_table({(0, 1): "inf"}, default=2)
    assert t(0, 1) == float("inf") and t(5, 5) == 2
    with pytest.raises(KeyError):
        RewardSpec.from_table({})(0, 0)


def test_constraint_pairs(two_component):
    dec = decompose(*two_component)
    assert sorted(constraint_pairs(dec, QUASISURE)) == [(-1, -2), (-1, 0), (1, 0), (1, 2)]
    grid = uniform([F(k, 4) for k in range(5)])
    dec = decompose(grid, grid)
    assert constraint_pairs(dec, QUASISURE) == [(x, x) for x in grid.xs]
    assert len(constraint_pairs(dec, POINTWISE)) == 25
    groups = constraint_pairs(decompose(*two_component), COMPONENTWISE)
    assert sorted(groups[1]) == [(-1, -2), (-1, 0)] and groups[0] == []


def test_build_lp_counts(two_component, dilation):
    lp = build_mot_lp(*dilation, SQ, POINTWISE)
    assert lp.n_cols == 2 and lp.n_rows == 4
    lp = build_mot_lp(*two_component, IND, QUASISURE)
    assert lp.n_cols == 4


def test_unbounded_reward(two_component):
    f = RewardSpec.from_table({(1, 0): "inf"}, default=0)
    with pytest.raises(UnboundedReward):
        build_mot_lp(*two_component, f, QUASISURE)
    sol = solve_primal_dual(*two_component, f)
    assert sol.primal_value == float("inf") and sol.coupling is None


def test_inf_on_polar_pair_is_dropped(two_component):
    f = RewardSpec.from_table({(-1, 2): "inf"}, default=0)
    sol = solve_primal_dual(*two_component, f, POINTWISE)
    assert sol.primal_value == 0
    assert any("polar" in n for n in sol.notes)


def test_solve_dilation(dilation):
    sol = solve_primal_dual(*dilation, SQ)
    assert sol.primal_value == 1 == sol.dual_value
    cert = sol.certificate
    # gauge-equivalent to phi(0)=1, psi=0, h=0: psi must be affine in y
    c2 = (cert.psi[1] - cert.psi[-1]) / 2
    c1 = cert.psi[1] - c2
    norm = cert.gauge(c1, c2)
    assert norm.phi == {0: 1} and norm.psi == {-1: 0, 1: 0} and norm.h == {0: 0}


@pytest.mark.parametrize("formulation", FORMULATIONS)
def test_solve_two_component(two_component, formulation):
    sol = solve_primal_dual(*two_component, IND, formulation)
    assert sol.primal_value == 1 == sol.dual_value
    assert sol.coupling.entries == {(-1, -2): QUARTER, (-1, 0): QUARTER, (1, 0): QUARTER, (1, 2): QUARTER}


def test_componentwise_normalization(two_component):
    sol = solve_primal_dual(*two_component, IND, COMPONENTWISE)
    assert sol.certificate.psi[0] == 0
    assert sol.component_values == (HALF, HALF) and sol.stationary_value == 0


def test_grid_quasisure_zero():
    grid = uniform([F(k, 4) for k in range(5)])
    sol = solve_primal_dual(grid, grid, IND, QUASISURE)
    assert sol.primal_value == 0 and sol.certificate.is_zero()


def test_is_polar(two_component, dilation):
    dec = decompose(*two_component)
    v1, v2 = is_polar(dec, [(-1, 2), (-1, -2)])
    assert v1.polar and v1.reason == "crosses_barrier"
    assert not v2.polar and v2.reason == "charged"
    (v,) = is_polar(decompose(*dilation), [(0, 0)])
    assert v.polar and v.reason == "nu_null"
    (v,) = is_polar(decompose(*dilation), [(5, 1)])
    assert v.reason == "mu_null"


def test_charging_witness(two_component, dilation):
    w = charging_witness(*two_component, (1, 0))
    assert w.entries[(1, 0)] == QUARTER
    assert charging_witness(*two_component, (-1, 2)) is None
    w = charging_witness(*two_component, (-1, -2))
    assert w.entries[(-1, -2)] == QUARTER
    w = charging_witness(*dilation, (0, 1))
    assert w.entries == {(0, -1): HALF, (0, 1): HALF}


def test_monotonicity_set_examples(dilation):
    dec = decompose(*dilation)
    cert = DualCertificate({0: F(1)}, {-1: F(0), 1: F(0)}, {0: F(0)}, QUASISURE, F(1))
    assert sorted(monotonicity_set(cert, SQ, dec)) == [(0, -1), (0, 1)]
    grid = uniform([F(k, 4) for k in range(5)])
    zero = DualCertificate({x: F(0) for x in grid.xs}, {x: F(0) for x in grid.xs}, {x: F(0) for x in grid.xs}, QUASISURE, F(0))
    assert monotonicity_set(zero, IND, decompose(grid, grid)) == [(x, x) for x in grid.xs]


def test_gamma_two_component(two_component):
    sol = solve_primal_dual(*two_component, IND, emit_gamma=True)
    assert set(sol.gamma) >= {(-1, -2), (-1, 0), (1, 0), (1, 2)}
    chk = check_optimality_via_gamma(sol.coupling, sol.gamma, sol)
    assert chk.concentrated and chk.optimal
    sub = sol.coupling.restrict_x([F(1)])
    chk = check_optimality_via_gamma(sub, sol.gamma, sol)
    assert chk.concentrated and chk.optimal


def test_gamma_detects_suboptimal():
    mu = make_measure([(-1, HALF), (1, HALF)])
    nu = uniform([-3, -1, 1, 3])
    f = RewardSpec.of("abs_diff")
    sol = solve_primal_dual(mu, nu, f, emit_gamma=True)
    worst = martingale_coupling(mu, nu, weights={(x, y): -abs(y - x) for x in mu.xs for y in nu.xs})
    assert worst.expectation(f) < sol.primal_value
    chk = check_optimality_via_gamma(worst, sol.gamma, sol)
    assert not chk.concentrated and not chk.optimal


def test_gamma_rejects_non_martingale(two_component):
    sol = solve_primal_dual(*two_component, IND, emit_gamma=True)
    bad = Coupling.from_entries([((1, 2), F(1))])
    with pytest.raises(NotMartingale):
        check_optimality_via_gamma(bad, sol.gamma, sol)


def test_relax_lower_bound(dilation):
    mu, nu = dilation
    r = relax_lower_bound(SQ, (0, 0, 0), mu, nu)
    assert r.offset == 0 and all(r.reward(x, y) == SQ(x, y) for x in mu.xs for y in nu.xs)
    const = RewardSpec.from_table({}, default=-1)
    r = relax_lower_bound(const, (-1, 0, 0), mu, nu)
    assert r.offset == -1 and r.reward(0, 1) == 0 and not r.violations


def test_penalized_band_big_m():
    mu = uniform([F(k, 8) for k in range(9)])
    d = QUARTER
    nu = make_measure([(x + s, mu.ws[0] / 2) for x in mu.xs for s in (-d, d)])
    sol = solve_primal_dual(mu, nu, RewardSpec.of("penalized_band", delta=d))
    assert sol.primal_value == -1
    assert all(abs(y - x) == d for x, y in sol.coupling.support)


def test_penalty_too_small_is_flagged():
    mu = uniform([F(k, 8) for k in range(9)])
    d = QUARTER
    nu = make_measure([(x + s, mu.ws[0] / 2) for x in mu.xs for s in (-d, d)])
    sol = solve_primal_dual(mu, nu, RewardSpec.of("penalized_band", delta=d, penalty=1))
    assert sol.primal_value == float("-inf")
    assert any("effectively -inf" in n for n in sol.notes)


def test_float_mode_solve(two_component):
    sol = solve_primal_dual(*two_component, IND, QUASISURE, mode="float")
    assert sol.primal_value == pytest.approx(1.0)
    assert all(r.ok for r in sol.verifications)


def test_martingale_coupling_none_when_unordered(dilation):
    mu, nu = dilation
    assert martingale_coupling(nu, mu) is None


# ---------------------------------------------------------------- properties

seeds = st.integers(min_value=0, max_value=10**6)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_values_agree_across_formulations_and_highs(seed):
    rng = random.Random(seed)
    mu, nu = random_instance(rng)
    f = random_table(rng, mu, nu)
    sols = [solve_primal_dual(mu, nu, f, fm) for fm in FORMULATIONS]
    values = {s.primal_value for s in sols}
    assert len(values) == 1
    for s in sols:
        assert s.primal_value == s.dual_value
        assert not s.certificate.violations(f, constraint_pairs(s.decomposition, QUASISURE))
    assert float(sols[0].primal_value) == pytest.approx(scipy_mot_value(mu, nu, f), abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_couplings_live_on_non_polar_pairs(seed):
    rng = random.Random(seed)
    mu, nu = random_instance(rng)
    f = random_table(rng, mu, nu)
    sol = solve_primal_dual(mu, nu, f, POINTWISE)
    dec = sol.decomposition
    for x, y in sol.coupling.support:
        assert x == y or any(c.in_I(x) and c.in_J(y) for c in dec.components)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_polar_decision_matches_lp_oracle(seed):
    mu, nu = random_instance(random.Random(seed))
    dec = decompose(mu, nu)
    charged = chargeable_pairs(mu, nu)
    pairs = [(x, y) for x in mu.xs for y in nu.xs]
    for v in is_polar(dec, pairs):
        assert v.polar == (v.point not in charged)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_complementary_slackness(seed):
    rng = random.Random(seed)
    mu, nu = random_instance(rng)
    f = random_table(rng, mu, nu)
    sol = solve_primal_dual(mu, nu, f, emit_gamma=True)
    assert set(sol.coupling.support) <= set(sol.gamma)
