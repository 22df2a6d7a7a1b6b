from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import linprog

from motline.errors import BadParams, PropertyViolation
from motline.harness import (
    SCENARIOS,
    PropertyReport,
    build_example,
    min_oscillation,
    run_refinement_study,
    verify_example_properties,
)
from motline.measures import check_convex_order, decompose
from motline.mot import POINTWISE, QUASISURE, constraint_pairs, solve_primal_dual
from motline.scalars import INF


def test_pointwise_gap_instance():
    sc = build_example("pointwise-gap", {"n": 4})
    assert sc.mu.xs == tuple(F(k, 4) for k in range(5)) and sc.mu == sc.nu


def test_integrability_weights():
    sc = build_example("integrability-failure", {"N": 3})
    w = sc.mu.ws
    assert w[1] / w[0] == F(1, 8) and w[2] / w[0] == F(1, 27) and sc.mu.mass == 1
    assert check_convex_order(sc.mu, sc.nu).ordered
    assert sc.nu.xs == tuple(F(k) for k in range(5))


def test_no_lower_bound_instance():
    sc = build_example("no-lower-bound")
    assert sc.params == {"delta": F(1, 4), "step": F(1, 8)}
    assert sc.nu.variance - sc.mu.variance == F(1, 16)


def test_nonsmooth_two_components():
    sc = build_example("nonsmooth-two-component", {"n": 4})
    dec = decompose(sc.mu, sc.nu)
    assert [(c.l, c.r) for c in dec.components] == [(-1, 0), (0, 1)]


@pytest.mark.parametrize("name,params", [("x", {}), ("pointwise-gap", {"n": 1}), ("pointwise-gap", {"n": 2.5}), ("no-lower-bound", {"step": F(1, 3)}), ("no-lower-bound", {"delta": 0})])
def test_bad_params(name, params):
    with pytest.raises(BadParams):
        build_example(name, params)


@pytest.mark.parametrize("name", SCENARIOS)
def test_properties_hold(name):
    rep = verify_example_properties(build_example(name))
    assert rep.ok and rep.checks


def test_integrability_values():
    rep = verify_example_properties(build_example("integrability-failure", {"N": 10}))
    assert rep.values["value"] == F(2, 3)
    assert rep.values["interior"] == list(range(2, 10))
    assert (rep.values["b"], rep.values["c"]) == (20, -99)


def test_property_report_raises():
    rep = PropertyReport("x")
    rep.add("fine", True)
    with pytest.raises(PropertyViolation):
        rep.add("broken", False, "detail")
    assert not rep.ok


def _oscillation_oracle(mu, nu, f, formulation, value):
    """Same auxiliary LP over all pairs at once, in floats via HiGHS."""
    pairs = [p for p in constraint_pairs(decompose(mu, nu), formulation) if f(*p) != -INF]
    nx, ny = len(mu.xs), len(nu.xs)
    # variables: phi (nx), psi (ny), h (nx), Ophi, Opsi, lower bounds a, b
    n = 2 * nx + ny + 4
    iphi, ipsi, ih = 0, nx, nx + ny
    io, ip, ia, ib = 2 * nx + ny, 2 * nx + ny + 1, 2 * nx + ny + 2, 2 * nx + ny + 3
    A, b = [], []

    def row():
        return [0.0] * n

    xi = {x: k for k, x in enumerate(mu.xs)}
    yi = {y: k for k, y in enumerate(nu.xs)}
    for (x, y) in pairs:
        r = row()
        r[iphi + xi[x]] = r[ipsi + yi[y]] = -1.0
        r[ih + xi[x]] = -float(y - x)
        A.append(r)
        b.append(-float(f(x, y)))
    for x in mu.xs:
        r = row(); r[iphi + xi[x]] = 1; r[ia] = -1; r[io] = -1; A.append(r); b.append(0)  # noqa: E702
        r = row(); r[iphi + xi[x]] = -1; r[ia] = 1; A.append(r); b.append(0)  # noqa: E702
    for y in nu.xs:
        r = row(); r[ipsi + yi[y]] = 1; r[ib] = -1; r[ip] = -1; A.append(r); b.append(0)  # noqa: E702
        r = row(); r[ipsi + yi[y]] = -1; r[ib] = 1; A.append(r); b.append(0)  # noqa: E702
    r = row()
    for x, w in mu:
        r[iphi + xi[x]] = float(w)
    for y, w in nu:
        r[ipsi + yi[y]] = float(w)
    A.append(r)
    b.append(float(value))
    c = np.zeros(n)
    c[io] = c[ip] = 1
    bounds = [(None, None)] * n
    bounds[io] = bounds[ip] = (0, None)
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=bounds, method="highs")
    assert res.status == 0
    return res.fun


@pytest.mark.parametrize("name,params", [("pointwise-gap", {"n": 4}), ("pointwise-gap", {"n": 6}), ("nonsmooth-two-component", {"n": 4}), ("no-lower-bound", {"step": F(1, 4)})])
@pytest.mark.parametrize("formulation", [QUASISURE, POINTWISE])
def test_min_oscillation_matches_full_lp(name, params, formulation):
    sc = build_example(name, params)
    value = solve_primal_dual(sc.mu, sc.nu, sc.reward, QUASISURE).primal_value
    osc, (phi, psi, h), rounds = min_oscillation(sc.mu, sc.nu, sc.reward, formulation, value)
    assert float(osc) == pytest.approx(_oscillation_oracle(sc.mu, sc.nu, sc.reward, formulation, value), abs=1e-7)
    assert rounds >= 1
    for x, y in constraint_pairs(decompose(sc.mu, sc.nu), formulation):
        fx = sc.reward(x, y)
        assert fx == -INF or phi[x] + psi[y] + h[x] * (y - x) >= fx
    assert sum(w * phi[x] for x, w in sc.mu) + sum(w * psi[y] for y, w in sc.nu) <= value


def test_pointwise_gap_refinement():
    rep = run_refinement_study("pointwise-gap", [4, 8, 16])
    assert all(rep.verdicts.values()), rep.verdicts
    assert [r["pointwise_min_osc"] for r in rep.records] == [8, 32, 128]


def test_no_lower_bound_refinement():
    rep = run_refinement_study("no-lower-bound", [4, 8])
    assert all(rep.verdicts.values()), rep.verdicts


def test_nonsmooth_refinement():
    rep = run_refinement_study("nonsmooth-two-component", [3, 4, 6])
    assert all(rep.verdicts.values()), rep.verdicts


def test_unknown_study():
    with pytest.raises(BadParams):
        run_refinement_study("integrability-gap", [4])
