"""Discretized counterexample scenarios and refinement studies.

The continuum gaps of the counterexamples cannot appear as value gaps in a
finite LP. What can be observed is the size of the dual certificates: the
auxiliary LP below finds the smallest ``osc(phi) + osc(psi)`` among optimal
certificates of a given formulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BadParams, PropertyViolation
from .lp import OPTIMAL, LinearProgram, solve_lp
from .measures import check_convex_order, decompose, make_measure, uniform
from .mot import POINTWISE, QUASISURE, COMPONENTWISE, RewardSpec, constraint_pairs, solve_primal_dual
from .scalars import INF

SCENARIOS = (
    "pointwise-gap",
    "nonsmooth-two-component",
    "integrability-failure",
    "integrability-gap",
    "no-lower-bound",
)
STUDIES = ("pointwise-gap", "no-lower-bound", "nonsmooth-two-component")


@dataclass(frozen=True)
class Scenario:
    name: str
    params: dict
    mu: object
    nu: object
    reward: RewardSpec


def _int_param(params, key, default, least):
    v = params.get(key, default)
    if int(v) != v or v < least:
        raise BadParams(f"{key} must be an integer >= {least}, got {v}")
    return int(v)


def _pointwise_gap(params):
    n = _int_param(params, "n", 4, 2)
    pts = [Fraction(k, n) for k in range(n + 1)]
    m = uniform(pts)
    return {"n": n}, m, m, RewardSpec.of("indicator_offdiag")


def _nonsmooth(params):
    n = _int_param(params, "n", 4, 2)
    step = Fraction(1, n)
    w = Fraction(1, 2 * (n - 1))
    mu_raw, nu_raw = [], []
    for j in range(1, n):
        for sign in (1, -1):
            x = sign * j * step
            mu_raw.append((x, w))
            nu_raw += [(x - step, w / 2), (x + step, w / 2)]
    return {"n": n}, make_measure(mu_raw), make_measure(nu_raw), RewardSpec.of("offblock_sqrt")


def _integrability(params, kind):
    big_n = _int_param(params, "N", 10, 3)
    raw = [Fraction(1, i**3) for i in range(1, big_n + 1)]
    total = sum(raw)
    c = [r / total for r in raw]
    mu = make_measure([(Fraction(i), c[i - 1]) for i in range(1, big_n + 1)])
    nu_raw = []
    for i in range(1, big_n + 1):
        for y in (i - 1, i, i + 1):
            nu_raw.append((Fraction(y), c[i - 1] / 3))
    reward = RewardSpec.of("indicator_offdiag" if kind == "failure" else "square_diff")
    return {"N": big_n}, mu, make_measure(nu_raw), reward


def _no_lower_bound(params):
    delta = Fraction(params.get("delta", Fraction(1, 4)))
    step = Fraction(params.get("step", delta / 2))
    if delta <= 0 or step <= 0:
        raise BadParams("delta and step must be positive")
    if (delta / step).denominator != 1 or (1 / step).denominator != 1:
        raise BadParams("delta and 1 must be multiples of the grid step")
    pts = [k * step for k in range(int(1 / step) + 1)]
    mu = uniform(pts)
    half = mu.ws[0] / 2
    nu = make_measure([(x + s, half) for x in pts for s in (-delta, delta)])
    reward = RewardSpec.of("penalized_band", delta=delta, **({"penalty": params["penalty"]} if "penalty" in params else {}))
    out = {"delta": delta, "step": step}
    if "penalty" in params:
        out["penalty"] = params["penalty"]
    return out, mu, nu, reward


def build_example(name: str, params: dict | None = None) -> Scenario:
    """Instance for one named scenario.

    ``pointwise-gap`` and ``nonsmooth-two-component`` take ``n``; the
    integrability scenarios take ``N``; ``no-lower-bound`` takes ``delta``,
    ``step`` and an optional ``penalty``.
    """
    params = dict(params or {})
    if name == "pointwise-gap":
        p, mu, nu, f = _pointwise_gap(params)
    elif name == "nonsmooth-two-component":
        p, mu, nu, f = _nonsmooth(params)
    elif name == "integrability-failure":
        p, mu, nu, f = _integrability(params, "failure")
    elif name == "integrability-gap":
        p, mu, nu, f = _integrability(params, "gap")
    elif name == "no-lower-bound":
        p, mu, nu, f = _no_lower_bound(params)
    else:
        raise BadParams(f"unknown scenario {name!r}")
    report = check_convex_order(mu, nu)
    if not report.ordered:
        raise BadParams(f"scenario {name} is not in convex order: {report.reason}")
    return Scenario(name, p, mu, nu, f)


# ---------------------------------------------------------------- properties


@dataclass
class PropertyReport:
    scenario: str
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, clause, ok, detail=""):
        self.checks.append((clause, bool(ok), detail))
        if not ok:
            raise PropertyViolation(clause, detail)

    @property
    def ok(self):
        return all(c[1] for c in self.checks)


def banded_interior(sol):
    """Interior atoms whose banded pairs and neighbours' diagonals all carry mass."""
    p = sol.coupling.entries
    mu = sol.mu

    def banded(i):
        return all(p.get((i, y), 0) > 0 for y in (i - 1, i, i + 1))

    return [i for i in mu.xs if banded(i) and all(j in mu and p.get((j, j), 0) > 0 for j in (i - 1, i + 1))]


def fit_quadratic(phi: dict, atoms):
    """``(b, c)`` with ``phi(x) = -x^2 + b x + c`` through the first two atoms."""
    x0, x1 = atoms[0], atoms[1]
    g0, g1 = phi[x0] + x0 * x0, phi[x1] + x1 * x1
    b = (g1 - g0) / (x1 - x0)
    return b, g0 - b * x0


def verify_example_properties(scenario: Scenario) -> PropertyReport:
    """Scenario-specific assertions; raises :class:`PropertyViolation` on failure."""
    rep = PropertyReport(scenario.name)
    mu, nu, f = scenario.mu, scenario.nu, scenario.reward
    name = scenario.name

    def gap_zero(sol):
        return all(r.ok and r.gap == 0 for r in sol.verifications)

    if name == "pointwise-gap":
        pw = solve_primal_dual(mu, nu, f, POINTWISE)
        qs = solve_primal_dual(mu, nu, f, QUASISURE)
        rep.add("pointwise primal value is 0", pw.primal_value == 0, str(pw.primal_value))
        rep.add("pointwise gap is 0", gap_zero(pw))
        rep.add("quasisure value is 0", qs.primal_value == 0 and qs.dual_value == 0)
        rep.add("quasisure certificate is zero", qs.certificate.is_zero())
        rep.values.update(pointwise=pw.primal_value, quasisure=qs.primal_value)
    elif name == "integrability-failure":
        sol = solve_primal_dual(mu, nu, f, QUASISURE)
        rep.add("primal equals dual", sol.primal_value == sol.dual_value and gap_zero(sol))
        dec = sol.decomposition
        rep.add("single component", len(dec.components) == 1 and dec.stationary.mass == 0)
        phi, psi = sol.certificate.phi, sol.certificate.psi
        inner = banded_interior(sol)
        rep.add("banded interior is nonempty", len(inner) >= 2, str(inner))
        for i in inner:
            rep.add(f"phi+psi=0 at {i}", phi[i] + psi[i] == 0)
            rep.add(f"second difference 2 at {i}", 2 * phi[i] - phi[i - 1] - phi[i + 1] == 2)
        region = sorted(set(inner) | {i - 1 for i in inner} | {i + 1 for i in inner})
        b, c = fit_quadratic(phi, inner)
        rep.add("phi is -x^2+bx+c on the banded region", all(phi[x] == -x * x + b * x + c for x in region))
        rep.values.update(value=sol.primal_value, interior=inner, b=b, c=c)
    elif name == "integrability-gap":
        dec = decompose(mu, nu)
        big_n = scenario.params["N"]
        ok = len(dec.components) == 1 and dec.components[0].l == 0 and dec.components[0].r == big_n + 1
        rep.add("single component I=(0,N+1)", ok and dec.stationary.mass == 0, repr(dec.components))
        sol = solve_primal_dual(mu, nu, f, QUASISURE)
        rep.add("primal equals dual", sol.primal_value == sol.dual_value and gap_zero(sol))
        rep.values.update(value=sol.primal_value)
    elif name == "no-lower-bound":
        sol = solve_primal_dual(mu, nu, f, QUASISURE)
        delta = scenario.params["delta"]
        rep.add("primal value is -1", sol.primal_value == -1, str(sol.primal_value))
        rep.add("no penalized cell used", not any("effectively" in n for n in sol.notes))
        rep.add("support on |y-x|=delta", all(abs(y - x) == delta for x, y in sol.coupling.support))
        second = sol.coupling.expectation(lambda x, y: (y - x) ** 2)
        rep.add("second moment of increments is delta^2", second == delta * delta == nu.variance - mu.variance)
        rep.values.update(value=sol.primal_value, big_m=sol.lp.meta["big_m"], increments=second)
    elif name == "nonsmooth-two-component":
        dec = decompose(mu, nu)
        rep.add("two components", len(dec.components) == 2, repr(dec.components))
        cw = solve_primal_dual(mu, nu, f, COMPONENTWISE)
        pw = solve_primal_dual(mu, nu, f, POINTWISE)
        rep.add("componentwise value equals pointwise", cw.primal_value == pw.primal_value)
        rep.values.update(value=pw.primal_value)
    else:
        raise BadParams(f"unknown scenario {name!r}")
    return rep


# ---------------------------------------------------------------- refinement


def _aux_lp(mu, nu, f, pairs, value, mode):
    """Min ``O_phi + O_psi`` with ``phi = a + s``, ``0 <= s <= O_phi`` (same for psi)."""
    lp = LinearProgram(mode)
    for name in ("a+", "a-", "b+", "b-"):
        lp.add_column(name, 0)
    lp.add_column("Ophi", -1)
    lp.add_column("Opsi", -1)
    for x in mu.xs:
        lp.add_column(("s", x), 0)
        lp.add_column(("h+", x), 0)
        lp.add_column(("h-", x), 0)
        lp.add_row({("s", x): 1, "Ophi": -1}, "le", 0, ("capphi", x))
    for y in nu.xs:
        lp.add_column(("t", y), 0)
        lp.add_row({("t", y): 1, "Opsi": -1}, "le", 0, ("cappsi", y))
    obj = {"a+": mu.mass, "a-": -mu.mass, "b+": nu.mass, "b-": -nu.mass}
    for x, w in mu:
        obj[("s", x)] = w
    for y, w in nu:
        obj[("t", y)] = w
    lp.add_row(obj, "le", value, "value")
    for pair in pairs:
        _add_pair(lp, pair, f(pair[0], pair[1], mode))
    return lp


def _add_pair(lp, pair, fx):
    x, y = pair
    d = y - x
    coeffs = {"a+": -1, "a-": 1, "b+": -1, "b-": 1, ("s", x): -1}
    coeffs[("t", y)] = coeffs.get(("t", y), 0) - 1
    if d:
        coeffs[("h+", x)] = -d
        coeffs[("h-", x)] = d
    lp.add_row(coeffs, "le", -fx, ("pair", x, y))


def _read_aux(lp, sol, mu, nu):
    v = dict(zip(lp.col_labels, sol.primal))
    a, b = v["a+"] - v["a-"], v["b+"] - v["b-"]
    phi = {x: a + v[("s", x)] for x in mu.xs}
    psi = {y: b + v[("t", y)] for y in nu.xs}
    h = {x: v[("h+", x)] - v[("h-", x)] for x in mu.xs}
    return phi, psi, h


def min_oscillation(mu, nu, f: RewardSpec, formulation: str, value, *, seed_width=1):
    """Exact minimum of ``osc(phi) + osc(psi)`` over optimal certificates.

    Dual constraints are generated lazily: the LP starts with pairs whose
    support indices differ by at most ``seed_width`` and adds every violated
    pair until the certificate is feasible on the whole formulation.
    Returns ``(min_osc, (phi, psi, h), rounds)``.
    """
    mode = mu.mode
    dec = decompose(mu, nu)
    pairs = constraint_pairs(dec, formulation)
    if formulation == COMPONENTWISE:
        pairs = constraint_pairs(dec, QUASISURE)
    finite = {p: f(p[0], p[1], mode) for p in pairs}
    pairs = [p for p in pairs if finite[p] != -INF]
    pos = {y: j for j, y in enumerate(nu.xs)}
    nearest = {x: min(range(len(nu.xs)), key=lambda j: (abs(nu.xs[j] - x), j)) for x in mu.xs}
    active = [p for p in pairs if abs(pos[p[1]] - nearest[p[0]]) <= seed_width]
    lp = _aux_lp(mu, nu, f, active, value, mode)
    seen = set(active)
    rounds = 0
    while True:
        rounds += 1
        sol = solve_lp(lp)
        if sol.status != OPTIMAL:
            raise RuntimeError(f"oscillation LP is {sol.status}")
        phi, psi, h = _read_aux(lp, sol, mu, nu)
        bad = [p for p in pairs if p not in seen and phi[p[0]] + psi[p[1]] + h[p[0]] * (p[1] - p[0]) < finite[p]]
        if not bad:
            return -sol.objective, (phi, psi, h), rounds
        for p in bad:
            _add_pair(lp, p, finite[p])
            seen.add(p)


@dataclass
class RefinementReport:
    name: str
    levels: list
    records: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)


def _level_params(name, n):
    if name == "no-lower-bound":
        return {"delta": Fraction(1, 4), "step": Fraction(1, n)}
    return {"n": n}


def _increasing(vals, strict):
    return all((b > a) if strict else (b >= a) for a, b in zip(vals, vals[1:]))


def run_refinement_study(name: str, levels) -> RefinementReport:
    """Per level: primal value plus min-oscillation for both formulations."""
    if name not in STUDIES:
        raise BadParams(f"no refinement study for {name!r}")
    rep = RefinementReport(name, list(levels))
    for n in levels:
        sc = build_example(name, _level_params(name, n))
        sol = solve_primal_dual(sc.mu, sc.nu, sc.reward, QUASISURE)
        if not all(r.ok for r in sol.verifications):
            raise RuntimeError(f"level {n}: LP verification failed")
        qs, _, _ = min_oscillation(sc.mu, sc.nu, sc.reward, QUASISURE, sol.primal_value)
        pw, _, _ = min_oscillation(sc.mu, sc.nu, sc.reward, POINTWISE, sol.primal_value)
        rep.records.append({"level": n, "primal_value": sol.primal_value, "quasisure_min_osc": qs, "pointwise_min_osc": pw})
    qs = [r["quasisure_min_osc"] for r in rep.records]
    pw = [r["pointwise_min_osc"] for r in rep.records]
    v = rep.verdicts
    if name == "pointwise-gap":
        v["quasisure_zero"] = all(q == 0 for q in qs)
        v["pointwise_strictly_increasing"] = _increasing(pw, True)
        v["pointwise_at_least_n2_over_8"] = all(r["pointwise_min_osc"] >= Fraction(r["level"] ** 2, 8) for r in rep.records)
    elif name == "no-lower-bound":
        v["primal_minus_one"] = all(r["primal_value"] == -1 for r in rep.records)
        v["pointwise_nondecreasing"] = _increasing(pw, False)
    else:
        v["quasisure_zero"] = all(q == 0 for q in qs)
        v["pointwise_nondecreasing"] = _increasing(pw, False)
    v["quasisure_bounded"] = max(qs) <= max(pw) if qs else True
    return rep
