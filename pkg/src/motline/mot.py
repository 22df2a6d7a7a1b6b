"""Martingale transport LPs in pointwise, quasi-sure and componentwise form.

Polarity of a support pair follows the structural rule: a pair is charged by
some martingale coupling iff both coordinates are atoms and the pair is on the
diagonal or inside some ``I_k x J_k``. :func:`charging_witness` and
:func:`chargeable_pairs` decide the same question by linear programming and
serve as the independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable

from .errors import BadParams, NotInOrder, NotMartingale, UnboundedReward
from .lp import OPTIMAL, LinearProgram, LpSolution, solve_lp, verify_solution
from .measures import Decomposition, DiscreteMeasure, decompose, make_measure
from .scalars import EXACT, INF, eq, is_zero, to_scalar, zero

POINTWISE = "pointwise"
QUASISURE = "quasisure"
COMPONENTWISE = "componentwise"
FORMULATIONS = (POINTWISE, QUASISURE, COMPONENTWISE)

REWARD_KINDS = (
    "square_diff",
    "abs_diff",
    "indicator_offdiag",
    "table",
    "penalized_band",
    "offblock_sqrt",
)


def _exact_sqrt(v: Fraction) -> Fraction:
    """Square root of a nonnegative rational; exact when ``v`` is a rational square."""
    n, d = v.numerator, v.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return Fraction(math.sqrt(n / d)).limit_denominator(10**12)


@dataclass(frozen=True)
class RewardSpec:
    """Reward ``f(x, y)`` on support pairs.

    ``table`` maps ``(x, y)`` to a value; ``default`` is used for pairs the
    table does not list (``None`` makes unlisted pairs an error). Table values
    may be ``+inf`` / ``-inf``.
    """

    kind: str
    params: tuple = ()
    table: dict = field(default=None, compare=False)
    default: object = None

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise BadParams(f"unknown reward kind {self.kind!r}")
        if self.kind == "penalized_band" and "delta" not in dict(self.params):
            raise BadParams("penalized_band needs a delta")

    @property
    def param(self):
        return dict(self.params)

    @classmethod
    def of(cls, kind: str, **params):
        return cls(kind, tuple(sorted(params.items())))

    @classmethod
    def from_table(cls, table: dict, default=None):
        return cls("table", (), dict(table), default)

    def __call__(self, x, y, mode: str = EXACT):
        k = self.kind
        if k == "square_diff":
            return (x - y) * (x - y)
        if k == "abs_diff":
            return abs(x - y)
        if k == "indicator_offdiag":
            return to_scalar(0 if x == y else 1, mode)
        if k == "table":
            if (x, y) in self.table:
                return to_scalar(self.table[(x, y)], mode)
            if self.default is None:
                raise KeyError(f"reward table has no entry for {(x, y)}")
            return to_scalar(self.default, mode)
        if k == "penalized_band":
            delta = to_scalar(self.param["delta"], mode)
            gap = abs(x - y)
            if gap < delta:
                return to_scalar(0, mode)
            if gap == delta:
                return to_scalar(-1, mode)
            return -INF
        if k == "offblock_sqrt":
            if -1 < x < 0 < y < 1:
                v = abs(x * y)
                return _exact_sqrt(Fraction(v)) if mode == EXACT else math.sqrt(v)
            return to_scalar(0, mode)
        raise AssertionError(k)


@dataclass(frozen=True)
class Coupling:
    """Sparse joint measure on support pairs."""

    entries: dict
    mode: str = EXACT

    @classmethod
    def from_entries(cls, items: Iterable, mode: str = EXACT):
        out = {}
        for (x, y), p in items:
            if p != 0:
                out[(x, y)] = out.get((x, y), zero(mode)) + p
        return cls(dict(sorted(out.items())), mode)

    @property
    def support(self):
        return [pair for pair, p in self.entries.items() if p > 0]

    @property
    def mass(self):
        return sum(self.entries.values(), zero(self.mode))

    def first_marginal(self) -> DiscreteMeasure:
        return make_measure([(x, p) for (x, _), p in self.entries.items()], self.mode)

    def second_marginal(self) -> DiscreteMeasure:
        return make_measure([(y, p) for (_, y), p in self.entries.items()], self.mode)

    def martingale_residuals(self) -> dict:
        res = {}
        for (x, y), p in self.entries.items():
            res[x] = res.get(x, zero(self.mode)) + p * (y - x)
        return res

    def marginal_residuals(self, mu: DiscreteMeasure, nu: DiscreteMeasure):
        m1, m2 = self.first_marginal(), self.second_marginal()
        r1 = {x: m1.weight(x) - mu.weight(x) for x in sorted(set(m1.xs) | set(mu.xs))}
        r2 = {y: m2.weight(y) - nu.weight(y) for y in sorted(set(m2.xs) | set(nu.xs))}
        return r1, r2

    def is_martingale(self, tol: float = 1e-9) -> bool:
        return all(is_zero(v, self.mode, tol) for v in self.martingale_residuals().values())

    def is_coupling_of(self, mu, nu, tol: float = 1e-9) -> bool:
        if any(p < 0 for p in self.entries.values()):
            return False
        r1, r2 = self.marginal_residuals(mu, nu)
        return all(is_zero(v, self.mode, tol) for v in list(r1.values()) + list(r2.values()))

    def kernel(self, x) -> dict:
        """Row-normalized conditional law of ``Y`` given ``X = x``."""
        row = {y: p for (a, y), p in self.entries.items() if a == x}
        total = sum(row.values(), zero(self.mode))
        return {y: p / total for y, p in row.items()}

    def expectation(self, g: Callable):
        return sum((p * g(x, y) for (x, y), p in self.entries.items() if p != 0), zero(self.mode))

    def restrict_x(self, xs, normalize: bool = True) -> Coupling:
        keep = {pair: p for pair, p in self.entries.items() if pair[0] in set(xs)}
        out = Coupling(keep, self.mode)
        if normalize and keep:
            total = out.mass
            out = Coupling({k: v / total for k, v in keep.items()}, self.mode)
        return out


@dataclass(frozen=True)
class DualCertificate:
    """Dual triple on the supports: ``phi(x) + psi(y) + h(x)(y - x) >= f(x, y)``."""

    phi: dict
    psi: dict
    h: dict
    formulation: str
    value: object

    def __call__(self, x, y):
        phi, psi = self.phi[x], self.psi[y]
        if phi == INF or psi == INF:
            return INF
        return phi + psi + self.h.get(x, 0) * (y - x)

    def gauge(self, c1, c2) -> DualCertificate:
        """Apply ``(phi + c1 + c2 x, psi - c1 - c2 y, h + c2)``; the value is unchanged."""
        return replace(
            self,
            phi={x: v + c1 + c2 * x for x, v in self.phi.items()},
            psi={y: v - c1 - c2 * y for y, v in self.psi.items()},
            h={x: v + c2 for x, v in self.h.items()},
        )

    def objective(self, mu: DiscreteMeasure, nu: DiscreteMeasure):
        z = zero(mu.mode)
        return sum((w * self.phi[x] for x, w in mu), z) + sum((w * self.psi[y] for y, w in nu), z)

    def violations(self, f, pairs, mode: str = EXACT, tol: float = 1e-9):
        """Pairs where the dual inequality fails."""
        bad = []
        for x, y in pairs:
            fx = f(x, y, mode)
            lhs = self(x, y)
            if fx == -INF or lhs == INF:
                continue
            if fx == INF or (lhs < fx if mode == EXACT else lhs < fx - tol):
                bad.append((x, y))
        return bad

    def is_zero(self) -> bool:
        return all(v == 0 for d in (self.phi, self.psi, self.h) for v in d.values())


@dataclass
class MotSolution:
    primal_value: object
    coupling: Coupling | None
    certificate: DualCertificate | None
    decomposition: Decomposition
    formulation: str
    reward: RewardSpec
    gamma: tuple | None = None
    verifications: list = field(default_factory=list)
    component_values: tuple = ()
    stationary_value: object = None
    notes: tuple = ()
    lp: LinearProgram | None = None
    lp_solution: LpSolution | None = None

    @property
    def mu(self):
        return self.decomposition.mu

    @property
    def nu(self):
        return self.decomposition.nu

    @property
    def dual_value(self):
        return None if self.certificate is None else self.certificate.value


# ---------------------------------------------------------------- polarity


def _charged(dec: Decomposition, x, y) -> bool:
    if x == y:
        return True
    return any(c.in_I(x) and c.in_J(y) for c in dec.components)


@dataclass(frozen=True)
class PolarVerdict:
    point: tuple
    polar: bool
    reason: str


def is_polar(decomposition: Decomposition, points) -> list:
    """Structural polarity decision for each ``(x, y)`` in ``points``."""
    out = []
    mu, nu = decomposition.mu, decomposition.nu
    for x, y in points:
        if mu.weight(x) == 0:
            out.append(PolarVerdict((x, y), True, "mu_null"))
        elif nu.weight(y) == 0:
            out.append(PolarVerdict((x, y), True, "nu_null"))
        elif not _charged(decomposition, x, y):
            out.append(PolarVerdict((x, y), True, "crosses_barrier"))
        else:
            out.append(PolarVerdict((x, y), False, "charged"))
    return out


def constraint_pairs(decomposition: Decomposition, formulation: str):
    """Support pairs on which the dual inequality is required.

    ``componentwise`` returns a dict ``k -> pairs`` with ``k = 0`` holding the
    diagonal pairs of the stationary part.
    """
    mu, nu = decomposition.mu, decomposition.nu
    if formulation == POINTWISE:
        return [(x, y) for x in mu.xs for y in nu.xs]
    if formulation == QUASISURE:
        return [(x, y) for x in mu.xs for y in nu.xs if _charged(decomposition, x, y)]
    if formulation == COMPONENTWISE:
        groups = {0: [(x, x) for x in decomposition.stationary.xs]}
        for c in decomposition.components:
            groups[c.index] = [(x, y) for x in c.mu.xs for y in nu.xs if c.in_J(y)]
        return groups
    raise BadParams(f"unknown formulation {formulation!r}")


# ---------------------------------------------------------------- LP assembly


def _big_m(values, mu: DiscreteMeasure, nu: DiscreteMeasure):
    finite = [v for v in values if v not in (INF, -INF)]
    if not finite:
        finite = [zero(mu.mode)]
    hi, lo = max(finite), min(finite)
    min_atom = min(list(mu.ws) + list(nu.ws))
    return 1 + (hi - lo) * (mu.mass / min_atom)


def transport_lp(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    pairs,
    costs: dict,
) -> LinearProgram:
    """Martingale transport LP on ``pairs`` with objective ``sum p * costs``.

    Rows: ``("mu", x)`` marginal, ``("nu", y)`` marginal, ``("mart", x)``
    barycenter constraint. Columns are labelled by the pair.
    """
    mode = mu.mode
    lp = LinearProgram(mode)
    for pair in pairs:
        lp.add_column(pair, costs.get(pair, 0))
    by_x, by_y = {}, {}
    for j, (x, y) in enumerate(pairs):
        by_x.setdefault(x, []).append(j)
        by_y.setdefault(y, []).append(j)
    for x, w in mu:
        lp.add_row({j: 1 for j in by_x.get(x, [])}, "eq", w, ("mu", x))
    for y, w in nu:
        lp.add_row({j: 1 for j in by_y.get(y, [])}, "eq", w, ("nu", y))
    for x, _ in mu:
        lp.add_row({j: pairs[j][1] - x for j in by_x.get(x, [])}, "eq", 0, ("mart", x))
    return lp


def build_mot_lp(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    f: RewardSpec,
    formulation: str = QUASISURE,
    *,
    decomposition: Decomposition | None = None,
    big_m=None,
) -> LinearProgram:
    """Primal LP of the martingale transport problem for one formulation.

    ``+inf`` at a chargeable pair raises :class:`UnboundedReward`; ``+inf`` at
    a polar pair drops the column. ``-inf`` becomes a big-M penalty and the
    penalized pairs are listed in ``lp.meta["penalized"]``.
    """
    dec = decomposition or decompose(mu, nu)
    if formulation == COMPONENTWISE:
        raise BadParams("componentwise problems are solved per component; use solve_primal_dual")
    pairs = constraint_pairs(dec, formulation)
    mode = mu.mode
    raw = {pair: f(pair[0], pair[1], mode) for pair in pairs}
    dropped, penalized = [], []
    for pair, v in raw.items():
        if v == INF:
            if _charged(dec, *pair) and mu.weight(pair[0]) > 0 and nu.weight(pair[1]) > 0:
                raise UnboundedReward(pair)
            dropped.append(pair)
        elif v == -INF:
            penalized.append(pair)
    gone = set(dropped)
    keep = [p for p in pairs if p not in gone]
    costs = {p: raw[p] for p in keep}
    if penalized:
        if big_m is None:
            big_m = f.param.get("penalty")
        big_m = to_scalar(big_m, mode) if big_m is not None else _big_m(costs.values(), mu, nu)
        floor = min([v for v in costs.values() if v != -INF] or [zero(mode)])
        for p in penalized:
            costs[p] = floor - big_m
    lp = transport_lp(mu, nu, keep, costs)
    lp.meta.update(formulation=formulation, pairs=keep, dropped=dropped, penalized=penalized, big_m=big_m)
    return lp


def _read_solution(mu, nu, lp: LinearProgram, sol: LpSolution):
    coupling = Coupling.from_entries(zip(lp.col_labels, sol.primal), mu.mode)
    by_label = {row.label: sol.dual[i] for i, row in enumerate(lp.rows)}
    phi = {x: by_label[("mu", x)] for x in mu.xs}
    psi = {y: by_label[("nu", y)] for y in nu.xs}
    h = {x: by_label[("mart", x)] for x in mu.xs}
    return coupling, phi, psi, h


def _solve_checked(lp: LinearProgram):
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise NotInOrder(f"transport LP is {sol.status}")
    return sol, verify_solution(lp, sol)


def _with_mode(m: DiscreteMeasure, mode):
    if mode is None or m.mode == mode:
        return m
    return make_measure([(x, w) for x, w in m], mode, tol=m.tol)


def solve_primal_dual(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    f: RewardSpec,
    formulation: str = QUASISURE,
    mode: str | None = None,
    *,
    emit_gamma: bool = False,
) -> MotSolution:
    """Solve the transport LP and read a dual certificate off the optimal basis.

    ``componentwise`` solves each irreducible component on its own, normalizes
    ``psi_k = 0`` on ``J_k \\ I_k`` with the gauge transform, and glues the
    pieces together; the stationary part takes ``phi(x) = f(x, x)``, ``psi = 0``.
    A ``+inf`` reward on a chargeable pair gives ``primal_value = +inf``
    without solving.
    """
    mu, nu = _with_mode(mu, mode), _with_mode(nu, mode)
    if formulation not in FORMULATIONS:
        raise BadParams(f"unknown formulation {formulation!r}")
    dec = decompose(mu, nu)
    try:
        if formulation == COMPONENTWISE:
            out = _solve_componentwise(dec, f)
        else:
            out = _solve_global(dec, f, formulation)
    except UnboundedReward as exc:
        return MotSolution(INF, None, None, dec, formulation, f, notes=(f"unbounded at {exc.pair}",))
    if emit_gamma and out.certificate is not None:
        out.gamma = tuple(sorted(monotonicity_set(out.certificate, f, dec)))
    return out


def _penalty_guard(coupling: Coupling, penalized):
    return [p for p in penalized if coupling.entries.get(p, 0) > 0]


def _solve_global(dec: Decomposition, f: RewardSpec, formulation: str) -> MotSolution:
    """Solve one LP; ``-inf`` cells use big-M, raised tenfold while the optimizer
    still uses them and a coupling avoiding them exists."""
    mu, nu = dec.mu, dec.nu
    lp = build_mot_lp(mu, nu, f, formulation, decomposition=dec)
    sol, report = _solve_checked(lp)
    coupling = _read_solution(mu, nu, lp, sol)[0]
    notes = []
    used = _penalty_guard(coupling, lp.meta["penalized"])
    if used and f.param.get("penalty") is None:
        bad = set(lp.meta["penalized"])
        safe = [p for p in lp.meta["pairs"] if p not in bad]
        if martingale_coupling(mu, nu, safe) is not None:
            big_m = lp.meta["big_m"]
            while used:
                big_m = big_m * 10
                lp = build_mot_lp(mu, nu, f, formulation, decomposition=dec, big_m=big_m)
                sol, report = _solve_checked(lp)
                coupling = _read_solution(mu, nu, lp, sol)[0]
                used = _penalty_guard(coupling, lp.meta["penalized"])
            notes.append(f"big-M raised to {big_m}")
    coupling, phi, psi, h = _read_solution(mu, nu, lp, sol)
    cert = DualCertificate(phi, psi, h, formulation, sum(
        (w * phi[x] for x, w in mu), zero(mu.mode)) + sum((w * psi[y] for y, w in nu), zero(mu.mode)))
    value = sol.objective
    if lp.meta["dropped"]:
        notes.append(f"+inf reward at polar pairs {lp.meta['dropped']} left out of the LP")
    if used:
        notes.append(f"effectively -inf: optimizer uses penalized pairs {used}")
        value = -INF
    return MotSolution(
        value, coupling, cert, dec, formulation, f,
        verifications=[report], notes=tuple(notes), lp=lp, lp_solution=sol,
    )


def normalize_endpoints(cert: DualCertificate, boundary) -> DualCertificate:
    """Gauge-shift ``cert`` so that ``psi`` vanishes on the boundary atoms."""
    pts = list(boundary)
    if not pts:
        return cert
    if len(pts) == 1:
        return cert.gauge(cert.psi[pts[0]], 0)
    l, r = pts
    c2 = (cert.psi[r] - cert.psi[l]) / (r - l)
    c1 = cert.psi[l] - c2 * l
    return cert.gauge(c1, c2)


def _solve_componentwise(dec: Decomposition, f: RewardSpec) -> MotSolution:
    mu, nu = dec.mu, dec.nu
    mode = mu.mode
    phi, psi, h = {}, {y: zero(mode) for y in nu.xs}, {}
    entries, reports, values, notes = [], [], [], []
    value = zero(mode)
    for comp in dec.components:
        sub = Decomposition(comp.mu, comp.nu, (replace(comp, index=1),), make_measure([], mode))
        part = _solve_global(sub, f, QUASISURE)
        reports.extend(part.verifications)
        notes.extend(f"component {comp.index}: {n}" for n in part.notes)
        cert = normalize_endpoints(part.certificate, comp.boundary)
        for x in comp.mu.xs:
            phi[x] = cert.phi[x]
            h[x] = cert.h[x]
        for y in comp.nu.xs:
            if comp.in_I(y):
                psi[y] = cert.psi[y]
        entries.extend(part.coupling.entries.items())
        values.append(part.primal_value)
        value = value + part.primal_value
    stationary_value = zero(mode)
    for x, w in dec.stationary:
        fx = f(x, x, mode)
        if fx == INF:
            raise UnboundedReward((x, x))
        phi[x] = fx
        h[x] = zero(mode)
        entries.append(((x, x), w))
        stationary_value = stationary_value + (w * fx if fx != -INF else -INF)
    value = value + stationary_value
    coupling = Coupling.from_entries(entries, mode)
    cert_value = sum((w * phi[x] for x, w in mu), zero(mode)) + sum((w * psi[y] for y, w in nu), zero(mode))
    cert = DualCertificate(phi, psi, h, COMPONENTWISE, cert_value)
    return MotSolution(
        value, coupling, cert, dec, COMPONENTWISE, f,
        verifications=reports, component_values=tuple(values),
        stationary_value=stationary_value, notes=tuple(notes),
    )


# ---------------------------------------------------------------- oracles


def martingale_coupling(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    pairs=None,
    weights: dict | None = None,
) -> Coupling | None:
    """Some martingale coupling supported on ``pairs`` maximizing ``sum weights * p``.

    ``None`` when no such coupling exists.
    """
    if pairs is None:
        pairs = [(x, y) for x in mu.xs for y in nu.xs]
    pairs = list(pairs)
    lp = transport_lp(mu, nu, pairs, weights or {})
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        return None
    return Coupling.from_entries(zip(lp.col_labels, sol.primal), mu.mode)


def charging_witness(mu: DiscreteMeasure, nu: DiscreteMeasure, point) -> Coupling | None:
    """A martingale coupling charging ``point`` as much as possible, or ``None``.

    Uses every support pair, so it does not rely on the decomposition.
    """
    x, y = point
    if mu.weight(x) == 0 or nu.weight(y) == 0:
        return None
    coupling = martingale_coupling(mu, nu, weights={(x, y): 1})
    if coupling is None:
        raise NotInOrder("no martingale coupling exists")
    if coupling.entries.get((x, y), 0) > 0:
        return coupling
    return None


def chargeable_pairs(mu: DiscreteMeasure, nu: DiscreteMeasure) -> set:
    """All support pairs charged by some martingale coupling, found by LP alone.

    Repeatedly maximizes the total mass on pairs not yet seen charged. A zero
    optimum certifies every remaining pair as polar.
    """
    pairs = [(x, y) for x in mu.xs for y in nu.xs]
    charged: set = set()
    while True:
        todo = [p for p in pairs if p not in charged]
        if not todo:
            return charged
        coupling = martingale_coupling(mu, nu, pairs, {p: 1 for p in todo})
        if coupling is None:
            raise NotInOrder("no martingale coupling exists")
        fresh = {p for p in todo if coupling.entries.get(p, 0) > 0}
        if not fresh:
            return charged
        charged |= fresh


def monotonicity_set(certificate: DualCertificate, f: RewardSpec, decomposition: Decomposition, tol: float = 1e-9):
    """Equality set of ``certificate`` intersected with the non-polar support pairs."""
    mode = decomposition.mu.mode
    out = []
    for x, y in constraint_pairs(decomposition, QUASISURE):
        fx = f(x, y, mode)
        if fx in (INF, -INF):
            continue
        if eq(certificate(x, y), fx, mode, tol):
            out.append((x, y))
    return out


@dataclass(frozen=True)
class GammaCheck:
    concentrated: bool
    optimal: bool
    value: object
    optimum: object


def check_optimality_via_gamma(coupling: Coupling, gamma, solution: MotSolution, tol: float = 1e-9) -> GammaCheck:
    """Test a martingale coupling of its own marginals against ``gamma``.

    ``optimal`` compares the coupling's reward with a fresh solve for the
    coupling's marginals.
    """
    if not coupling.is_martingale(tol):
        raise NotMartingale("coupling fails the barycenter condition")
    mode = coupling.mode
    gamma = set(gamma)
    concentrated = all(pair in gamma for pair in coupling.support)
    f = solution.reward
    value = coupling.expectation(lambda x, y: f(x, y, mode))
    own = solve_primal_dual(coupling.first_marginal(), coupling.second_marginal(), f, QUASISURE)
    return GammaCheck(concentrated, eq(value, own.primal_value, mode, tol), value, own.primal_value)


# ---------------------------------------------------------------- lower bound


@dataclass(frozen=True)
class RelaxedReward:
    reward: RewardSpec
    offset: object
    violations: tuple = ()


def _as_fn(v, mode):
    if callable(v):
        return v
    if isinstance(v, dict):
        return lambda t: v[t]
    c = to_scalar(v, mode)
    return lambda t: c


def relax_lower_bound(f: RewardSpec, minorant, mu: DiscreteMeasure, nu: DiscreteMeasure) -> RelaxedReward:
    """Shift ``f`` by a minorant ``(phi0, psi0, h0)`` to a nonnegative table.

    Returns ``[f - phi0(x) - psi0(y) - h0(x)(y - x)]^+`` on the supports and
    the offset ``mu(phi0) + nu(psi0)`` to add back. Pairs where ``f`` falls
    below the minorant are listed in ``violations``.
    """
    mode = mu.mode
    phi0, psi0, h0 = (_as_fn(v, mode) for v in minorant)
    table, bad = {}, []
    for x in mu.xs:
        for y in nu.xs:
            shift = phi0(x) + psi0(y) + h0(x) * (y - x)
            v = f(x, y, mode)
            diff = v - shift
            if diff < 0:
                bad.append((x, y))
            table[(x, y)] = diff if diff > 0 else zero(mode)
    offset = mu.integrate(phi0) + nu.integrate(psi0)
    return RelaxedReward(RewardSpec.from_table(table, default=0), offset, tuple(bad))
