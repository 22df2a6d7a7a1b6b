"""Two-phase primal simplex with Bland's rule, exact or floating.

Problems are stated as

    maximize  c.x   subject to   A_eq x = b_eq,   A_le x <= b_le,   x >= 0.

Exact mode runs on ``gmpy2.mpq`` internally and returns ``Fraction`` values.
Dual values come from the final basis inverse: free for equality rows,
nonnegative for ``<=`` rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable

import gmpy2

from .errors import IterationLimit
from .scalars import EXACT, FLOAT, check_mode, to_scalar

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FLOAT_PIVOT_TOL = 1e-9
FLOAT_FEAS_TOL = 1e-8
FLOAT_GAP_TOL = 1e-7


@dataclass
class Row:
    coeffs: dict
    sense: str
    rhs: object
    label: Hashable


@dataclass
class LinearProgram:
    """Maximization LP over nonnegative columns with labelled rows and columns."""

    mode: str = EXACT
    objective: list = field(default_factory=list)
    col_labels: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    _col_index: dict = field(default_factory=dict, repr=False)
    _row_labels: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        check_mode(self.mode)

    @property
    def n_cols(self):
        return len(self.objective)

    @property
    def n_rows(self):
        return len(self.rows)

    def add_column(self, label, cost=0) -> int:
        if label in self._col_index:
            raise ValueError(f"duplicate column label {label!r}")
        self._col_index[label] = len(self.objective)
        self.objective.append(to_scalar(cost, self.mode))
        self.col_labels.append(label)
        return len(self.objective) - 1

    def column(self, label) -> int:
        return self._col_index[label]

    def add_row(self, coeffs: dict, sense: str, rhs, label) -> int:
        """Add a row; ``coeffs`` maps column index (or label) to coefficient."""
        if sense not in ("eq", "le"):
            raise ValueError(f"row sense must be 'eq' or 'le', got {sense!r}")
        if label in self._row_labels:
            raise ValueError(f"duplicate row label {label!r}")
        clean = {}
        for key, v in coeffs.items():
            j = key if isinstance(key, int) else self._col_index[key]
            v = to_scalar(v, self.mode)
            if v != 0:
                clean[j] = clean.get(j, 0) + v
        self._row_labels.add(label)
        self.rows.append(Row(clean, sense, to_scalar(rhs, self.mode), label))
        return len(self.rows) - 1

    def row_index(self, label) -> int:
        for i, row in enumerate(self.rows):
            if row.label == label:
                return i
        raise KeyError(label)


@dataclass
class LpSolution:
    status: str
    primal: list
    dual: list
    objective: object
    redundant_rows: tuple = ()
    pivots: tuple = ()
    mode: str = EXACT

    @property
    def rank_deficiency(self):
        return len(self.redundant_rows)


def _to_num(v, mode):
    if mode == EXACT:
        return gmpy2.mpq(v.numerator, v.denominator)
    return float(v)


def _from_num(v, mode):
    if mode == EXACT:
        return Fraction(int(v.numerator), int(v.denominator))
    return float(v)


class _Tableau:
    """Dense tableau; each basic variable owns one row."""

    def __init__(self, lp: LinearProgram):
        self.mode = mode = lp.mode
        self.exact = mode == EXACT
        n = lp.n_cols
        self.n = n
        zero = gmpy2.mpq(0) if self.exact else 0.0
        one = gmpy2.mpq(1) if self.exact else 1.0
        self.zero, self.one = zero, one

        n_slack = sum(1 for r in lp.rows if r.sense == "le")
        self.sign = []
        self.unit_col = []  # column whose initial entries are e_i
        slack_of = {}
        s = n
        for i, row in enumerate(lp.rows):
            if row.sense == "le":
                slack_of[i] = s
                s += 1
        self.first_art = n + n_slack
        art = self.first_art
        art_of = {}
        for i, row in enumerate(lp.rows):
            neg = row.rhs < 0
            self.sign.append(-1 if neg else 1)
            if row.sense == "le" and not neg:
                self.unit_col.append(slack_of[i])
            else:
                art_of[i] = art
                self.unit_col.append(art)
                art += 1
        self.width = art
        self.T = []
        self.basis = []
        for i, row in enumerate(lp.rows):
            sg = self.sign[i]
            line = [zero] * (self.width + 1)
            for j, v in row.coeffs.items():
                line[j] = _to_num(v, mode) * sg
            if i in slack_of:
                line[slack_of[i]] = one * sg
            if i in art_of:
                line[art_of[i]] = one
            line[self.width] = _to_num(row.rhs, mode) * sg
            self.T.append(line)
            self.basis.append(self.unit_col[i])
        self.pivots = []

    def is_art(self, j):
        return j >= self.first_art

    def _pos(self, v):
        return v > 0 if self.exact else v > FLOAT_PIVOT_TOL

    def _nonzero(self, v):
        return v != 0 if self.exact else abs(v) > FLOAT_PIVOT_TOL

    def reduced_costs(self, cost):
        d = list(cost) + [self.zero]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.T[i]
                for j, v in enumerate(row):
                    if v:
                        d[j] -= cb * v
        return d

    def pivot(self, r, c, d):
        T = self.T
        prow = T[r]
        p = prow[c]
        if p != self.one:
            prow = [v / p for v in prow]
            T[r] = prow
        nz = [(k, v) for k, v in enumerate(prow) if v]
        for i, row in enumerate(T):
            if i == r:
                continue
            f = row[c]
            if f:
                for k, v in nz:
                    row[k] -= f * v
                if not self.exact:
                    row[c] = 0.0
        f = d[c]
        if f:
            for k, v in nz:
                d[k] -= f * v
            if not self.exact:
                d[c] = 0.0
        self.basis[r] = c
        self.pivots.append((r, c))

    def run(self, d, limit, allow):
        """Bland iterations until optimal; returns True if optimal, False if unbounded."""
        W = self.width
        while True:
            if len(self.pivots) > limit:
                raise IterationLimit(f"exceeded {limit} pivots")
            enter = None
            for j in range(W):
                if self._pos(d[j]) and allow(j):
                    enter = j
                    break
            if enter is None:
                return True
            best = None
            for i, row in enumerate(self.T):
                a = row[enter]
                if self._pos(a):
                    ratio = row[W] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], enter, d)


def solve_lp(lp: LinearProgram, max_iterations: int | None = None) -> LpSolution:
    """Solve ``lp`` by two-phase simplex with Bland's smallest-index rule.

    Redundant equality rows are those whose artificial cannot be driven out of
    the basis after phase 1; they stay basic at zero and are reported.
    """
    mode = lp.mode
    tab = _Tableau(lp)
    m, n, W = lp.n_rows, lp.n_cols, tab.width
    limit = max_iterations if max_iterations is not None else 2 ** (m + n)

    # phase 1: maximize -(sum of artificials)
    c1 = [tab.zero] * W
    for j in range(tab.first_art, W):
        c1[j] = -tab.one
    d = tab.reduced_costs(c1)
    tab.run(d, limit, lambda j: not tab.is_art(j))
    residual = sum((tab.T[i][W] for i, b in enumerate(tab.basis) if tab.is_art(b)), tab.zero)
    if (residual > 0) if tab.exact else (residual > FLOAT_FEAS_TOL * max(1.0, m)):
        return LpSolution(INFEASIBLE, [], [], None, (), tuple(tab.pivots), mode)

    redundant = []
    for i in range(m):
        if not tab.is_art(tab.basis[i]):
            continue
        row = tab.T[i]
        col = next((j for j in range(tab.first_art) if tab._nonzero(row[j])), None)
        if col is None:
            redundant.append(lp.rows[i].label)
        else:
            tab.pivot(i, col, d)

    # phase 2
    cost = [tab.zero] * W
    for j, v in enumerate(lp.objective):
        cost[j] = _to_num(v, mode)
    d = tab.reduced_costs(cost)
    if not tab.run(d, limit, lambda j: not tab.is_art(j)):
        return LpSolution(UNBOUNDED, [], [], None, tuple(redundant), tuple(tab.pivots), mode)

    x = [tab.zero] * n
    for i, b in enumerate(tab.basis):
        if b < n:
            x[b] = tab.T[i][W]
    y = []
    for i in range(m):
        uc = tab.unit_col[i]
        yi = sum((cost[b] * tab.T[r][uc] for r, b in enumerate(tab.basis) if cost[b]), tab.zero)
        y.append(yi * tab.sign[i])
    if not tab.exact:
        x = [max(v, 0.0) for v in x]
    primal = [_from_num(v, mode) for v in x]
    dual = [_from_num(v, mode) for v in y]
    obj = sum((c * v for c, v in zip(lp.objective, primal)), Fraction(0) if mode == EXACT else 0.0)
    log.debug("solved LP %dx%d in %d pivots", m, n, len(tab.pivots))
    return LpSolution(OPTIMAL, primal, dual, obj, tuple(redundant), tuple(tab.pivots), mode)


@dataclass(frozen=True)
class VerificationReport:
    primal_feasible: bool
    dual_feasible: bool
    gap: object
    slackness_violations: tuple
    max_primal_residual: object = 0
    max_dual_residual: object = 0

    @property
    def ok(self) -> bool:
        if not (self.primal_feasible and self.dual_feasible and not self.slackness_violations):
            return False
        if isinstance(self.gap, float):
            return abs(self.gap) <= FLOAT_GAP_TOL
        return self.gap == 0


def verify_solution(lp: LinearProgram, sol: LpSolution) -> VerificationReport:
    """Recompute every residual of ``sol`` from the raw LP data.

    Nothing from the solver's tableau is reused: primal rows, reduced costs,
    the duality gap and complementary slackness are all recomputed here.
    """
    if sol.status != OPTIMAL:
        raise ValueError("only optimal solutions can be verified")
    exact = lp.mode == EXACT
    tol = 0 if exact else FLOAT_FEAS_TOL
    zero = Fraction(0) if exact else 0.0
    x, y = sol.primal, sol.dual
    violations = []
    primal_ok = all(v >= -tol for v in x)
    max_pres = zero
    row_act = []
    for i, row in enumerate(lp.rows):
        act = sum((v * x[j] for j, v in row.coeffs.items()), zero)
        row_act.append(act)
        res = act - row.rhs
        if row.sense == "eq":
            max_pres = max(max_pres, abs(res))
            if abs(res) > tol:
                primal_ok = False
        else:
            max_pres = max(max_pres, res)
            if res > tol:
                primal_ok = False

    dual_ok = True
    for i, row in enumerate(lp.rows):
        if row.sense == "le" and y[i] < -tol:
            dual_ok = False
    colsum = [zero] * lp.n_cols
    for i, row in enumerate(lp.rows):
        yi = y[i]
        if yi:
            for j, v in row.coeffs.items():
                colsum[j] += v * yi
    max_dres = zero
    for j, c in enumerate(lp.objective):
        slack = colsum[j] - c
        max_dres = max(max_dres, -slack)
        if slack < -tol:
            dual_ok = False
        if x[j] > tol and abs(slack) > tol:
            violations.append(("column", lp.col_labels[j]))
    for i, row in enumerate(lp.rows):
        if row.sense == "le" and y[i] > tol and abs(row_act[i] - row.rhs) > tol:
            violations.append(("row", row.label))

    primal_obj = sum((c * v for c, v in zip(lp.objective, x)), zero)
    dual_obj = sum((row.rhs * y[i] for i, row in enumerate(lp.rows)), zero)
    return VerificationReport(
        primal_ok, dual_ok, primal_obj - dual_obj, tuple(violations), max_pres, max_dres
    )


def float_copy(lp: LinearProgram) -> LinearProgram:
    """Same LP in float mode."""
    out = LinearProgram(FLOAT)
    for label, c in zip(lp.col_labels, lp.objective):
        out.add_column(label, float(c))
    for row in lp.rows:
        out.add_row({j: float(v) for j, v in row.coeffs.items()}, row.sense, float(row.rhs), row.label)
    return out
