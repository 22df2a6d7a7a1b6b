"""Discrete measures on the line, potential functions, convex order, and the
decomposition of a convex-ordered pair into irreducible components.

Everything here is immutable. In exact mode all values are ``Fraction`` and
every identity below holds with ``==``; float mode compares with the
measure's tolerance.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import EmptyMeasure, InfiniteEndpoint, NegativeMass, NotInOrder, SplitInfeasible
from .scalars import DEFAULT_TOL, EXACT, check_mode, eq, is_zero, lt, to_scalar, zero


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported nonnegative measure with strictly increasing atoms."""

    xs: tuple
    ws: tuple
    mode: str = EXACT
    tol: float = DEFAULT_TOL
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        check_mode(self.mode)
        if len(self.xs) != len(self.ws):
            raise ValueError("xs and ws must have equal length")
        for a, b in zip(self.xs, self.xs[1:]):
            if not a < b:
                raise ValueError("atom positions must be strictly increasing")
        for w in self.ws:
            if w < 0:
                raise NegativeMass(f"negative mass {w}")
            if w == 0:
                raise ValueError("zero-mass atoms must be dropped")
        object.__setattr__(self, "_index", dict(zip(self.xs, self.ws)))

    def __len__(self):
        return len(self.xs)

    def __iter__(self):
        return iter(zip(self.xs, self.ws))

    @property
    def atoms(self):
        return list(zip(self.xs, self.ws))

    @property
    def support(self):
        return self.xs

    @cached_property
    def mass(self):
        return sum(self.ws, zero(self.mode))

    @cached_property
    def first_moment(self):
        return sum((w * x for x, w in self), zero(self.mode))

    @cached_property
    def mean(self):
        if self.mass == 0:
            raise EmptyMeasure("mean of an empty measure is undefined")
        return self.first_moment / self.mass

    @cached_property
    def second_moment(self):
        return sum((w * x * x for x, w in self), zero(self.mode))

    @property
    def variance(self):
        """Variance of the normalized measure."""
        m = self.mean
        return self.second_moment / self.mass - m * m

    def weight(self, x):
        return self._index.get(x, zero(self.mode))

    def __contains__(self, x):
        return x in self._index

    def integrate(self, g):
        return sum((w * g(x) for x, w in self), zero(self.mode))

    def restrict(self, lo=None, hi=None, *, lo_closed=False, hi_closed=False):
        """Restriction to the interval between ``lo`` and ``hi`` (``None`` = unbounded)."""
        keep = []
        for x, w in self:
            if lo is not None and (x < lo or (x == lo and not lo_closed)):
                continue
            if hi is not None and (x > hi or (x == hi and not hi_closed)):
                continue
            keep.append((x, w))
        return self._from_sorted(keep)

    def shift(self, d):
        return self._from_sorted([(x + d, w) for x, w in self])

    def scale(self, c):
        if c < 0:
            raise NegativeMass("cannot scale a measure by a negative factor")
        return self._from_sorted([(x, w * c) for x, w in self if w * c != 0])

    def __add__(self, other: DiscreteMeasure):
        if other.mode != self.mode:
            raise ValueError("cannot add measures of different modes")
        return make_measure(list(self) + list(other), self.mode, tol=self.tol)

    def _from_sorted(self, pairs):
        return DiscreteMeasure(
            tuple(x for x, _ in pairs), tuple(w for _, w in pairs), self.mode, self.tol
        )

    def same_atoms(self, other: DiscreteMeasure) -> bool:
        """Atomwise equality (exact, or within tolerance in float mode)."""
        if self.xs != other.xs:
            return False
        return all(eq(a, b, self.mode, self.tol) for a, b in zip(self.ws, other.ws))


def make_measure(raw_atoms: Iterable, mode: str = EXACT, *, tol: float = DEFAULT_TOL) -> DiscreteMeasure:
    """Build a measure from ``(position, mass)`` pairs.

    Duplicate positions are merged, zero masses dropped, atoms sorted.
    Raises :class:`NegativeMass` for any negative mass.
    """
    check_mode(mode)
    merged: dict = {}
    for x, w in raw_atoms:
        x = to_scalar(x, mode)
        w = to_scalar(w, mode)
        if w < 0:
            raise NegativeMass(f"atom at {x} has negative mass {w}")
        merged[x] = merged.get(x, zero(mode)) + w
    pairs = sorted((x, w) for x, w in merged.items() if w != 0)
    return DiscreteMeasure(tuple(x for x, _ in pairs), tuple(w for _, w in pairs), mode, tol)


def dirac(x, mass=1, mode: str = EXACT) -> DiscreteMeasure:
    return make_measure([(x, mass)], mode)


@dataclass(frozen=True)
class PotentialFunction:
    """Piecewise-linear convex function ``x -> sum_t w |t - x|``.

    ``kinks`` holds ``(x, value)`` at the atoms; outside the atoms the function
    is affine with slopes ``left_slope = -mass`` and ``right_slope = +mass``.
    """

    kinks: tuple
    left_slope: object
    right_slope: object

    @cached_property
    def _xs(self):
        return [x for x, _ in self.kinks]

    @cached_property
    def segment_slopes(self):
        ks = self.kinks
        inner = [(v1 - v0) / (x1 - x0) for (x0, v0), (x1, v1) in zip(ks, ks[1:])]
        return [self.left_slope] + inner + [self.right_slope]

    def __call__(self, t):
        xs = self._xs
        i = bisect.bisect_left(xs, t)
        if i < len(xs) and xs[i] == t:
            return self.kinks[i][1]
        if i == 0:
            x0, v0 = self.kinks[0]
            return v0 + self.left_slope * (t - x0)
        x0, v0 = self.kinks[i - 1]
        return v0 + self.segment_slopes[i] * (t - x0)

    def left_derivative(self, t):
        i = bisect.bisect_left(self._xs, t)
        return self.segment_slopes[i]

    def right_derivative(self, t):
        i = bisect.bisect_right(self._xs, t)
        return self.segment_slopes[i]

    def slope_jump(self, t):
        return self.right_derivative(t) - self.left_derivative(t)


def potential(mu: DiscreteMeasure) -> PotentialFunction:
    """Potential function of ``mu`` in exact piecewise-linear form."""
    if len(mu) == 0:
        raise EmptyMeasure("potential of an empty measure")
    total_w, total_s = mu.mass, mu.first_moment
    left_w = left_s = zero(mu.mode)
    kinks = []
    for x, w in mu:
        # atoms strictly left of x contribute (x - t), atoms right contribute (t - x)
        right_w, right_s = total_w - left_w - w, total_s - left_s - w * x
        kinks.append((x, x * left_w - left_s + right_s - x * right_w))
        left_w += w
        left_s += w * x
    return PotentialFunction(tuple(kinks), -total_w, total_w)


def potential_value(mu: DiscreteMeasure, t):
    """Direct evaluation of ``sum_x w |x - t|`` (no piecewise representation)."""
    return sum((w * abs(x - t) for x, w in mu), zero(mu.mode))


def _kink_union(mu: DiscreteMeasure, nu: DiscreteMeasure):
    return sorted(set(mu.xs) | set(nu.xs))


def _touches(u_mu, u_nu, mode, tol) -> bool:
    if mode == EXACT:
        return u_mu == u_nu
    return abs(u_nu - u_mu) <= tol * (1 + abs(u_nu))


@dataclass(frozen=True)
class OrderReport:
    ordered: bool
    reason: str
    touch_points: tuple = ()

    def __bool__(self):
        return self.ordered


def check_convex_order(mu: DiscreteMeasure, nu: DiscreteMeasure) -> OrderReport:
    """Decide ``mu <=_c nu`` by comparing potentials at every kink.

    ``u_nu - u_mu`` is piecewise linear with kinks at the atoms and vanishes
    outside the supports once mass and mean agree, so the kinks suffice.
    """
    if len(mu) == 0 or len(nu) == 0:
        raise EmptyMeasure("convex order needs nonempty measures")
    if mu.mode != nu.mode:
        raise ValueError("measures must share one arithmetic mode")
    mode, tol = mu.mode, max(mu.tol, nu.tol)
    if not eq(mu.mass, nu.mass, mode, tol):
        return OrderReport(False, "mass mismatch")
    if not eq(mu.first_moment, nu.first_moment, mode, tol):
        return OrderReport(False, "mean mismatch")
    u_mu, u_nu = potential(mu), potential(nu)
    lo, hi = nu.xs[0], nu.xs[-1]
    touches = []
    for x in _kink_union(mu, nu):
        a, b = u_mu(x), u_nu(x)
        if _touches(a, b, mode, tol):
            if lo < x < hi:
                touches.append(x)
        elif lt(b, a, mode, tol):
            return OrderReport(False, f"potential order fails at {x}")
    return OrderReport(True, "ordered", tuple(touches))


@dataclass(frozen=True)
class IrreducibleComponent:
    """One irreducible piece: ``I = (l, r)`` open, ``J`` adds endpoints that are nu-atoms."""

    index: int
    l: object
    r: object
    mu: DiscreteMeasure
    nu: DiscreteMeasure

    @property
    def left_closed(self) -> bool:
        return self.nu.weight(self.l) > 0

    @property
    def right_closed(self) -> bool:
        return self.nu.weight(self.r) > 0

    def in_I(self, x) -> bool:
        return self.l < x < self.r

    def in_J(self, y) -> bool:
        if self.l < y < self.r:
            return True
        return (y == self.l and self.left_closed) or (y == self.r and self.right_closed)

    @property
    def boundary(self):
        """Points of ``J`` outside ``I``."""
        out = []
        if self.left_closed:
            out.append(self.l)
        if self.right_closed:
            out.append(self.r)
        return tuple(out)

    def __repr__(self):
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        return f"IrreducibleComponent(k={self.index}, J={lb}{self.l}, {self.r}{rb})"


@dataclass(frozen=True)
class Decomposition:
    mu: DiscreteMeasure
    nu: DiscreteMeasure
    components: tuple
    stationary: DiscreteMeasure

    @property
    def identity_coupling_mass(self):
        return self.stationary.mass

    def component_of(self, x):
        """The component whose open interval contains ``x``, or ``None``."""
        for comp in self.components:
            if comp.in_I(x):
                return comp
        return None

    def __len__(self):
        return len(self.components)


def decompose(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Decomposition:
    """Split a convex-ordered pair into irreducible components plus the stationary part.

    Components are the maximal open intervals where ``u_mu < u_nu``. A nu-atom
    sitting on a shared endpoint is divided between neighbours by solving,
    per component, the 2x2 mass/mean system for the two endpoint shares.
    """
    report = check_convex_order(mu, nu)
    if not report.ordered:
        raise NotInOrder(report.reason)
    mode, tol = mu.mode, max(mu.tol, nu.tol)
    u_mu, u_nu = potential(mu), potential(nu)
    kinks = _kink_union(mu, nu)
    positive = [not _touches(u_mu(x), u_nu(x), mode, tol) for x in kinks]

    intervals = []
    i = 0
    while i < len(kinks):
        if positive[i]:
            j = i
            while positive[j]:
                j += 1
            intervals.append((kinks[i - 1], kinks[j]))
            i = j
        i += 1

    components = []
    used = {}
    for k, (l, r) in enumerate(intervals, start=1):
        mu_k = mu.restrict(l, r)
        inner = nu.restrict(l, r)
        need_mass = mu_k.mass - inner.mass
        need_moment = mu_k.first_moment - inner.first_moment
        b = (need_moment - l * need_mass) / (r - l)
        a = need_mass - b
        for share, pt in ((a, l), (b, r)):
            if lt(share, 0, mode, tol) or lt(nu.weight(pt), share, mode, tol):
                raise SplitInfeasible(f"component {k}: share {share} at {pt} is infeasible")
        extra = [(pt, s) for s, pt in ((a, l), (b, r)) if not is_zero(s, mode, tol) and s > 0]
        for pt, s in extra:
            used[pt] = used.get(pt, zero(mode)) + s
        nu_k = make_measure(list(inner) + extra, mode, tol=tol)
        components.append(IrreducibleComponent(k, l, r, mu_k, nu_k))

    inside = lambda x: any(c.l < x < c.r for c in components)  # noqa: E731
    stationary = make_measure([(x, w) for x, w in mu if not inside(x)], mode, tol=tol)
    leftover = []
    for y, w in nu:
        if inside(y):
            continue
        rest = w - used.get(y, zero(mode))
        if not is_zero(rest, mode, tol):
            leftover.append((y, rest))
    leftover = make_measure(leftover, mode, tol=tol) if all(w > 0 for _, w in leftover) else None
    if leftover is None or not leftover.same_atoms(stationary):
        raise SplitInfeasible("nu outside the components does not match the stationary part of mu")
    return Decomposition(mu, nu, tuple(components), stationary)


def endpoint_slope_gap(component: IrreducibleComponent, endpoint):
    """One-sided slope gap of the component potentials at a finite endpoint.

    At ``r`` this is ``u_mu'(r) - d^- u_nu(r)``; at ``l`` it is
    ``d^+ u_nu(l) - u_mu'(l)``. Either way it equals ``2 * nu_k({endpoint})``.
    """
    if endpoint not in (component.l, component.r):
        raise ValueError(f"{endpoint} is not an endpoint of {component!r}")
    if isinstance(endpoint, float) and endpoint in (float("inf"), float("-inf")):
        raise InfiniteEndpoint(f"endpoint {endpoint} is not finite")
    u_mu, u_nu = potential(component.mu), potential(component.nu)
    if endpoint == component.r:
        return u_mu.left_derivative(endpoint) - u_nu.left_derivative(endpoint)
    return u_nu.right_derivative(endpoint) - u_mu.right_derivative(endpoint)


def as_measure(obj, mode: str = EXACT) -> DiscreteMeasure:
    if isinstance(obj, DiscreteMeasure):
        return obj
    return make_measure(obj, mode)


def uniform(points: Sequence, total=1, mode: str = EXACT) -> DiscreteMeasure:
    """Equal weights on ``points`` summing to ``total``."""
    n = len(points)
    w = Fraction(total) / n if mode == EXACT else float(total) / n
    return make_measure([(p, w) for p in points], mode)
