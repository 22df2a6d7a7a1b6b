"""Generalized integrals ``(mu - nu)(chi)`` of concave functions, the moderator
condition, pair integrals and moderator extraction from dual triples."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import AllInfinite, BadParams, DomainMismatch, ModeratorFailure, NoAtom, NotIrreducible, NotMartingale
from .measures import DiscreteMeasure, IrreducibleComponent, decompose, dirac, potential
from .scalars import EXACT, INF, is_zero, zero


def _num(v):
    return Fraction(v) if isinstance(v, int) else v


@dataclass(frozen=True)
class ConcaveFunction:
    """Piecewise-linear concave function given by its breakpoints.

    Outside the breakpoints it continues with ``left_slope`` / ``right_slope``
    (default: the slope of the adjacent segment, or 0 for a single point).
    ``boundary_jumps`` maps a point to the size of a downward jump there; the
    value at that point is the continuous value minus the jump.
    """

    breakpoints: tuple
    boundary_jumps: dict = field(default_factory=dict, compare=False)
    left_slope: object = None
    right_slope: object = None

    def __post_init__(self):
        pts = tuple(sorted((_num(x), _num(v)) for x, v in self.breakpoints))
        if not pts:
            raise BadParams("a concave function needs at least one breakpoint")
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if a == b:
                raise BadParams(f"duplicate breakpoint {a}")
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "boundary_jumps", {_num(k): _num(v) for k, v in self.boundary_jumps.items()})
        for name in ("left_slope", "right_slope"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _num(getattr(self, name)))
        seg = self.segment_slopes
        if self.left_slope is None:
            object.__setattr__(self, "left_slope", seg[0] if seg else 0 * pts[0][1])
        if self.right_slope is None:
            object.__setattr__(self, "right_slope", seg[-1] if seg else 0 * pts[0][1])
        slopes = [self.left_slope, *seg, self.right_slope]
        for s, t in zip(slopes, slopes[1:]):
            if t > s:
                raise BadParams("slopes must be nonincreasing for a concave function")
        for pt, j in self.boundary_jumps.items():
            if j < 0:
                raise BadParams(f"negative jump at {pt}")

    @classmethod
    def affine(cls, a, b, at=0):
        """``y -> a + b*y``, stored as a single breakpoint at ``at``."""
        return cls(((at, a + b * at),), {}, b, b)

    @property
    def segment_slopes(self):
        p = self.breakpoints
        return [(v1 - v0) / (x1 - x0) for (x0, v0), (x1, v1) in zip(p, p[1:])]

    @property
    def xs(self):
        return [x for x, _ in self.breakpoints]

    def continuous(self, y):
        """Value without the boundary jumps."""
        p = self.breakpoints
        if y <= p[0][0]:
            return p[0][1] + self.left_slope * (y - p[0][0])
        if y >= p[-1][0]:
            return p[-1][1] + self.right_slope * (y - p[-1][0])
        lo, hi = 0, len(p) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if p[mid][0] <= y:
                lo = mid
            else:
                hi = mid
        (x0, v0), (x1, v1) = p[lo], p[hi]
        return v0 + (v1 - v0) * (y - x0) / (x1 - x0)

    def __call__(self, y):
        return self.continuous(y) - self.boundary_jumps.get(y, 0)

    def kinks(self):
        """``(t, drop)`` for every breakpoint where the slope strictly drops."""
        seg = self.segment_slopes
        slopes = [self.left_slope, *seg, self.right_slope]
        out = []
        for i, (x, _) in enumerate(self.breakpoints):
            drop = slopes[i] - slopes[i + 1]
            if drop != 0:
                out.append((x, drop))
        return out

    def right_derivative(self, y):
        p = self.breakpoints
        if y >= p[-1][0]:
            return self.right_slope
        if y < p[0][0]:
            return self.left_slope
        seg = self.segment_slopes
        for i in range(len(p) - 1):
            if p[i][0] <= y < p[i + 1][0]:
                return seg[i]
        return self.right_slope

    def left_derivative(self, y):
        p = self.breakpoints
        if y <= p[0][0]:
            return self.left_slope
        if y > p[-1][0]:
            return self.right_slope
        seg = self.segment_slopes
        for i in range(len(p) - 1):
            if p[i][0] < y <= p[i + 1][0]:
                return seg[i]
        return self.left_slope

    def tangent_truncation(self, lo, hi) -> ConcaveFunction:
        """Keep ``chi`` on ``[lo, hi]`` and continue affinely outside with the
        one-sided slopes at ``lo`` and ``hi``; jumps are dropped."""
        inner = [(x, v) for x, v in self.breakpoints if lo < x < hi]
        pts = [(lo, self.continuous(lo)), *inner, (hi, self.continuous(hi))]
        if lo == hi:
            return ConcaveFunction(pts[:1], {}, self.left_derivative(lo), self.right_derivative(lo))
        return ConcaveFunction(tuple(pts), {}, self.right_derivative(lo), self.left_derivative(hi))


def _domain(mu: DiscreteMeasure, nu: DiscreteMeasure, component: IrreducibleComponent | None):
    if component is not None:
        return component.l, component.r, set(component.boundary)
    return nu.xs[0], nu.xs[-1], {nu.xs[0], nu.xs[-1]}


def _check_domain(chi: ConcaveFunction, lo, hi, jump_points):
    for x, _ in chi.kinks():
        if x < lo or x > hi:
            raise DomainMismatch(f"kink {x} lies outside [{lo}, {hi}]")
    for pt, j in chi.boundary_jumps.items():
        if j != 0 and pt not in jump_points:
            raise DomainMismatch(f"jump at {pt} is not at an endpoint of J outside I")


def concave_integral_i2(chi: ConcaveFunction, mu: DiscreteMeasure, nu: DiscreteMeasure, component=None):
    """Integration-by-parts form of ``(mu - nu)(chi)``.

    ``1/2 * sum (u_nu - u_mu)(t) * drop(t)`` over the kinks of ``chi`` plus
    ``jump * (nu - mu)({e})`` over the boundary jumps. Without a component the
    domain is the convex hull of ``supp nu``.
    """
    lo, hi, jump_points = _domain(mu, nu, component)
    _check_domain(chi, lo, hi, jump_points)
    u_mu, u_nu = potential(mu), potential(nu)
    total = zero(mu.mode)
    for t, drop in chi.kinks():
        total += (u_nu(t) - u_mu(t)) * drop
    total = total / 2
    for pt, j in sorted(chi.boundary_jumps.items()):
        total += j * (nu.weight(pt) - mu.weight(pt))
    return total


def concave_integral_i3(chi: ConcaveFunction, mu: DiscreteMeasure, nu: DiscreteMeasure, coupling, tol: float = 1e-9):
    """Disintegration form ``sum_x mu(x) [chi(x) - sum_y kappa(x, y) chi(y)]``."""
    if not coupling.is_martingale(tol) or not coupling.is_coupling_of(mu, nu, tol):
        raise NotMartingale("coupling is not a martingale coupling of (mu, nu)")
    total = zero(mu.mode)
    for x in mu.xs:
        kernel = coupling.kernel(x)
        inner = sum((k * chi(y) for y, k in kernel.items()), zero(mu.mode))
        total += mu.weight(x) * (chi(x) - inner)
    return total


@dataclass(frozen=True)
class ModeratorCondition:
    holds: bool
    c_star: object
    argmax: object = None


def _single_component(mu, nu):
    dec = decompose(mu, nu)
    if len(dec.components) != 1 or dec.stationary.mass != 0:
        raise NotIrreducible("the pair is not irreducible")
    return dec.components[0]


def _ratio_scan(mu, nu, lo, hi, include_lo=False):
    """Max of ``(u_nu - u_dm) / (u_nu - u_mu)`` over kinks in ``(lo, hi)``.

    Finite endpoints that are nu-atoms contribute the limit ratio 1 of the
    one-sided slope gaps. Returns ``(value, argmax)``.
    """
    m = mu.mean
    dm = dirac(m, mu.mass, mu.mode)
    u_mu, u_nu, u_dm = potential(mu), potential(nu), potential(dm)
    pts = sorted(set(mu.xs) | set(nu.xs) | {m})
    best, where = None, None
    for t in pts:
        if not (lo < t < hi or (include_lo and t == lo)):
            continue
        den = u_nu(t) - u_mu(t)
        if den <= 0:
            return INF, t
        r = (u_nu(t) - u_dm(t)) / den
        if best is None or r > best:
            best, where = r, t
    for e in (lo, hi):
        if e == lo and include_lo:
            continue
        if nu.weight(e) > 0:
            # numerator and denominator slopes both equal 2 nu({e}) at e
            one = 1 if mu.mode == EXACT else 1.0
            if best is None or one > best:
                best, where = one, e
        elif abs(e) != INF:
            return INF, e
    return best, where


def moderator_condition(mu: DiscreteMeasure, nu: DiscreteMeasure) -> ModeratorCondition:
    """Smallest ``C`` with ``u_nu - u_{delta_m} <= C (u_nu - u_mu)`` on ``I``.

    The ratio is linear-fractional between kinks, so the kinks of ``u_mu``,
    ``u_nu`` and ``u_{delta_m}`` inside ``I`` together with the endpoint
    limits give the exact supremum.
    """
    comp = _single_component(mu, nu)
    c, where = _ratio_scan(mu, nu, comp.l, comp.r)
    return ModeratorCondition(c != INF, c, where)


def extract_moderator(phi: dict, h: dict, nu_support) -> ConcaveFunction:
    """Lower envelope ``inf_x phi(x) + h(x)(y - x)`` as a concave function.

    Built with the convex hull trick over the finite lines and represented on
    the hull of ``supp nu`` and the atoms of ``phi``; outside that range it
    continues along the extreme lines of the envelope.
    """
    lines = {}
    for x, v in phi.items():
        if v == INF:
            continue
        s = h.get(x, 0)
        c = v - s * x
        if s not in lines or c < lines[s]:
            lines[s] = c
    if not lines:
        raise AllInfinite("phi is +inf at every atom")
    ordered = sorted(lines.items(), key=lambda sc: -sc[0])

    def cross(a, b):
        return (b[1] - a[1]) / (a[0] - b[0])

    hull = []
    for ln in ordered:
        while len(hull) >= 2 and cross(hull[-2], ln) <= cross(hull[-2], hull[-1]):
            hull.pop()
        hull.append(ln)
    xs = list(nu_support) + [x for x, v in phi.items() if v != INF]
    lo, hi = min(xs), max(xs)

    def env(y):
        return min(s * y + c for s, c in hull)

    pts = {lo: env(lo), hi: env(hi)}
    for a, b in zip(hull, hull[1:]):
        t = cross(a, b)
        if lo < t < hi:
            pts[t] = env(t)
    first = min(hull, key=lambda sc: (sc[0] * lo + sc[1], -sc[0]))
    last = min(hull, key=lambda sc: (sc[0] * hi + sc[1], sc[0]))
    return ConcaveFunction(tuple(sorted(pts.items())), {}, first[0], last[0])


@dataclass(frozen=True)
class PairIntegralValue:
    value: object
    moderator_used: ConcaveFunction
    finite: bool = True


def _finite_on(values: dict, measure: DiscreteMeasure, name: str):
    for x in measure.xs:
        v = values.get(x)
        if v is None or v in (INF, -INF):
            raise ModeratorFailure(f"{name} is not finite at the atom {x}")


def pair_integral(phi: dict, psi: dict, chi: ConcaveFunction | None, mu: DiscreteMeasure, nu: DiscreteMeasure, component=None) -> PairIntegralValue:
    """``mu(phi - chi) + nu(psi + chi) + (mu - nu)(chi)`` with the last term by I2."""
    if chi is None:
        chi = ConcaveFunction.affine(zero(mu.mode), zero(mu.mode))
    _finite_on(phi, mu, "phi")
    _finite_on(psi, nu, "psi")
    a = sum((w * (phi[x] - chi(x)) for x, w in mu), zero(mu.mode))
    b = sum((w * (psi[y] + chi(y)) for y, w in nu), zero(mu.mode))
    return PairIntegralValue(a + b + concave_integral_i2(chi, mu, nu, component), chi, True)


def hedging_value(phi: dict, psi: dict, h: dict, coupling):
    """``E[phi(X) + psi(Y) + h(X)(Y - X)]`` under ``coupling``."""
    return coupling.expectation(lambda x, y: phi[x] + psi[y] + h.get(x, 0) * (y - x))


@dataclass(frozen=True)
class EndpointEstimate:
    bound: object
    satisfied: bool
    c: object
    integral: object


def endpoint_atom_estimate(chi: ConcaveFunction, mu: DiscreteMeasure, nu: DiscreteMeasure) -> EndpointEstimate:
    """Check ``chi(r) >= -(C / nu({r})) * int_[a, inf) chi d(mu - nu)``.

    ``a`` is the barycenter and ``r`` the right endpoint of the (irreducible)
    pair. ``C`` comes from the moderator ratio scan restricted to ``[a, r]``.
    """
    comp = _single_component(mu, nu)
    r = comp.r
    if abs(r) == INF:
        raise BadParams("the right endpoint must be finite")
    atom = nu.weight(r)
    if atom == 0:
        raise NoAtom(f"nu has no atom at {r}")
    a = mu.mean
    if not is_zero(chi(a), mu.mode) or not is_zero(chi.left_derivative(a), mu.mode):
        raise BadParams("chi must vanish with left slope 0 at the barycenter")
    c, _ = _ratio_scan(mu, nu, a, r, include_lo=True)
    integral = sum((w * chi(x) for x, w in mu if x >= a), zero(mu.mode))
    integral -= sum((w * chi(y) for y, w in nu if y >= a), zero(mu.mode))
    bound = -(c / atom) * integral
    return EndpointEstimate(bound, chi(r) >= bound, c, integral)
