"""Random instance generators shared by the test modules."""

import random
from fractions import Fraction

from motline.measures import make_measure
from motline.mot import RewardSpec


def rand_weight(rng, top=9, den=(1, 2, 3, 4, 6)):
    return Fraction(rng.randint(1, top), rng.choice(den))


def random_instance(rng: random.Random, max_mu=6, span=12):
    """Convex-ordered pair on an integer grid.

    Each mu-atom either stays put or splits into a two-point martingale
    kernel, so supports stay at most 12 and stationary mass shows up often.
    """
    n_mu = rng.randint(1, max_mu)
    xs = rng.sample(range(-span // 2, span // 2 + 1), n_mu)
    mu_raw, nu_raw = [], []
    for x in xs:
        w = rand_weight(rng)
        mu_raw.append((x, w))
        if rng.random() < 0.3:
            nu_raw.append((x, w))
            continue
        a = x - rng.randint(1, 3)
        b = x + rng.randint(1, 3)
        nu_raw.append((a, w * Fraction(b - x, b - a)))
        nu_raw.append((b, w * Fraction(x - a, b - a)))
    return make_measure(mu_raw), make_measure(nu_raw)


def random_table(rng, mu, nu, top=10):
    table = {(x, y): Fraction(rng.randint(0, top), rng.randint(1, 4)) for x in mu.xs for y in nu.xs}
    return RewardSpec.from_table(table)


def random_concave(rng, lo, hi, max_breaks=8):
    """Random piecewise-linear concave function with breakpoints in ``[lo, hi]``."""
    from motline.integrals import ConcaveFunction

    k = rng.randint(1, max_breaks)
    xs = sorted({Fraction(rng.randint(4 * lo, 4 * hi), 4) for _ in range(k)})
    slopes = sorted((Fraction(rng.randint(-8, 8), rng.randint(1, 3)) for _ in range(len(xs) + 1)), reverse=True)
    pts = [(xs[0], Fraction(rng.randint(-5, 5)))]
    for i in range(1, len(xs)):
        pts.append((xs[i], pts[-1][1] + slopes[i] * (xs[i] - xs[i - 1])))
    return ConcaveFunction(tuple(pts), {}, slopes[0], slopes[-1])


def scipy_mot_value(mu, nu, f=None, pairs=None):
    """Float oracle: optimal value of the martingale transport LP via HiGHS.

    Returns ``None`` when no martingale coupling exists. Independent of the
    package's own simplex code.
    """
    import numpy as np
    from scipy.optimize import linprog

    if pairs is None:
        pairs = [(x, y) for x in mu.xs for y in nu.xs]
    pairs = list(pairs)
    if not pairs:
        return None
    rows, rhs = [], []
    for x, w in mu:
        rows.append([1.0 if p[0] == x else 0.0 for p in pairs])
        rhs.append(float(w))
    for y, w in nu:
        rows.append([1.0 if p[1] == y else 0.0 for p in pairs])
        rhs.append(float(w))
    for x, _ in mu:
        rows.append([float(p[1] - p[0]) if p[0] == x else 0.0 for p in pairs])
        rhs.append(0.0)
    c = np.zeros(len(pairs)) if f is None else -np.array([float(f(x, y)) for x, y in pairs])
    res = linprog(c, A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None), method="highs")
    if res.status == 2:
        return None
    assert res.status == 0, res.message
    return -res.fun


def scipy_charged_pairs(mu, nu):
    """Float oracle for the chargeable support pairs.

    Repeatedly maximizes the mass on pairs not yet seen charged with HiGHS;
    a zero optimum leaves the rest polar.
    """
    import numpy as np
    from scipy.optimize import linprog

    pairs = [(x, y) for x in mu.xs for y in nu.xs]
    rows, rhs = [], []
    for x, w in mu:
        rows.append([1.0 if p[0] == x else 0.0 for p in pairs])
        rhs.append(float(w))
    for y, w in nu:
        rows.append([1.0 if p[1] == y else 0.0 for p in pairs])
        rhs.append(float(w))
    for x, _ in mu:
        rows.append([float(p[1] - p[0]) if p[0] == x else 0.0 for p in pairs])
        rhs.append(0.0)
    charged = set()
    while True:
        c = -np.array([0.0 if p in charged else 1.0 for p in pairs])
        res = linprog(c, A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None), method="highs")
        assert res.status == 0, res.message
        new = {p for p, v in zip(pairs, res.x) if v > 1e-9 and p not in charged}
        if -res.fun < 1e-9 or not new:
            return charged
        charged |= new
