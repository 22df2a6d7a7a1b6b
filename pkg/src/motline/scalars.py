"""Scalar handling for the two arithmetic modes.

``exact`` mode carries :class:`fractions.Fraction` values and compares them
without tolerance. ``float`` mode carries Python floats and compares with an
absolute tolerance (default ``1e-9``).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)
DEFAULT_TOL = 1e-9

INF = math.inf


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def parse_rational(text) -> Fraction:
    """Parse an int, Fraction, decimal string, or ``"p/q"`` string exactly.

    Floats are read through their shortest repr so that ``0.1`` becomes 1/10.
    """
    if isinstance(text, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Rational):
        return Fraction(int(text.numerator), int(text.denominator))
    if isinstance(text, float):
        if not math.isfinite(text):
            raise ValueError(f"non-finite value {text!r} has no rational form")
        return Fraction(repr(text))
    if isinstance(text, str):
        return Fraction(text.strip())
    raise TypeError(f"cannot read {type(text).__name__} as a rational")


def to_scalar(value, mode: str):
    """Convert ``value`` into the scalar type of ``mode``; infinities pass through."""
    if isinstance(value, float) and math.isinf(value):
        return value
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "-inf"):
        return -INF if value.strip().startswith("-") else INF
    if mode == EXACT:
        return parse_rational(value)
    if isinstance(value, str) and "/" in value:
        return float(Fraction(value.strip()))
    return float(value)


def zero(mode: str):
    return Fraction(0) if mode == EXACT else 0.0


def is_zero(v, mode: str, tol: float = DEFAULT_TOL) -> bool:
    if mode == EXACT:
        return v == 0
    return abs(v) <= tol


def eq(a, b, mode: str, tol: float = DEFAULT_TOL) -> bool:
    if mode == EXACT:
        return a == b
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def le(a, b, mode: str, tol: float = DEFAULT_TOL) -> bool:
    """``a <= b`` in exact mode, ``a <= b + tol`` in float mode."""
    if mode == EXACT:
        return a <= b
    return a <= b + tol


def lt(a, b, mode: str, tol: float = DEFAULT_TOL) -> bool:
    """Strict comparison that treats values within ``tol`` as equal in float mode."""
    if mode == EXACT:
        return a < b
    return a < b - tol


def canonical(v) -> str:
    """Render a scalar for reports: ``p/q`` in lowest terms, or a float repr."""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Rational):
        return str(Fraction(int(v.numerator), int(v.denominator)))
    raise TypeError(f"not a scalar: {v!r}")
