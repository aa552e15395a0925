"""Exact rational helpers and the ``"num/den"`` string encoding."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

from .errors import InputError


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings exactly.

    Floats are refused: they would silently smuggle rounding into the
    exact-arithmetic paths.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational number: {value!r}") from exc
    raise InputError(f"expected an exact rational, got {type(value).__name__} {value!r}")


def fraction_str(q: Fraction) -> str:
    """Render as ``"num/den"``; integers keep an explicit ``/1``."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def primitive(vec: Iterable) -> tuple[int, ...]:
    """Scale a rational vector to coprime integers with first nonzero entry positive."""
    fr = [to_fraction(c) if not isinstance(c, Fraction) else c for c in vec]
    den = lcm_of_denominators(fr)
    ints = [int(c * den) for c in fr]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    if g == 0:
        raise InputError("zero vector has no projective representative")
    ints = [c // g for c in ints]
    for c in ints:
        if c:
            if c < 0:
                ints = [-x for x in ints]
            break
    return tuple(ints)


def jsonable(obj):
    """Recursively convert Fractions to ``"num/den"`` strings and tuples to lists."""
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj, key=str)]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj
