"""Exact rational helpers.

All finite quantities are :class:`fractions.Fraction`. The only floats that
ever appear are ``math.inf`` and ``-math.inf``, used as the extended values
of distances and of infinite cost regions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

from .errors import InputError

INF = math.inf

Extended = Union[Fraction, float]


def q(value) -> Fraction:
    """Coerce ``value`` to a Fraction. Finite floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"boolean is not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse rational {value!r}") from exc
    raise InputError(f"expected an integer or 'p/q' string, got {value!r}")


def qx(value) -> Extended:
    """Like :func:`q` but also accepts infinities ('inf', '+inf', math.inf)."""
    if isinstance(value, float) and math.isinf(value):
        return value
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    if isinstance(value, str) and value.strip().lower() in ("-inf", "-infinity"):
        return -INF
    return q(value)


def is_inf(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


def fmt(value) -> str | int:
    """Serialize a rational for JSON: integers stay integers, else "p/q"."""
    if is_inf(value):
        return "inf" if value > 0 else "-inf"
    value = q(value)
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


def lcm_of_denominators(values) -> int:
    result = 1
    for v in values:
        result = math.lcm(result, q(v).denominator)
    return result
