"""Helpers for exact rationals given as text (CLI flags, JSON files)."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

RationalLike = Union[int, str, Fraction]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``"3/4"``, ``"-2"`` or ``"0.25"`` into an exact Fraction.

    Floats are refused: every quantity in this package stays exact.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"inexact rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    text = str(value).strip()
    if not text:
        raise ValueError("empty rational")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid rational: {value!r}") from exc


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def rational_sqrt(value: Fraction) -> Union[Fraction, None]:
    """Exact square root of a non-negative rational square, else None."""
    value = Fraction(value)
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        return None
    return Fraction(rn, rd)


__all__ = ["parse_rational", "format_rational", "rational_sqrt", "RationalLike"]
