"""Exact rational numbers for capacities, rates and latencies."""
from fractions import Fraction
from typing import Annotated, Any, Union

from pydantic import PlainSerializer, PlainValidator

Number = Union[int, Fraction]


def parse_rational(value: Any) -> Fraction:
    """Parse a JSON number or a decimal / ``p/q`` string into an exact Fraction.

    Floats are converted through their shortest repr so that ``0.2`` becomes
    exactly 1/5.
    """
    if isinstance(value, bool):
        raise ValueError("boolean is not a number")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational number: {value!r}") from e
    raise ValueError(f"not a rational number: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render a rational as an exact decimal when possible, else as ``p/q``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    denominator = value.denominator
    twos = fives = 0
    while denominator % 2 == 0:
        denominator //= 2
        twos += 1
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    if denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def simplify(value: Fraction) -> Number:
    """Integral fractions become ints; int arithmetic is much faster."""
    return value.numerator if value.denominator == 1 else value


Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
]
