"""Scalar lanes.

Everything symbolic runs on exact rationals (fractions.Fraction); everything
spectral runs on complex doubles.  A container is tagged with its lane at
construction time and operations refuse to mix lanes, so a rounding error can
never leak into an identity that is supposed to hold exactly.
"""

from __future__ import annotations

from fractions import Fraction

EXACT = "exact"
COMPLEX = "complex"


class ScalarKindError(TypeError):
    """Raised when a value of the wrong lane enters a tagged container."""


def coerce(kind: str, value):
    if kind == EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        raise ScalarKindError(f"exact lane got {type(value).__name__}: {value!r}")
    if kind == COMPLEX:
        if isinstance(value, complex):
            return value
        if isinstance(value, (int, float, Fraction)):
            return complex(value)
        raise ScalarKindError(f"complex lane got {type(value).__name__}: {value!r}")
    raise ValueError(f"unknown scalar kind {kind!r}")


def is_zero(kind: str, value) -> bool:
    # The complex lane keeps every nonzero double; tolerance decisions belong
    # to the caller, not to the container.
    return value == 0


def check_same_kind(a: str, b: str):
    if a != b:
        raise ScalarKindError(f"cannot mix scalar lanes {a!r} and {b!r}")
