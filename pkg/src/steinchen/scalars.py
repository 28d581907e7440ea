"""Scalar backends.

Values live either in :class:`fractions.Fraction` (exact, closed under the
field operations) or in binary64 floats.  A backend object knows how to
coerce inputs and how to compare; lattice elements carry the backend they
were built with and refuse to mix with another one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

Scalar = Union[Fraction, float]

DEFAULT_EPS_CMP = 1e-9


def to_fraction(x) -> Fraction:
    """Coerce ints, ``"p/q"`` strings, Fractions and floats (exactly) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite scalar {x!r}")
        return Fraction(x)
    if isinstance(x, Real):
        return Fraction(float(x))
    raise TypeError(f"cannot interpret {x!r} as a scalar")


@dataclass(frozen=True)
class RationalBackend:
    name: str = "rational"
    exact: bool = True

    def convert(self, x) -> Fraction:
        return to_fraction(x)

    def eq(self, a, b) -> bool:
        return a == b

    def le(self, a, b) -> bool:
        return a <= b

    def is_zero(self, a) -> bool:
        return a == 0

    def band_zero(self, a) -> bool:
        return a == 0

    @property
    def eps_cmp(self) -> float:
        return 0.0


@dataclass(frozen=True)
class FloatBackend:
    """Binary64 backend.

    ``eps_cmp`` governs equality and order tests; ``eps_band`` decides when a
    value counts as zero for band projections (default: exact zero only).
    """

    eps_cmp: float = DEFAULT_EPS_CMP
    eps_band: float = 0.0
    name: str = "float"
    exact: bool = False

    def convert(self, x) -> float:
        if isinstance(x, str):
            x = Fraction(x.strip())
        v = float(x)
        if not math.isfinite(v):
            raise ValueError(f"non-finite scalar {x!r}")
        return v

    def eq(self, a, b) -> bool:
        return abs(a - b) <= self.eps_cmp

    def le(self, a, b) -> bool:
        return a <= b + self.eps_cmp

    def is_zero(self, a) -> bool:
        return abs(a) <= self.eps_cmp

    def band_zero(self, a) -> bool:
        return abs(a) <= self.eps_band


Backend = Union[RationalBackend, FloatBackend]

RATIONAL = RationalBackend()
FLOAT = FloatBackend()


def get_backend(name: str, tolerance: float | None = None) -> Backend:
    if name == "rational":
        return RATIONAL
    if name == "float":
        return FLOAT if tolerance is None else FloatBackend(eps_cmp=tolerance)
    raise ValueError(f"unknown backend {name!r}; expected 'rational' or 'float'")


def format_scalar(x) -> str:
    """``"p/q"`` for Fractions (``"p"`` when integral), ``repr`` for floats."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))
