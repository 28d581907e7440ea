"""Function-valued Poisson law ``Po(·;H)`` and subsets of the naturals.

``Po(k;H) = H^k e^{-H} / k!`` is evaluated pointwise.  Subsets of
``N0 = {0, 1, 2, ...}`` are represented by :class:`NatSet` as either a finite
set or the complement of one, which keeps ``Po(A;H)`` exact in the sense of
requiring no truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import NegativeIndexError, NegativeKError, NegativeParameterError
from .lattice import LatticeElement, SampleSpace
from .scalars import FLOAT, Backend

_LOG_SPACE_K = 20
_LOG_SPACE_H = 50.0


@dataclass(frozen=True)
class NatSet:
    """``A ⊆ N0``: ``base`` if not ``complemented``, else ``N0 \\ base``."""

    base: frozenset = frozenset()
    complemented: bool = False

    def __post_init__(self):
        base = frozenset(self.base)
        for k in base:
            if not isinstance(k, int) or isinstance(k, bool) or k < 0:
                raise ValueError(f"NatSet elements must be non-negative integers, got {k!r}")
        object.__setattr__(self, "base", base)

    @classmethod
    def of(cls, *elements: int) -> "NatSet":
        return cls(frozenset(elements))

    @classmethod
    def finite(cls, elements: Iterable[int]) -> "NatSet":
        return cls(frozenset(elements))

    @classmethod
    def cofinite(cls, excluded: Iterable[int]) -> "NatSet":
        return cls(frozenset(excluded), True)

    @classmethod
    def empty(cls) -> "NatSet":
        return cls()

    @classmethod
    def naturals(cls) -> "NatSet":
        return cls(frozenset(), True)

    @classmethod
    def upto(cls, n: int) -> "NatSet":
        """``N(n) = {0, ..., n}``."""
        return cls(frozenset(range(n + 1)))

    def __contains__(self, k: int) -> bool:
        if k < 0:
            return False
        return (k in self.base) != self.complemented

    def complement(self) -> "NatSet":
        return NatSet(self.base, not self.complemented)

    def __invert__(self) -> "NatSet":
        return self.complement()

    @property
    def is_empty(self) -> bool:
        return not self.complemented and not self.base

    @property
    def is_naturals(self) -> bool:
        return self.complemented and not self.base

    def __and__(self, other: "NatSet") -> "NatSet":
        a, b = self, other
        if not a.complemented and not b.complemented:
            return NatSet(a.base & b.base)
        if a.complemented and b.complemented:
            return NatSet(a.base | b.base, True)
        fin, cof = (a, b) if not a.complemented else (b, a)
        return NatSet(fin.base - cof.base)

    def __or__(self, other: "NatSet") -> "NatSet":
        return ~((~self) & (~other))

    def isdisjoint(self, other: "NatSet") -> bool:
        return (self & other).is_empty

    def bounded_members(self, upper: int) -> list[int]:
        """Members ``k <= upper`` in increasing order."""
        if self.complemented:
            return [k for k in range(upper + 1) if k not in self.base]
        return sorted(k for k in self.base if k <= upper)

    def describe(self) -> str:
        if self.is_empty:
            return "{}"
        if self.is_naturals:
            return "N0"
        body = "{" + ",".join(str(k) for k in sorted(self.base)) + "}"
        return f"N0\\{body}" if self.complemented else body

    def to_dict(self) -> dict:
        return {"base": sorted(self.base), "complemented": self.complemented}

    @classmethod
    def from_dict(cls, d: dict) -> "NatSet":
        return cls(frozenset(d.get("base", ())), bool(d.get("complemented", False)))

    def __repr__(self) -> str:
        return f"NatSet({self.describe()})"


def nu(A: NatSet, j: int, space: SampleSpace, backend: Backend = FLOAT) -> LatticeElement:
    """``u`` if ``j ∈ A`` else ``0``."""
    if j < 0:
        raise NegativeIndexError(f"nu is defined for j >= 0, got {j}")
    return space.constant(1 if j in A else 0, backend)


# -- scalar kernels --------------------------------------------------------

def pmf_scalar(k: int, h: float) -> float:
    if h == 0.0:
        return 1.0 if k == 0 else 0.0
    if k > _LOG_SPACE_K or h > _LOG_SPACE_H:
        return math.exp(k * math.log(h) - h - math.lgamma(k + 1))
    return h**k * math.exp(-h) / math.factorial(k)


def measure_scalar(A: NatSet, h: float) -> float:
    s = math.fsum(pmf_scalar(k, h) for k in A.base)
    return 1.0 - s if A.complemented else s


def tail_scalar(n: int, h: float) -> float:
    """``Po({n+1, n+2, ...}; h)`` without subtracting from one when it is small."""
    if h == 0.0:
        return 0.0
    if h >= n + 1:
        return max(0.0, 1.0 - math.fsum(pmf_scalar(k, h) for k in range(n + 1)))
    total, k = 0.0, n + 1
    term = pmf_scalar(k, h)
    while term > 0.0 and term > 1e-17 * total:
        total += term
        k += 1
        term *= h / k
    return total


def mp_pmf(ctx, k: int, h):
    return h**k * ctx.exp(-h) / ctx.factorial(k)


def mp_measure(ctx, A: NatSet, h):
    """``Po(A;h)`` in the mpmath context ``ctx``."""
    s = ctx.fsum(mp_pmf(ctx, k, h) for k in A.base) if A.base else ctx.mpf(0)
    return 1 - s if A.complemented else s


# -- lattice-valued --------------------------------------------------------

def band_values(H: LatticeElement) -> list[float]:
    """Float values of ``H`` with the band-zero points set to exactly 0.0."""
    if any(v < 0 for v in H.values):
        raise NegativeParameterError("the Poisson parameter must be >= 0")
    bz = H.backend.band_zero
    return [0.0 if bz(v) else float(v) for v in H.values]


def _float_backend(H: LatticeElement) -> Backend:
    return FLOAT if H.backend.exact else H.backend


def _lift(H: LatticeElement, fn) -> LatticeElement:
    memo: dict[float, float] = {}
    out = []
    for h in band_values(H):
        if h not in memo:
            memo[h] = fn(h)
        out.append(memo[h])
    return LatticeElement(H.space, out, _float_backend(H))


def poisson_pmf(k: int, H: LatticeElement) -> LatticeElement:
    """``Po(k;H)``, with ``H^0 := u`` so ``Po(0;0) = 1``.

    Rational ``H`` is converted to floats explicitly here.
    """
    if k < 0:
        raise NegativeKError(f"k must be >= 0, got {k}")
    return _lift(H, lambda h: pmf_scalar(k, h))


def poisson_measure(A: NatSet, H: LatticeElement) -> LatticeElement:
    """``Po(A;H) = Σ_{k∈A} Po(k;H)``; cofinite sets via ``u - Σ_{k∉A}``."""
    return _lift(H, lambda h: measure_scalar(A, h))


def poisson_tail(n: int, H: LatticeElement) -> LatticeElement:
    """``Po({n+1, n+2, ...}; H)``."""
    if n < 0:
        raise NegativeKError(f"n must be >= 0, got {n}")
    return _lift(H, lambda h: tail_scalar(n, h))
