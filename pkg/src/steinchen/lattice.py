"""Real functions on a finite probability space as a Riesz space / f-algebra.

A :class:`SampleSpace` is a finite list of labelled points with strictly
positive masses.  A :class:`LatticeElement` is a function on those points.
Order, lattice operations and the f-algebra product are all pointwise, the
constant one function ``u`` is both the weak order unit and the algebraic
unit, and band projections are multiplications by support indicators.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

from .errors import (
    BackendMismatchError,
    DuplicateLabelError,
    EmptySpaceError,
    MassExceedsOneError,
    NegativeParameterError,
    NonpositiveMassError,
    SpaceMismatchError,
    TranscendentalOnRationalBackendError,
)
from .scalars import FLOAT, RATIONAL, Backend, Scalar, format_scalar


class SampleSpace:
    """Finite point set with strictly positive masses summing to at most one."""

    __slots__ = ("labels", "masses", "subnormalized", "_index", "_hash")

    def __init__(self, labels: tuple, masses: tuple, subnormalized: bool):
        self.labels = labels
        self.masses = masses
        self.subnormalized = subnormalized
        self._index = {lab: i for i, lab in enumerate(labels)}
        self._hash = hash((labels, masses))

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, SampleSpace):
            return NotImplemented
        return self.labels == other.labels and self.masses == other.masses

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        pts = ", ".join(f"{lab!r}: {format_scalar(m)}" for lab, m in zip(self.labels, self.masses))
        return f"SampleSpace({{{pts}}})"

    @property
    def total_mass(self) -> Scalar:
        return sum(self.masses, type(self.masses[0])(0))

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"label {label!r} is not a point of this space") from None

    def element(self, values: Iterable, backend: Backend = RATIONAL) -> "LatticeElement":
        return LatticeElement(self, values, backend)

    def constant(self, c, backend: Backend = RATIONAL) -> "LatticeElement":
        return LatticeElement(self, [c] * len(self), backend)

    def unit(self, backend: Backend = RATIONAL) -> "LatticeElement":
        return self.constant(1, backend)

    def zero(self, backend: Backend = RATIONAL) -> "LatticeElement":
        return self.constant(0, backend)

    def indicator(self, labels: Iterable, backend: Backend = RATIONAL) -> "LatticeElement":
        """Characteristic function of a set of point labels."""
        idx = {self.index(lab) for lab in labels}
        return LatticeElement(self, [1 if i in idx else 0 for i in range(len(self))], backend)

    def function(self, fn: Callable, backend: Backend = RATIONAL) -> "LatticeElement":
        """Element ``ω -> fn(label(ω))``."""
        return LatticeElement(self, [fn(lab) for lab in self.labels], backend)


def make_space(labels: Sequence, masses: Sequence, backend: Backend = RATIONAL) -> SampleSpace:
    labels = tuple(labels)
    if not labels:
        raise EmptySpaceError("a sample space needs at least one point")
    if len(set(labels)) != len(labels):
        seen = set()
        dup = next(lab for lab in labels if lab in seen or seen.add(lab))
        raise DuplicateLabelError(f"duplicate label {dup!r}")
    if len(masses) != len(labels):
        raise ValueError(f"{len(masses)} masses given for {len(labels)} labels")
    conv = tuple(backend.convert(m) for m in masses)
    for lab, m in zip(labels, conv):
        if not m > 0:
            raise NonpositiveMassError(f"point {lab!r} has mass {format_scalar(m)}; masses must be > 0")
    total = sum(conv, type(conv[0])(0))
    if backend.exact:
        if total > 1:
            raise MassExceedsOneError(f"total mass {format_scalar(total)} exceeds 1")
        sub = total < 1
    else:
        if total > 1 + backend.eps_cmp:
            raise MassExceedsOneError(f"total mass {total!r} exceeds 1")
        sub = total < 1 - backend.eps_cmp
    return SampleSpace(labels, conv, sub)


class LatticeElement:
    """A real function on a :class:`SampleSpace`; immutable."""

    __slots__ = ("space", "values", "backend")

    def __init__(self, space: SampleSpace, values: Iterable, backend: Backend = RATIONAL):
        vals = tuple(backend.convert(v) for v in values)
        if len(vals) != len(space):
            raise ValueError(f"{len(vals)} values for a space of {len(space)} points")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "backend", backend)

    @classmethod
    def _raw(cls, space, values, backend) -> "LatticeElement":
        obj = object.__new__(cls)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "values", tuple(values))
        object.__setattr__(obj, "backend", backend)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("LatticeElement is immutable")

    # -- plumbing -----------------------------------------------------------

    def _check(self, other: "LatticeElement") -> None:
        if not isinstance(other, LatticeElement):
            raise TypeError(f"expected a LatticeElement, got {type(other).__name__}")
        if self.space != other.space:
            raise SpaceMismatchError("elements live on different sample spaces")
        if self.backend != other.backend:
            raise BackendMismatchError(
                f"cannot combine {self.backend.name} and {other.backend.name} elements; "
                "convert explicitly with to_float()/to_rational()")

    def _zip(self, other, op) -> "LatticeElement":
        self._check(other)
        return LatticeElement._raw(self.space, map(op, self.values, other.values), self.backend)

    def map(self, fn: Callable, backend: Backend | None = None) -> "LatticeElement":
        """Pointwise ``fn``; results are coerced into ``backend`` (default: own)."""
        b = backend or self.backend
        return LatticeElement(self.space, (fn(v) for v in self.values), b)

    def to_float(self, backend: Backend = FLOAT) -> "LatticeElement":
        return LatticeElement(self.space, self.values, backend)

    def to_rational(self) -> "LatticeElement":
        return LatticeElement(self.space, self.values, RATIONAL)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i) -> Scalar:
        return self.values[i]

    def at(self, label) -> Scalar:
        return self.values[self.space.index(label)]

    def __repr__(self) -> str:
        return f"LatticeElement({', '.join(format_scalar(v) for v in self.values)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeElement):
            return NotImplemented
        return self.space == other.space and self.values == other.values

    __hash__ = None

    def isclose(self, other: "LatticeElement", tol: float | None = None) -> bool:
        """Equality up to ``tol`` (default: the backend's comparison tolerance)."""
        self._check(other)
        eps = self.backend.eps_cmp if tol is None else tol
        return all(abs(a - b) <= eps for a, b in zip(self.values, other.values))

    # -- vector space and f-algebra ----------------------------------------

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return LatticeElement._raw(self.space, (-v for v in self.values), self.backend)

    def __mul__(self, other):
        if isinstance(other, LatticeElement):
            return self._zip(other, lambda a, b: a * b)
        c = self.backend.convert(other)
        return LatticeElement._raw(self.space, (c * v for v in self.values), self.backend)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, LatticeElement):
            raise TypeError("use partial_inverse() for division by an element")
        c = self.backend.convert(other)
        return LatticeElement._raw(self.space, (v / c for v in self.values), self.backend)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are defined")
        # H^0 := u, including at zeros of H
        return LatticeElement._raw(self.space, (v**k if k else self.backend.convert(1)
                                                for v in self.values), self.backend)

    def __abs__(self):
        return LatticeElement._raw(self.space, (abs(v) for v in self.values), self.backend)

    def sup(self, other):
        return self._zip(other, max)

    def inf(self, other):
        return self._zip(other, min)

    def __or__(self, other):
        return self.sup(other)

    def __and__(self, other):
        return self.inf(other)

    def leq(self, other) -> bool:
        """Pointwise order (up to ``eps_cmp`` on floats)."""
        self._check(other)
        le = self.backend.le
        return all(le(a, b) for a, b in zip(self.values, other.values))

    def __le__(self, other):
        return self.leq(other)

    def __ge__(self, other):
        return other.leq(self)

    def is_nonnegative(self) -> bool:
        z = self.backend.convert(0)
        return all(self.backend.le(z, v) for v in self.values)

    def norm_inf(self) -> Scalar:
        return max(abs(v) for v in self.values)

    def support(self) -> frozenset:
        """Indices where the element is nonzero in the band sense."""
        bz = self.backend.band_zero
        return frozenset(i for i, v in enumerate(self.values) if not bz(v))


# module-level spellings of the lattice operations

def add(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f + g


def subtract(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f - g


def scale(c, f: LatticeElement) -> LatticeElement:
    return f * c


def multiply(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f * g


def sup(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f.sup(g)


def inf(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f.inf(g)


def lattice_abs(f: LatticeElement) -> LatticeElement:
    return abs(f)


def leq(f: LatticeElement, g: LatticeElement) -> bool:
    return f.leq(g)


def sup_all(elements: Sequence[LatticeElement]) -> LatticeElement:
    """Pointwise supremum of a nonempty finite family."""
    it = iter(elements)
    acc = next(it)
    for e in it:
        acc = acc.sup(e)
    return acc


def band_projection(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    """``P_f g``: keep ``g`` on the support of ``f`` and zero it elsewhere."""
    f._check(g)
    bz = f.backend.band_zero
    zero = g.backend.convert(0)
    return LatticeElement._raw(g.space, (zero if bz(a) else b for a, b in zip(f.values, g.values)),
                               g.backend)


def support_component(f: LatticeElement) -> LatticeElement:
    """``u_f = P_f u``."""
    return band_projection(f, f.space.unit(f.backend))


def partial_inverse(g: LatticeElement) -> LatticeElement:
    """Canonical partial inverse: reciprocal on the support, zero off it."""
    bz = g.backend.band_zero
    one, zero = g.backend.convert(1), g.backend.convert(0)
    return LatticeElement._raw(g.space, (zero if bz(v) else one / v for v in g.values), g.backend)


def exp_neg(H: LatticeElement) -> LatticeElement:
    """Pointwise ``e^{-H}`` for ``H >= 0``; float backend only."""
    if H.backend.exact:
        raise TranscendentalOnRationalBackendError(
            "e^{-H} is not rational; call exp_neg(H.to_float())")
    if any(v < 0 for v in H.values):
        raise NegativeParameterError("exp_neg requires H >= 0")
    return LatticeElement._raw(H.space, (math.exp(-v) for v in H.values), H.backend)


def is_component(f: LatticeElement) -> bool:
    """True iff every value is 0 or 1, i.e. ``f`` is a component of ``u``."""
    eq = f.backend.eq
    return all(eq(v, 0) or eq(v, 1) for v in f.values)


def indicator_of(values: Iterable[bool], space: SampleSpace, backend: Backend = RATIONAL) -> LatticeElement:
    return LatticeElement(space, (1 if b else 0 for b in values), backend)


def as_float(f: LatticeElement) -> LatticeElement:
    """``f`` itself on a float backend, else its explicit float conversion."""
    return f.to_float() if f.backend.exact else f
