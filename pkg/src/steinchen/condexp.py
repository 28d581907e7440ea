"""Partition-generated sub-σ-algebras and their conditional expectations.

For a partition of a finite space, ``T f`` is the mass-weighted average of
``f`` over each block.  ``T`` is a strictly positive projection with
``Tu = u`` and range equal to the block-constant functions.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    FNotInRangeError,
    InvalidPartitionError,
    NegativeInputError,
    NotAComponentError,
    NotIntegerValuedError,
    SpaceMismatchError,
    TooManyComponentsError,
)
from .lattice import LatticeElement, SampleSpace, as_float, is_component
from .poisson import poisson_pmf

MAX_FAMILY_SIZE = 16


class PartitionSigma:
    """A partition of a sample space into nonempty blocks (of point indices)."""

    __slots__ = ("space", "blocks", "block_of", "block_masses")

    def __init__(self, space: SampleSpace, blocks: Sequence[Sequence[int]]):
        n = len(space)
        owner = [-1] * n
        norm_blocks = []
        for b, block in enumerate(blocks):
            block = tuple(block)
            if not block:
                raise InvalidPartitionError(f"block {b} is empty")
            for i in block:
                if not 0 <= i < n:
                    raise InvalidPartitionError(f"block {b} refers to point index {i} outside the space")
                if owner[i] != -1:
                    raise InvalidPartitionError(
                        f"point {space.labels[i]!r} lies in blocks {owner[i]} and {b}")
                owner[i] = b
            norm_blocks.append(block)
        missing = [space.labels[i] for i in range(n) if owner[i] == -1]
        if missing:
            raise InvalidPartitionError(f"blocks do not cover points {missing!r}")
        self.space = space
        self.blocks = tuple(norm_blocks)
        self.block_of = tuple(owner)
        masses = []
        for b, block in enumerate(self.blocks):
            m = sum((space.masses[i] for i in block), type(space.masses[0])(0))
            if not m > 0:
                raise InvalidPartitionError(f"block {b} has zero mass")
            masses.append(m)
        self.block_masses = tuple(masses)

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartitionSigma):
            return NotImplemented
        return self.space == other.space and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.space, self.blocks))

    def __repr__(self) -> str:
        labs = [[self.space.labels[i] for i in blk] for blk in self.blocks]
        return f"PartitionSigma({labs!r})"

    def block_labels(self, b: int) -> list:
        return [self.space.labels[i] for i in self.blocks[b]]


def make_partition(space: SampleSpace, blocks: Iterable[Iterable]) -> PartitionSigma:
    """Partition from blocks given as lists of point labels."""
    idx_blocks = []
    for blk in blocks:
        try:
            idx_blocks.append([space.index(lab) for lab in blk])
        except KeyError as exc:
            raise InvalidPartitionError(str(exc.args[0])) from None
    return PartitionSigma(space, idx_blocks)


def trivial_partition(space: SampleSpace) -> PartitionSigma:
    return PartitionSigma(space, [range(len(space))])


@dataclass(frozen=True)
class CondExp:
    """The conditional expectation ``T`` onto block-constant functions."""

    sigma: PartitionSigma

    @property
    def space(self) -> SampleSpace:
        return self.sigma.space

    def __call__(self, f: LatticeElement) -> LatticeElement:
        return apply_T(self, f)

    def block_values(self, f: LatticeElement) -> tuple:
        """Value of a block-constant ``f`` on each block."""
        if not in_range(self, f):
            raise FNotInRangeError("element is not constant on the blocks")
        return tuple(f.values[blk[0]] for blk in self.sigma.blocks)

    def from_block_values(self, values: Sequence, backend) -> LatticeElement:
        return LatticeElement(self.space, [values[b] for b in self.sigma.block_of], backend)


def _same_space(T: CondExp, *fs: LatticeElement) -> None:
    for f in fs:
        if f.space != T.space:
            raise SpaceMismatchError("element is not on the conditional expectation's space")


def apply_T(T: CondExp, f: LatticeElement) -> LatticeElement:
    _same_space(T, f)
    conv = f.backend.convert
    masses = [conv(m) for m in T.space.masses]
    zero = conv(0)
    per_block = []
    for blk, bm in zip(T.sigma.blocks, T.sigma.block_masses):
        s = zero
        for i in blk:
            s += f.values[i] * masses[i]
        per_block.append(s / conv(bm))
    return LatticeElement._raw(T.space, (per_block[b] for b in T.sigma.block_of), f.backend)


def in_range(T: CondExp, f: LatticeElement) -> bool:
    """True iff ``f`` is block-constant, i.e. ``f ∈ R(T)``."""
    _same_space(T, f)
    eq = f.backend.eq
    return all(all(eq(f.values[i], f.values[blk[0]]) for i in blk) for blk in T.sigma.blocks)


def check_averaging(T: CondExp, f_in_range: LatticeElement, g: LatticeElement):
    """``‖T(f g) - f T(g)‖∞`` for block-constant ``f``."""
    if not in_range(T, f_in_range):
        raise FNotInRangeError("the averaging property needs f in R(T)")
    return (apply_T(T, f_in_range * g) - f_in_range * apply_T(T, g)).norm_inf()


def check_band_domination(T: CondExp, f: LatticeElement) -> bool:
    """``P_f u <= P_{Tf} u``, i.e. ``supp f ⊆ supp Tf``, for ``f >= 0``."""
    _same_space(T, f)
    if not f.is_nonnegative():
        raise NegativeInputError("band domination is stated for f >= 0")
    return f.support() <= apply_T(T, f).support()


@dataclass(frozen=True)
class IndependenceReport:
    is_independent: bool
    max_residual: object
    witness: Optional[dict] = None
    checked: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        from .scalars import format_scalar
        return {"is_independent": self.is_independent,
                "max_residual": format_scalar(self.max_residual),
                "witness": self.witness}


def _require_components(T: CondExp, qs: Sequence[LatticeElement]) -> None:
    _same_space(T, *qs)
    for k, q in enumerate(qs):
        if not is_component(q):
            raise NotAComponentError(f"element {k} is not {{0,1}}-valued")


def conditionally_independent(T: CondExp, p: LatticeElement, q: LatticeElement) -> IndependenceReport:
    """Test ``T(pq) = Tp · Tq`` for two components."""
    _require_components(T, [p, q])
    res = (apply_T(T, p * q) - apply_T(T, p) * apply_T(T, q)).norm_inf()
    ok = _ok(p.backend, res)
    return IndependenceReport(ok, res, None if ok else {"I": [0], "J": [1]}, 1)


def _block_pattern_laws(T: CondExp, qs: Sequence[LatticeElement]) -> list[dict]:
    """Per block, the conditional law of the bit pattern ``(q_0, ..., q_{n-1})``."""
    conv = qs[0].backend.convert
    laws = []
    bits = [[0 if q.backend.eq(v, 0) else 1 for v in q.values] for q in qs]
    for blk, bm in zip(T.sigma.blocks, T.sigma.block_masses):
        law: dict = defaultdict(lambda: conv(0))
        for i in blk:
            law[tuple(b[i] for b in bits)] += conv(T.space.masses[i])
        laws.append({pat: m / conv(bm) for pat, m in law.items()})
    return laws


def _marginal(law: dict, idx: tuple) -> dict:
    out: dict = {}
    for pat, m in law.items():
        key = tuple(pat[i] for i in idx)
        out[key] = out.get(key, 0) + m
    return out


def _pair_residual(law: dict, I: tuple, J: tuple):
    """Max over atom choices of ``|T(Π_I a Π_J a) - T(Π_I a) T(Π_J a)|`` on one block."""
    mi, mj, mij = _marginal(law, I), _marginal(law, J), _marginal(law, I + J)
    worst, where = 0, None
    for a, pa in mi.items():
        for b, pb in mj.items():
            r = abs(mij.get(a + b, 0) - pa * pb)
            if r > worst:
                worst, where = r, (a, b)
    return worst, where


def _pairs(n: int):
    """Disjoint nonempty ``(I, J)`` with ``min I < min J``, by increasing size."""
    for size in range(2, n + 1):
        for subset in itertools.combinations(range(n), size):
            first, rest = subset[0], subset[1:]
            # first element goes to I; each other element to I or J, J nonempty
            for mask in range(1, 2 ** len(rest)):
                I = (first,) + tuple(x for k, x in enumerate(rest) if not mask >> k & 1)
                J = tuple(x for k, x in enumerate(rest) if mask >> k & 1)
                yield I, J


def family_conditionally_independent(T: CondExp, qs: Sequence[LatticeElement]) -> IndependenceReport:
    """Atom factorisation over every pair of disjoint index sets.

    For each block and each disjoint ``(I, J)`` the conditional joint law of
    ``(q_I, q_J)`` must be the product of the two marginal laws; atom
    combinations where both marginals vanish are trivially balanced.
    """
    qs = list(qs)
    if len(qs) > MAX_FAMILY_SIZE:
        raise TooManyComponentsError(f"{len(qs)} components; the exhaustive test is capped at {MAX_FAMILY_SIZE}")
    if len(qs) < 2:
        if qs:
            _require_components(T, qs)
        return IndependenceReport(True, 0, None, 0)
    _require_components(T, qs)
    backend = qs[0].backend
    laws = _block_pattern_laws(T, qs)
    n = len(qs)

    if backend.exact:
        # mutual independence per block is equivalent to every pair factorising
        full = tuple(range(n))
        singles = [[_marginal(law, (k,)) for k in full] for law in laws]
        if all(_product_law_matches(law, marg) for law, marg in zip(laws, singles)):
            return IndependenceReport(True, 0, None, 0)

    worst, witness, checked = 0, None, 0
    for I, J in _pairs(n):
        checked += 1
        for b, law in enumerate(laws):
            r, where = _pair_residual(law, I, J)
            worst = max(worst, r)
            if witness is None and not _ok(backend, r):
                witness = {"I": list(I), "J": list(J), "block": b,
                           "atoms_I": list(where[0]), "atoms_J": list(where[1])}
    return IndependenceReport(_ok(backend, worst), worst, witness, checked)


def _ok(backend, r) -> bool:
    return r == 0 if backend.exact else r <= backend.eps_cmp


def _product_law_matches(law: dict, marginals: list) -> bool:
    n = len(marginals)
    for pat in itertools.product((0, 1), repeat=n):
        prod = 1
        for k, bit in enumerate(pat):
            prod *= marginals[k].get((bit,), 0)
            if prod == 0:
                break
        if law.get(pat, 0) != prod:
            return False
    return True


def decompose_levels(f: LatticeElement) -> list[LatticeElement]:
    """Level indicators ``r_0, ..., r_κ`` of an integer-valued ``f >= 0``."""
    ints = []
    for v in f.values:
        k = round(v)
        if k < 0 or not f.backend.eq(v, k):
            raise NotIntegerValuedError(f"value {v!r} is not a non-negative integer")
        ints.append(int(k))
    kappa = max(ints)
    return [LatticeElement(f.space, [1 if k == j else 0 for k in ints], f.backend)
            for j in range(kappa + 1)]


def is_conditionally_poisson(T: CondExp, f: LatticeElement) -> float:
    """Largest ``‖T r_j - Po(j; Tf)‖∞`` over the levels of ``f``.

    ``T r_j`` is cross-checked against ``T(u - P_{|f - j u|} u)`` level by level.
    """
    from .lattice import support_component
    _same_space(T, f)
    levels = decompose_levels(f)
    Tf = apply_T(T, f)
    u = f.space.unit(f.backend)
    worst = 0.0
    for j, r in enumerate(levels):
        Tr = apply_T(T, r)
        alt = apply_T(T, u - support_component(abs(f - u * j)))
        if not Tr.isclose(alt):
            raise AssertionError(f"level {j}: T r_j disagrees with T(I - P_|f-ju|)u")
        dev = (as_float(Tr) - poisson_pmf(j, Tf)).norm_inf()
        worst = max(worst, float(dev))
    return worst
