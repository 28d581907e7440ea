"""Sums of indicator components and their conditional Poisson approximation.

A :class:`BernoulliFamily` bundles a conditional expectation ``T`` with
components ``q_i``; it caches ``h_i = T q_i``, ``w = Σ q_i`` and
``H = T w``.  The conditional law of ``w`` is read off from its level sets,
``P_T[w ∈ A] = Σ_{j∈A} T r_j``, and compared with ``Po(A;H)`` block by
block.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .condexp import (
    CondExp,
    IndependenceReport,
    PartitionSigma,
    apply_T,
    decompose_levels,
    family_conditionally_independent,
)
from .errors import (
    BadIndexError,
    BadProbabilityError,
    BackendMismatchError,
    EmptyFamilyError,
    NonpositiveMassError,
    NotAComponentError,
    NotConvergedError,
    NotIndependentError,
    SpaceMismatchError,
    TooLargeError,
)
from .lattice import LatticeElement, SampleSpace, as_float, exp_neg, is_component, make_space, sup_all
from .poisson import NatSet, band_values, pmf_scalar, poisson_measure
from .scalars import RATIONAL, Backend, Scalar
from .stein import DEFAULT_CONFIG, SteinConfig, stein_g_table

DEFAULT_TOL = 1e-9
PRODUCT_MODEL_CAP = 2**20


@dataclass(frozen=True, eq=False)
class BernoulliFamily:
    T: CondExp
    qs: tuple
    hs: tuple
    w: LatticeElement
    H: LatticeElement

    @property
    def n(self) -> int:
        return len(self.qs)

    @property
    def space(self) -> SampleSpace:
        return self.T.space

    @property
    def backend(self) -> Backend:
        return self.w.backend

    def w_minus(self, i: int) -> LatticeElement:
        """``w_i = w - q_i``."""
        if not 0 <= i < self.n:
            raise BadIndexError(f"component index {i} out of range 0..{self.n - 1}")
        return self.w - self.qs[i]

    def unit(self) -> LatticeElement:
        return self.space.unit(self.backend)

    def with_backend(self, backend: Backend) -> "BernoulliFamily":
        return make_family(self.T, [LatticeElement(self.space, q.values, backend) for q in self.qs],
                           backend)


def make_family(T: CondExp, qs: Sequence[LatticeElement], backend: Backend | None = None) -> BernoulliFamily:
    """Cache ``h_i``, ``w`` and ``H``; independence is checked separately."""
    qs = tuple(qs)
    if backend is None:
        backend = qs[0].backend if qs else RATIONAL
    for k, q in enumerate(qs):
        if q.space != T.space:
            raise SpaceMismatchError(f"component {k} is not on the partition's space")
        if q.backend != backend:
            raise BackendMismatchError(f"component {k} uses the {q.backend.name} backend")
        if not is_component(q):
            raise NotAComponentError(f"element {k} is not {{0,1}}-valued")
    w = T.space.zero(backend)
    for q in qs:
        w = w + q
    hs = tuple(apply_T(T, q) for q in qs)
    return BernoulliFamily(T, qs, hs, w, apply_T(T, w))


# -- conditional law of w ----------------------------------------------------

@dataclass(frozen=True)
class ConditionalPMF:
    """``T r_j`` for ``j = 0..κ``; zero beyond ``κ``."""

    levels: tuple

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    def __getitem__(self, j: int) -> LatticeElement:
        if 0 <= j < len(self.levels):
            return self.levels[j][1]
        return self.levels[0][1].space.zero(self.levels[0][1].backend)

    def prob(self, A: NatSet) -> LatticeElement:
        """``P_T[w ∈ A]``."""
        first = self.levels[0][1]
        total = first.space.zero(first.backend)
        for j in A.base if A.complemented else A.bounded_members(self.max_level):
            if j <= self.max_level:
                total = total + self.levels[j][1]
        return first.space.unit(first.backend) - total if A.complemented else total


def level_pmf(T: CondExp, f: LatticeElement) -> ConditionalPMF:
    """Conditional law of an integer-valued ``f >= 0``."""
    return ConditionalPMF(tuple((j, apply_T(T, r)) for j, r in enumerate(decompose_levels(f))))


def conditional_pmf(fam: BernoulliFamily) -> ConditionalPMF:
    return level_pmf(fam.T, fam.w)


def conditional_prob(fam: BernoulliFamily, A: NatSet) -> LatticeElement:
    return conditional_pmf(fam).prob(A)


# -- functional calculus for g(w, H, A) ---------------------------------------

class _GCache:
    """``g(j,H,A)`` for ``j = 0..n``, grown on demand; lives for one call."""

    def __init__(self, H: LatticeElement, A: NatSet, cfg: SteinConfig):
        self.H, self.A, self.cfg = H, A, cfg
        self.table: dict[int, LatticeElement] = {}

    def upto(self, n: int) -> dict[int, LatticeElement]:
        if n not in self.table:
            self.table = stein_g_table(range(n + 1), self.H, self.A, self.cfg)
        return self.table


def g_of(f: LatticeElement, H: LatticeElement, A: NatSet, cfg: SteinConfig = DEFAULT_CONFIG,
         cache: _GCache | None = None) -> LatticeElement:
    """``g(f,H,A) = Σ_j r_j g(j,H,A)`` over the level sets ``r_j`` of ``f``."""
    cache = cache or _GCache(H, A, cfg)
    levels = decompose_levels(f)
    table = cache.upto(len(levels) - 1)
    out = None
    for j, r in enumerate(levels):
        term = as_float(r) * table[j]
        out = term if out is None else out + term
    return out


def g_shifted(levels: Sequence[LatticeElement], k: int, H: LatticeElement, A: NatSet,
              cfg: SteinConfig = DEFAULT_CONFIG, cache: _GCache | None = None) -> LatticeElement:
    """``Σ_j r_j g(j+k,H,A)`` for a given level decomposition."""
    cache = cache or _GCache(H, A, cfg)
    table = cache.upto(len(levels) - 1 + k)
    out = None
    for j, r in enumerate(levels):
        term = as_float(r) * table[j + k]
        out = term if out is None else out + term
    return out


def stein_identity_residual(fam: BernoulliFamily, A: NatSet, cfg: SteinConfig = DEFAULT_CONFIG) -> float:
    """``‖T(H g(w+u) - w g(w)) + Po(A;H) - P_T[w∈A]‖∞``."""
    T, H = fam.T, fam.H
    cache = _GCache(H, A, cfg)
    u = fam.unit()
    Hf, wf = as_float(H), as_float(fam.w)
    lhs = apply_T(T, Hf * g_of(fam.w + u, H, A, cfg, cache) - wf * g_of(fam.w, H, A, cfg, cache))
    rhs = as_float(conditional_prob(fam, A)) - poisson_measure(A, H)
    return float((lhs - rhs).norm_inf())


def check_independence_shift(fam: BernoulliFamily, i: int, k: int, A: NatSet,
                             cfg: SteinConfig = DEFAULT_CONFIG) -> float:
    """Residuals of ``T(q_i g(w+ku)) = h_i T g(w_i+(k+1)u)`` and
    ``T(q_i g(w_i+ku)) = h_i T g(w_i+ku)``; returns the larger."""
    if not 0 <= i < fam.n:
        raise BadIndexError(f"component index {i} out of range 0..{fam.n - 1}")
    if k < 0:
        raise BadIndexError(f"shift k must be >= 0, got {k}")
    T, H = fam.T, fam.H
    cache = _GCache(H, A, cfg)
    u = fam.unit()
    qi, hi = as_float(fam.qs[i]), as_float(fam.hs[i])
    wi = fam.w_minus(i)
    g_wk = g_of(fam.w + u * k, H, A, cfg, cache)
    g_wi_k = g_of(wi + u * k, H, A, cfg, cache)
    g_wi_k1 = g_of(wi + u * (k + 1), H, A, cfg, cache)
    r1 = (apply_T(T, qi * g_wk) - hi * apply_T(T, g_wi_k1)).norm_inf()
    r2 = (apply_T(T, qi * g_wi_k) - hi * apply_T(T, g_wi_k)).norm_inf()
    return float(max(r1, r2))


def check_functional_calculus(fam: BernoulliFamily, q: LatticeElement, k: int, A: NatSet,
                              cfg: SteinConfig = DEFAULT_CONFIG) -> float:
    """Residuals of ``q g(w) = g(qw)`` and ``g(w+ku) = Σ_j r_j g(j+k)``."""
    if not is_component(q):
        raise NotAComponentError("q must be a component of u")
    H = fam.H
    cache = _GCache(H, A, cfg)
    r1 = (as_float(q) * g_of(fam.w, H, A, cfg, cache) - g_of(q * fam.w, H, A, cfg, cache)).norm_inf()
    shifted = g_of(fam.w + fam.unit() * k, H, A, cfg, cache)
    r2 = (shifted - g_shifted(decompose_levels(fam.w), k, H, A, cfg, cache)).norm_inf()
    return float(max(r1, r2))


# -- bounds and discrepancies ----------------------------------------------

def lsn_bounds(fam: BernoulliFamily) -> tuple[LatticeElement, LatticeElement]:
    """``(sup_i h_i, sup_i h_i · (u - e^{-H}))``; the first keeps the family's backend."""
    if fam.n == 0:
        raise EmptyFamilyError("the bound needs at least one component")
    sup_h = sup_all(fam.hs)
    Hf = as_float(fam.H)
    refined = as_float(sup_h) * (Hf.space.unit(Hf.backend) - exp_neg(Hf))
    return sup_h, refined


def _tv_block(pmf_values: Sequence[float], h: float) -> float:
    # above κ only the Poisson law has mass, so the positive part lives on 0..κ
    return math.fsum(max(p - pmf_scalar(j, h), 0.0) for j, p in enumerate(pmf_values))


def tv_distance(fam: BernoulliFamily) -> LatticeElement:
    """Blockwise ``sup_A |P_T[w∈A] - Po(A;H)|``."""
    pmf = conditional_pmf(fam)
    sigma = fam.T.sigma
    hv = band_values(fam.H)
    per_block = []
    for blk in sigma.blocks:
        i = blk[0]
        vals = [float(pmf[j].values[i]) for j in range(pmf.max_level + 1)]
        per_block.append(_tv_block(vals, hv[i]))
    return fam.T.from_block_values(per_block, as_float(fam.H).backend)


@dataclass(frozen=True)
class BlockDiscrepancy:
    block: int
    H: Scalar
    p_T: Optional[Scalar]
    po_A: Optional[float]
    difference: float
    tv: float
    sup_h: Scalar
    refined: float
    bound_satisfied: bool
    refined_satisfied: bool


@dataclass(frozen=True)
class DiscrepancyReport:
    """Per-block comparison of ``P_T[w∈A]`` with ``Po(A;H)``.

    With ``A`` omitted the difference is the blockwise total variation distance.
    """

    A: Optional[NatSet]
    blocks: tuple
    independence: IndependenceReport
    tolerance: float

    @property
    def bound_satisfied(self) -> bool:
        return all(b.bound_satisfied for b in self.blocks)

    @property
    def refined_satisfied(self) -> bool:
        return all(b.refined_satisfied for b in self.blocks)


def verify_lsn(fam: BernoulliFamily, A: NatSet | None = None, tol: float = DEFAULT_TOL,
               strict: bool = False, independence: IndependenceReport | None = None) -> DiscrepancyReport:
    """Check ``|P_T[w∈A] - Po(A;H)| <= sup h_i`` and the refined bound on every block.

    The independence report is attached; with ``strict=True`` a dependent
    family raises :class:`NotIndependentError` carrying the report.
    """
    if independence is None:
        independence = family_conditionally_independent(fam.T, fam.qs)
    sup_h, refined = lsn_bounds(fam)
    tv = tv_distance(fam)
    sigma = fam.T.sigma
    if A is not None:
        p = conditional_prob(fam, A)
        po = poisson_measure(A, fam.H)
    rows = []
    for b, blk in enumerate(sigma.blocks):
        i = blk[0]
        tv_b = float(tv.values[i])
        if A is not None:
            diff = abs(float(p.values[i]) - po.values[i])
            p_b, po_b = p.values[i], po.values[i]
        else:
            diff, p_b, po_b = tv_b, None, None
        s_b, r_b = sup_h.values[i], float(refined.values[i])
        rows.append(BlockDiscrepancy(b, fam.H.values[i], p_b, po_b, diff, tv_b, s_b, r_b,
                                     diff <= float(s_b) + tol, diff <= r_b + tol))
    report = DiscrepancyReport(A, tuple(rows), independence, tol)
    if strict and not independence.is_independent:
        raise NotIndependentError("family is not conditionally independent", report)
    return report


# -- product models ----------------------------------------------------------

def build_product_model(block_masses: Sequence, probs: Sequence[Sequence], backend: Backend = RATIONAL,
                        cap: int = PRODUCT_MODEL_CAP) -> tuple[SampleSpace, PartitionSigma, BernoulliFamily]:
    """Blocks of ``2^n`` outcome points with independent coordinates inside each block.

    ``probs[i][b]`` is the success probability of component ``i`` on block
    ``b``.  Points of zero mass (deterministic coordinates) are dropped.
    """
    conv = backend.convert
    masses_b = [conv(m) for m in block_masses]
    n, nb = len(probs), len(masses_b)
    if nb == 0:
        raise ValueError("at least one block is required")
    for b, m in enumerate(masses_b):
        if not m > 0:
            raise NonpositiveMassError(f"block {b} has mass {m}; block masses must be > 0")
    if n * nb * 2**n > cap:
        raise TooLargeError(f"{n} components over {nb} blocks exceed the size cap {cap}")
    P = []
    for i, row in enumerate(probs):
        if len(row) != nb:
            raise BadProbabilityError(f"component {i} has {len(row)} probabilities for {nb} blocks")
        prow = [conv(p) for p in row]
        for b, p in enumerate(prow):
            if not 0 <= p <= 1:
                raise BadProbabilityError(f"probability {p} for component {i} on block {b} is outside [0,1]")
        P.append(prow)
    labels, masses, blocks, bits = [], [], [], []
    one = conv(1)
    for b in range(nb):
        blk = []
        for x in itertools.product((0, 1), repeat=n):
            m = masses_b[b]
            for i, xi in enumerate(x):
                m *= P[i][b] if xi else one - P[i][b]
            if m == 0:
                continue
            blk.append(len(labels))
            labels.append(f"b{b}:" + "".join(map(str, x)))
            masses.append(m)
            bits.append(x)
        blocks.append(blk)
    space = make_space(labels, masses, backend)
    sigma = PartitionSigma(space, blocks)
    qs = [LatticeElement(space, [x[i] for x in bits], backend) for i in range(n)]
    return space, sigma, make_family(CondExp(sigma), qs, backend)


# -- truncated infinite sums ---------------------------------------------------

@dataclass(frozen=True)
class TruncationStep:
    n: int
    prob: LatticeElement
    H: LatticeElement
    running_sup: LatticeElement
    difference: Optional[float]
    discrepancy: float
    bound_holds: bool


@dataclass(frozen=True)
class ConvergenceReport:
    A: NatSet
    steps: tuple
    tol: float
    converged: bool
    converged_at: Optional[int]
    monotone_after: bool

    @property
    def bound_holds(self) -> bool:
        return all(s.bound_holds for s in self.steps)

    @property
    def differences(self) -> list:
        return [s.difference for s in self.steps[1:]]

    @property
    def final(self) -> TruncationStep:
        return self.steps[-1]


ComponentSource = Union[Sequence[LatticeElement], Callable[[int], Optional[LatticeElement]]]


def truncated_lsn(T: CondExp, components: ComponentSource, A: NatSet, n_max: int,
                  tol: float = 1e-6, bound_tol: float = DEFAULT_TOL, strict: bool = False) -> ConvergenceReport:
    """Follow ``P_T[s_n ∈ A]`` for partial sums ``s_n`` of the first ``n`` components.

    ``components`` is a sequence or a callable ``j -> component`` (``None``
    meaning the zero component), indexed from 0.  At each ``n`` the finite
    bound is checked with the running supremum of ``h_i``.  Convergence is
    declared from the first ``n`` after which every successive difference
    stays below ``tol``.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    get = components.__getitem__ if not callable(components) else components
    steps: list[TruncationStep] = []
    qs: list[LatticeElement] = []
    prev = None
    for n in range(1, n_max + 1):
        q = get(n - 1)
        if q is None:
            base = qs[0].backend if qs else RATIONAL
            q = T.space.zero(base)
        qs.append(q)
        fam = make_family(T, qs)
        sup_h, _ = lsn_bounds(fam)
        prob = conditional_prob(fam, A)
        po = poisson_measure(A, fam.H)
        disc = (as_float(prob) - po).norm_inf()
        gap = [abs(float(a) - b) - float(s) for a, b, s in zip(prob.values, po.values, sup_h.values)]
        diff = None if prev is None else float((as_float(prob) - as_float(prev)).norm_inf())
        steps.append(TruncationStep(n, prob, fam.H, sup_h, diff, float(disc), max(gap) <= bound_tol))
        prev = prob
    diffs = [s.difference for s in steps[1:]]
    at = None
    for k in range(len(diffs) - 1, -1, -1):
        if diffs[k] < tol:
            at = k
        else:
            break
    converged = at is not None
    monotone = converged and all(diffs[k + 1] <= diffs[k] for k in range(at, len(diffs) - 1))
    report = ConvergenceReport(A, tuple(steps), tol, converged,
                               None if at is None else steps[at + 1].n, monotone)
    if strict and not converged:
        raise NotConvergedError(f"successive differences did not fall below {tol}", report)
    return report
