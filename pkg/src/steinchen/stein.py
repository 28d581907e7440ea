"""Solution ``g(j,H,A)`` of the Stein recurrence for the Poisson law.

All quantities here are pointwise functions of ``H``, so each lattice-level
function evaluates a scalar kernel once per distinct value of ``H`` and maps
the result back onto the space.  Three kernels compute ``g``:

``recurrence``
    iterate ``g(j) = J[(j-1) g(j-1) + ν_A(j-1) - Po(A;H)]`` from ``g(0) = 0``,
    plus ``(1/j)(ν_A(0) - ν_A(j))`` off the support of ``H``.
``closed_form``
    ``(n-1)! J^n e^H F(n-1,H,A)`` plus the same off-support term.
``singleton_additive``
    sum of singleton values ``g(n,H,{i})`` over ``i ∈ A`` (or minus the sum
    over ``i ∉ A`` for cofinite ``A``), each singleton evaluated from a
    series of positive terms.

The forward recurrence multiplies rounding error by roughly ``(j-1)/h`` per
step, and ``F`` is a difference of nearly equal numbers, so kernels run in
a private mpmath context whose precision grows with ``log10(j!/h^j)``.
That estimate ignores cancellation in ``ν_A(k) - Po(A;H)`` itself (a cofinite
``A`` at small ``h`` makes ``g`` tiny), so every result is recomputed with more
digits and accepted only once the two agree to binary64 accuracy.  Results are
rounded to binary64 on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import mpmath

from .errors import BadIndicesError, JTooLargeError, NegativeIndexError, SetsNotDisjointError
from .lattice import LatticeElement
from .poisson import NatSet, band_values, mp_measure, mp_pmf

_BASE_DPS = 30
_CONFIRM_DPS = 20
_MAX_DPS = 4000
_AGREE = 2.0**-58


class Evaluator(str, Enum):
    RECURRENCE = "recurrence"
    CLOSED_FORM = "closed_form"
    SINGLETON_ADDITIVE = "singleton_additive"


@dataclass(frozen=True)
class SteinConfig:
    """Evaluator choice and numerical knobs.

    ``tolerance`` is the agreement tolerance used by the checks;
    ``series_tol`` the relative truncation threshold for the singleton series.
    """

    evaluator: Evaluator = Evaluator.RECURRENCE
    j_max: int = 200
    tolerance: float = 1e-9
    series_tol: float = 1e-40
    max_terms: int = 500

    def __post_init__(self):
        object.__setattr__(self, "evaluator", Evaluator(self.evaluator))
        if self.j_max < 1:
            raise ValueError("j_max must be >= 1")


DEFAULT_CONFIG = SteinConfig()


def working_dps(n: int, h: float, extra: int = 0) -> int:
    """Decimal digits needed to run the recurrence up to ``n`` at parameter ``h``."""
    lost = 0.0
    if h > 0:
        log_h = math.log10(h)
        for k in range(1, n + 1):
            if k > h:
                lost += math.log10(k) - log_h
        lost += h * math.log10(math.e)
    return _BASE_DPS + extra + int(math.ceil(lost))


def _ctx(dps: int):
    ctx = mpmath.MPContext()
    ctx.dps = dps
    return ctx


# -- scalar kernels (mp values in a given context) -------------------------

def _off_band(n: int, A: NatSet, ctx):
    """``g(n, 0, A) = (1/n)(ν_A(0) - ν_A(n))``."""
    return ctx.mpf(int(0 in A) - int(n in A)) / n


def _recurrence_seq(n: int, h, A: NatSet, ctx) -> list:
    g = [ctx.mpf(0)]
    if h == 0:
        g.extend(_off_band(j, A, ctx) for j in range(1, n + 1))
        return g
    J = 1 / h
    po_a = mp_measure(ctx, A, h)
    for j in range(1, n + 1):
        g.append(J * ((j - 1) * g[j - 1] + int((j - 1) in A) - po_a))
    return g


def _F(m: int, h, A: NatSet, ctx):
    nm = NatSet.upto(m)
    return mp_measure(ctx, A & nm, h) - mp_measure(ctx, A, h) * mp_measure(ctx, nm, h)


def _closed_form(n: int, h, A: NatSet, ctx):
    if n == 0:
        return ctx.mpf(0)
    if h == 0:
        return _off_band(n, A, ctx)
    return ctx.factorial(n - 1) * h ** (-n) * ctx.exp(h) * _F(n - 1, h, A, ctx)


class _SingletonKernel:
    """Memoised ``g(j,h,{i})`` for one ``h``, all terms positive."""

    def __init__(self, h, ctx, series_tol: float, max_terms: int):
        self.h, self.ctx = h, ctx
        self.series_tol, self.max_terms = series_tol, max_terms
        self._series: dict[int, object] = {}
        self._exp = ctx.exp(-h)

    def series(self, j: int):
        """``Σ_{s>=1} (j-1)!/(j+s-1)! h^{s-1}``."""
        if j in self._series:
            return self._series[j]
        ctx, h = self.ctx, self.h
        term = ctx.mpf(1) / j
        total = ctx.mpf(0)
        s = 1
        while True:
            total += term
            ratio = h / (j + s)
            term = term * ratio
            s += 1
            if ratio < 1 and term <= self.series_tol * total:
                break
            if s > self.max_terms:
                # large h: no cancellation in the closed expression
                total = (ctx.factorial(j - 1) * h ** (-j)
                         * (ctx.exp(h) - ctx.fsum(h**k / ctx.factorial(k) for k in range(j))))
                break
        self._series[j] = total
        return total

    def g(self, j: int, i: int):
        ctx, h = self.ctx, self.h
        if h == 0:
            return ctx.mpf(int(i == 0) - int(i == j)) / j
        if j <= i:
            # -e^{-h}/i! Σ_{k<j} (j-1)!/k! h^{i-j+k}
            fj = ctx.factorial(j - 1)
            s = ctx.fsum(fj / ctx.factorial(k) * h ** (i - j + k) for k in range(j))
            return -self._exp * s / ctx.factorial(i)
        return self._exp * h**i / ctx.factorial(i) * self.series(j)

    def hg(self, j: int, i: int):
        return self.h * self.g(j, i)


def _singleton_additive(n: int, A: NatSet, kern: _SingletonKernel):
    ctx = kern.ctx
    if n == 0:
        return ctx.mpf(0)
    s = ctx.fsum(kern.g(n, i) for i in sorted(A.base)) if A.base else ctx.mpf(0)
    return -s if A.complemented else s


def _evaluate(ns: Sequence[int], h: float, A: NatSet, cfg: SteinConfig, ctx) -> dict:
    top = max(ns)
    hm = ctx.mpf(h)
    ev = cfg.evaluator
    if ev is Evaluator.RECURRENCE:
        seq = _recurrence_seq(top, hm, A, ctx)
        return {n: seq[n] for n in ns}
    if ev is Evaluator.CLOSED_FORM:
        return {n: _closed_form(n, hm, A, ctx) for n in ns}
    kern = _SingletonKernel(hm, ctx, cfg.series_tol, cfg.max_terms)
    return {n: _singleton_additive(n, A, kern) for n in ns}


def _agree(a, b) -> bool:
    return a == b or abs(a - b) <= _AGREE * abs(b)


def g_values_scalar(ns: Sequence[int], h: float, A: NatSet, cfg: SteinConfig = DEFAULT_CONFIG,
                    ctx=None) -> dict:
    """``{n: g(n,h,A)}`` as mp numbers, using ``cfg.evaluator``.

    With an explicit ``ctx`` the kernel runs once at that precision.
    Otherwise it starts from :func:`working_dps` and is repeated with
    ``_CONFIRM_DPS`` more digits; on disagreement the precision doubles.
    """
    if ctx is not None:
        return _evaluate(ns, h, A, cfg, ctx)
    dps = working_dps(max(ns) + 1, h)
    cur = _evaluate(ns, h, A, cfg, _ctx(dps))
    while True:
        nxt = _evaluate(ns, h, A, cfg, _ctx(dps + _CONFIRM_DPS))
        if all(_agree(cur[n], nxt[n]) for n in ns) or dps > _MAX_DPS:
            return nxt
        dps = 2 * (dps + _CONFIRM_DPS)
        cur = _evaluate(ns, h, A, cfg, _ctx(dps))


# -- lattice-valued --------------------------------------------------------

def _check_j(j: int, cfg: SteinConfig) -> None:
    if j < 0:
        raise NegativeIndexError(f"j must be >= 0, got {j}")
    if j > cfg.j_max:
        raise JTooLargeError(f"j = {j} exceeds j_max = {cfg.j_max}")


def _out_backend(H: LatticeElement):
    from .scalars import FLOAT
    return FLOAT if H.backend.exact else H.backend


def _lift(H: LatticeElement, fn) -> LatticeElement:
    memo: dict = {}
    out = []
    for h in band_values(H):
        if h not in memo:
            memo[h] = fn(h)
        out.append(memo[h])
    return LatticeElement(H.space, out, _out_backend(H))


def stein_g(j: int, H: LatticeElement, A: NatSet, cfg: SteinConfig = DEFAULT_CONFIG) -> LatticeElement:
    """``g(j,H,A)`` with ``g(0,H,A) = 0``."""
    _check_j(j, cfg)
    if j == 0:
        band_values(H)
        return H.space.zero(_out_backend(H))
    return _lift(H, lambda h: float(g_values_scalar([j], h, A, cfg)[j]))


def stein_g_table(js: Iterable[int], H: LatticeElement, A: NatSet,
                  cfg: SteinConfig = DEFAULT_CONFIG) -> dict[int, LatticeElement]:
    """``{j: g(j,H,A)}`` sharing one recurrence per distinct value of ``H``."""
    js = sorted(set(js))
    for j in js:
        _check_j(j, cfg)
    per_h: dict[float, dict] = {}
    hs = band_values(H)
    for h in hs:
        if h not in per_h:
            vals = g_values_scalar(js, h, A, cfg)
            per_h[h] = {n: float(v) for n, v in vals.items()}
    b = _out_backend(H)
    return {j: LatticeElement(H.space, [per_h[h][j] for h in hs], b) for j in js}


def stein_F(n: int, H: LatticeElement, A: NatSet) -> LatticeElement:
    """``F(n,H,A) = Po(A∩N(n);H) - Po(A;H) Po(N(n);H)``."""
    if n < 0:
        raise NegativeIndexError(f"n must be >= 0, got {n}")

    def kernel(h):
        ctx = _ctx(working_dps(n + 1, h))
        return float(_F(n, ctx.mpf(h), A, ctx))

    return _lift(H, kernel)


def stein_g_singleton(j: int, i: int, H: LatticeElement, cfg: SteinConfig = DEFAULT_CONFIG) -> LatticeElement:
    """``g(j,H,{i})`` from the positive-term expansions (no cancellation)."""
    if j < 1 or i < 0:
        raise BadIndicesError(f"need j >= 1 and i >= 0, got j={j}, i={i}")

    def kernel(h):
        ctx = _ctx(_BASE_DPS + 10)
        return float(_SingletonKernel(ctx.mpf(h), ctx, cfg.series_tol, cfg.max_terms).g(j, i))

    return _lift(H, kernel)


def stein_hg_singleton(j: int, i: int, H: LatticeElement, cfg: SteinConfig = DEFAULT_CONFIG) -> LatticeElement:
    """``H g(j,H,{i})``."""
    if j < 1 or i < 0:
        raise BadIndicesError(f"need j >= 1 and i >= 0, got j={j}, i={i}")

    def kernel(h):
        ctx = _ctx(_BASE_DPS + 10)
        return float(_SingletonKernel(ctx.mpf(h), ctx, cfg.series_tol, cfg.max_terms).hg(j, i))

    return _lift(H, kernel)


def delta(j: int, H: LatticeElement, A: NatSet, cfg: SteinConfig = DEFAULT_CONFIG) -> LatticeElement:
    """``Δ(j,H,A) = H (g(j+1,H,A) - g(j,H,A))``, differenced before rounding."""
    if j < 1:
        raise BadIndicesError(f"Δ is defined for j >= 1, got {j}")
    _check_j(j + 1, cfg)

    def kernel(h):
        v = g_values_scalar([j, j + 1], h, A, cfg)
        return float(h * (v[j + 1] - v[j]))

    return _lift(H, kernel)


def check_g_measure(n: int, H: LatticeElement, sets: Sequence[NatSet],
                    cfg: SteinConfig = DEFAULT_CONFIG) -> float:
    """Largest additivity / complement-antisymmetry residual of ``A -> g(n,H,A)``."""
    sets = list(sets)
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            if not sets[a].isdisjoint(sets[b]):
                raise SetsNotDisjointError(
                    f"{sets[a].describe()} and {sets[b].describe()} intersect")
    union = NatSet.empty()
    for s in sets:
        union = union | s
    g = lambda A: stein_g(n, H, A, cfg)  # noqa: E731
    total = H.space.zero(_out_backend(H))
    for s in sets:
        total = total + g(s)
    residual = (g(union) - total).norm_inf()
    for A in sets + [union]:
        residual = max(residual, (g(A) + g(~A)).norm_inf())
    return float(residual)
