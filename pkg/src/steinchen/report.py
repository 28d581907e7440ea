"""Check battery, report rows and their JSON / CSV / table renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .condexp import CondExp, IndependenceReport, family_conditionally_independent, trivial_partition
from .errors import GridEmptyError, ValidationError
from .lattice import as_float, exp_neg
from .lsn import (
    build_product_model,
    check_independence_shift,
    lsn_bounds,
    make_family,
    stein_identity_residual,
    tv_distance,
    verify_lsn,
)
from .models import Model, set_battery
from .poisson import NatSet
from .scalars import format_scalar
from .stein import SteinConfig, check_g_measure, delta

SCHEMA_VERSION = "v1"
CSV_HEADER = ("block", "block_labels", "set", "A", "p_T", "po_A", "difference", "tv",
              "sup_h", "refined", "bound_satisfied", "refined_satisfied")
SWEEP_HEADER = ("lambda", "block", "tv", "sup_h", "refined", "ratio")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return format_scalar(x)


@dataclass(frozen=True)
class ReportRow:
    block: int
    block_labels: tuple
    set_name: str
    A: str
    p_T: object
    po_A: float
    difference: float
    tv: float
    sup_h: object
    refined: float
    bound_satisfied: bool
    refined_satisfied: bool

    def record(self) -> dict:
        return {"block": self.block, "block_labels": list(self.block_labels), "set": self.set_name,
                "A": self.A, "p_T": _fmt(self.p_T), "po_A": self.po_A, "difference": self.difference,
                "tv": self.tv, "sup_h": _fmt(self.sup_h), "refined": self.refined,
                "bound_satisfied": self.bound_satisfied, "refined_satisfied": self.refined_satisfied}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: Optional[float] = None
    detail: str = ""

    def record(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "detail": self.detail}


@dataclass
class Report:
    model: str
    rows: list
    checks: list
    blocks: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return [c for c in self.checks if not c.passed]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "model": self.model, "passed": not self.failed,
                "failed_checks": [c.name for c in self.failed],
                "checks": [c.record() for c in self.checks],
                "blocks": self.blocks, "rows": [r.record() for r in self.rows], "extras": self.extras}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(CSV_HEADER)
        for r in self.rows:
            rec = r.record()
            rec["block_labels"] = " ".join(map(str, r.block_labels))
            wr.writerow([_fmt(rec[k]) if not isinstance(rec[k], str) else rec[k] for k in CSV_HEADER])
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"model: {self.model}", ""]
        lines.append(f"{'block':<14}{'H':>10}{'sup h':>10}{'refined':>12}{'tv':>12}")
        for b in self.blocks:
            lines.append(f"{'{' + ','.join(map(str, b['labels'])) + '}':<14}{b['H']:>10}{b['sup_h']:>10}"
                         f"{b['refined']:>12.6f}{b['tv']:>12.6f}")
        lines.append("")
        lines.append(f"{'block':<7}{'set':<16}{'P_T[w in A]':>14}{'Po(A;H)':>12}{'|diff|':>12}  ok")
        for r in self.rows:
            ok = "yes" if r.bound_satisfied and r.refined_satisfied else "NO"
            lines.append(f"{r.block:<7}{r.set_name:<16}{_fmt(r.p_T):>14}{r.po_A:>12.6f}{r.difference:>12.6f}  {ok}")
        for key, val in self.extras.items():
            lines.append("")
            lines.append(f"{key}: {json.dumps(val)}")
        lines.append("")
        for c in self.checks:
            val = "" if c.value is None else f"  (max residual {c.value:.3g})"
            lines.append(f"[{'pass' if c.passed else 'FAIL'}] {c.name}{val}")
        lines.append(f"result: {'pass' if not self.failed else 'FAIL'}")
        return "\n".join(lines) + "\n"


# -- analysis ----------------------------------------------------------------

def _witness(rep: IndependenceReport) -> str:
    return "" if rep.witness is None else json.dumps(rep.witness)


def block_summary(model: Model) -> list:
    fam = model.family
    sigma = model.sigma
    sup_h, refined = lsn_bounds(fam)
    tv = tv_distance(fam)
    out = []
    for b, blk in enumerate(sigma.blocks):
        i = blk[0]
        out.append({"block": b, "labels": sigma.block_labels(b), "H": _fmt(fam.H.values[i]),
                    "h": [_fmt(h.values[i]) for h in fam.hs], "sup_h": _fmt(sup_h.values[i]),
                    "refined": float(refined.values[i]), "tv": float(tv.values[i])})
    return out


def unconditional_summary(model: Model) -> dict:
    """The same events under the trivial partition: ``P(B_i)``, pairwise products, ``E[s]``
    and the classical bound ``max P(B_i)``."""
    T0 = CondExp(trivial_partition(model.space))
    fam0 = make_family(T0, model.family.qs, model.backend)
    probs = [h.values[0] for h in fam0.hs]
    pairs = []
    for i in range(fam0.n):
        for j in range(i + 1, fam0.n):
            joint = T0(fam0.qs[i] * fam0.qs[j]).values[0]
            prod = probs[i] * probs[j]
            pairs.append({"i": i, "j": j, "P(Bi and Bj)": _fmt(joint), "P(Bi)P(Bj)": _fmt(prod),
                          "independent": model.backend.eq(joint, prod)})
    return {"P(B)": [_fmt(p) for p in probs], "E[s]": _fmt(fam0.H.values[0]),
            "classical_bound": _fmt(max(probs)) if probs else None, "pairs": pairs}


def analyze(model: Model, sets: Optional[dict] = None, only: Optional[str] = None) -> Report:
    """Rows for every named set and the full check battery."""
    fam = model.family
    tol = model.tolerance
    cfg = SteinConfig(j_max=model.j_max, tolerance=tol)
    kappa = int(max(fam.w.values)) if fam.n else 0
    if sets is None:
        sets = dict(model.sets) or set_battery(kappa)
    if only is not None:
        if only not in sets:
            raise ValidationError(f"no set named {only!r}; known: {sorted(sets)}", field="--set",
                                  invariant="known-set")
        sets = {only: sets[only]}
    indep = family_conditionally_independent(model.T, fam.qs)
    labels = [tuple(model.sigma.block_labels(b)) for b in range(len(model.sigma))]

    rows = []
    for name in sorted(sets):
        A = sets[name]
        rep = verify_lsn(fam, A, tol, independence=indep)
        for bd in rep.blocks:
            rows.append(ReportRow(bd.block, labels[bd.block], name, A.describe(), bd.p_T, float(bd.po_A),
                                  bd.difference, bd.tv, bd.sup_h, bd.refined, bd.bound_satisfied,
                                  bd.refined_satisfied))
    rows.sort(key=lambda r: (r.block, r.set_name))
    tv_rep = verify_lsn(fam, None, tol, independence=indep)

    checks = [Check("family_conditionally_independent", indep.is_independent,
                    float(indep.max_residual), _witness(indep))]
    checks.append(Check("lsn_bound", all(r.bound_satisfied for r in rows) and tv_rep.bound_satisfied))
    checks.append(Check("lsn_refined_bound",
                        all(r.refined_satisfied for r in rows) and tv_rep.refined_satisfied))

    stein = max(stein_identity_residual(fam, A, cfg) for A in sets.values())
    checks.append(Check("stein_identity", stein <= tol, stein))

    Hf = as_float(fam.H)
    gap = Hf.space.unit(Hf.backend) - exp_neg(Hf)
    worst_delta = -math.inf
    for A in sets.values():
        for j in range(1, kappa + 3):
            d = delta(j, fam.H, A, cfg)
            worst_delta = max(worst_delta, max(abs(a) - b for a, b in zip(d.values, gap.values)))
    checks.append(Check("delta_bound", worst_delta <= tol, worst_delta))

    singles = [NatSet.of(i) for i in range(kappa + 2)]
    meas = max(check_g_measure(n, fam.H, singles, cfg) for n in range(1, kappa + 3))
    checks.append(Check("g_measure", meas <= tol, meas))

    if fam.n:
        shift = max(check_independence_shift(fam, i, k, A, cfg)
                    for i in range(fam.n) for k in (0, 1) for A in sets.values())
        checks.append(Check("independence_shift", shift <= tol, shift))

    return Report(model.name, rows, checks, block_summary(model),
                  {"unconditional": unconditional_summary(model)})


# -- sweep -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    lam: Fraction
    block: int
    tv: float
    sup_h: object
    refined: float
    ratio: Optional[float]

    @property
    def satisfied(self) -> bool:
        return self.tv <= float(self.sup_h) + 1e-9


def sweep(model: Model, lambdas: Sequence) -> tuple[list, list]:
    """Rescale every block probability ``p <- λp`` and recompute the bounds.

    The conditional law of a conditionally independent sum depends only on
    the block masses and the ``h_i``, so each grid point is rebuilt as a
    product model.  Returns ``(rows, warnings)``.
    """
    lambdas = [Fraction(x) for x in lambdas]
    if not lambdas:
        raise GridEmptyError("the lambda grid is empty")
    fam = model.family
    sigma = model.sigma
    warnings = []
    if not family_conditionally_independent(model.T, fam.qs).is_independent:
        warnings.append("family is not conditionally independent; the sweep describes the product model "
                        "with the same h_i")
    probs = [[h.values[blk[0]] for blk in sigma.blocks] for h in fam.hs]
    pmax = max((p for row in probs for p in row), default=0)
    rows = []
    for lam in sorted(lambdas, reverse=True):
        if lam <= 0 or lam * pmax > 1:
            raise ValidationError(f"lambda {lam} outside (0, {1 / pmax if pmax else 'inf'}]",
                                  field="--lambdas", invariant="range")
        scaled = [[lam * p if model.backend.exact else float(lam) * p for p in row] for row in probs]
        _, sig2, fam2 = build_product_model(list(sigma.block_masses), scaled, model.backend)
        sup_h, refined = lsn_bounds(fam2)
        tv = tv_distance(fam2)
        for b, blk in enumerate(sig2.blocks):
            i = blk[0]
            s = sup_h.values[i]
            t = float(tv.values[i])
            rows.append(SweepRow(lam, b, t, s, float(refined.values[i]), t / float(s) if s else None))
    rows.sort(key=lambda r: (-r.lam, r.block))
    return rows, warnings


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(SWEEP_HEADER)
    for r in rows:
        wr.writerow([_fmt(r.lam), r.block, repr(r.tv), _fmt(r.sup_h), repr(r.refined),
                     "" if r.ratio is None else repr(r.ratio)])
    return buf.getvalue()


def sweep_json(rows: Sequence[SweepRow], warnings: Sequence[str], model_name: str) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, "model": model_name, "warnings": list(warnings),
                       "passed": all(r.satisfied for r in rows),
                       "rows": [{"lambda": _fmt(r.lam), "block": r.block, "tv": r.tv, "sup_h": _fmt(r.sup_h),
                                 "refined": r.refined, "ratio": r.ratio} for r in rows]}, indent=2)
