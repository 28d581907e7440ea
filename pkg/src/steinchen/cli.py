"""Command line: ``steinchen example|verify|sweep``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on input errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .errors import SteinChenError
from .models import Model, build_example, load_model
from .report import analyze, sweep, sweep_csv, sweep_json

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_LAMBDAS = "1,1/2,1/4,1/8"


def _with_overrides(model: Model, args) -> Model:
    opts = dict(model.options)
    if args.backend is not None:
        opts["backend"] = args.backend
    if args.tolerance is not None:
        opts["tolerance"] = args.tolerance
    if args.jmax is not None:
        opts["j_max"] = args.jmax
    if opts == model.options:
        return model
    out = Model(model.omega, model.weights, model.partition, model.events, model.sets, opts,
                model.name, dict(model.notes))
    return out


def _emit_report(report, args) -> int:
    if args.json:
        print(report.to_json())
    elif args.csv:
        sys.stdout.write(report.to_csv())
    else:
        sys.stdout.write(report.to_table())
    return report.exit_code


def _example3_extras(model: Model) -> dict:
    w = model.family.w
    return {"s": {str(lab): int(v) for lab, v in zip(model.space.labels, w.values)},
            "event_names": model.notes.get("event_names", []),
            "exact_blocks": model.notes.get("exact_blocks", [])}


def cmd_example(args) -> int:
    model = _with_overrides(build_example(args.n, args.K), args)
    report = analyze(model, only=args.set)
    if args.n == 3:
        report.extras["pair_blocks"] = _example3_extras(model)
    return _emit_report(report, args)


def _load(args) -> Model:
    if args.example is not None:
        return build_example(args.example, args.K)
    if args.model is None:
        raise SteinChenError("give a model file or --example N")
    return load_model(args.model)


def cmd_verify(args) -> int:
    model = _with_overrides(_load(args), args)
    return _emit_report(analyze(model, only=args.set), args)


def _lambdas(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(Fraction(part))
        except (ValueError, ZeroDivisionError):
            raise SteinChenError(f"bad lambda value {part!r}") from None
    return out


def cmd_sweep(args) -> int:
    model = _with_overrides(_load(args), args)
    rows, warnings = sweep(model, _lambdas(args.lambdas))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.json:
        print(sweep_json(rows, warnings, model.name))
    else:
        sys.stdout.write(sweep_csv(rows))
    return EXIT_OK if all(r.satisfied for r in rows) else EXIT_FAIL


def _common(p: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    fmt = p.add_mutually_exclusive_group()
    for f in formats:
        fmt.add_argument(f"--{f}", action="store_true", help=f"write {f.upper()} to stdout")
    p.add_argument("--tolerance", type=float, help="comparison tolerance (default from the model, 1e-9)")
    p.add_argument("--backend", choices=("rational", "float"), help="scalar backend override")
    p.add_argument("--jmax", type=int, help="largest admissible j for g(j,H,A)")
    p.add_argument("--K", type=int, default=3, help="pair blocks kept for example 3 (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steinchen",
                                     description="Conditional Poisson approximation reports for finite models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="report for a built-in example (1, 2 or 3)")
    p.add_argument("n", type=int, help="example number")
    p.add_argument("--set", help="restrict to one named set A")
    _common(p)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("verify", help="run every check on a model file")
    p.add_argument("model", nargs="?", help="path to a JSON model file")
    p.add_argument("--example", type=int, help="use a built-in example instead of a file")
    p.add_argument("--set", help="restrict to one named set A")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV of tv and bounds over a grid of probability scalings")
    p.add_argument("model", nargs="?", help="path to a JSON model file")
    p.add_argument("--example", type=int, help="use a built-in example instead of a file")
    p.add_argument("--lambdas", default=DEFAULT_LAMBDAS,
                   help=f"comma separated scalings in (0, 1/max p] (default {DEFAULT_LAMBDAS})")
    _common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SteinChenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
