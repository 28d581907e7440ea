"""Model files, shipped fixtures and the generated pair-block model.

A model document is JSON::

    {
      "omega": [1, 2, 3, 4],
      "weights": ["3/8", "1/8", "1/8", "3/8"],
      "partition": [[1, 2], [3, 4]],
      "events": [[2, 3], [3, 4]],
      "sets": {"one": {"base": [1], "complemented": false}},
      "options": {"backend": "rational", "tolerance": 1e-9, "j_max": 200}
    }

Weights are exact rationals given as ``"p/q"`` strings or integers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from typing import Optional

from .condexp import CondExp, PartitionSigma, make_partition
from .errors import BadExampleError, ParseError, SteinChenError, ValidationError
from .lattice import SampleSpace, make_space
from .lsn import BernoulliFamily, make_family
from .poisson import NatSet
from .scalars import Backend, format_scalar, get_backend

SCHEMA_KEYS = ("omega", "weights", "partition", "events", "sets", "options")
DEFAULT_OPTIONS = {"backend": "rational", "tolerance": 1e-9, "j_max": 200}


@dataclass(eq=False)
class Model:
    """A parsed model document; the lattice objects are built lazily."""

    omega: list
    weights: list
    partition: list
    events: list
    sets: dict = field(default_factory=dict)
    options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))
    name: str = "model"
    notes: dict = field(default_factory=dict)

    @property
    def backend(self) -> Backend:
        return get_backend(self.options.get("backend", "rational"), self.options.get("tolerance"))

    @property
    def tolerance(self) -> float:
        return float(self.options.get("tolerance", DEFAULT_OPTIONS["tolerance"]))

    @property
    def j_max(self) -> int:
        return int(self.options.get("j_max", DEFAULT_OPTIONS["j_max"]))

    @cached_property
    def space(self) -> SampleSpace:
        return make_space(self.omega, self.weights, self.backend)

    @cached_property
    def sigma(self) -> PartitionSigma:
        return make_partition(self.space, self.partition)

    @cached_property
    def T(self) -> CondExp:
        return CondExp(self.sigma)

    @cached_property
    def family(self) -> BernoulliFamily:
        qs = [self.space.indicator(ev, self.backend) for ev in self.events]
        return make_family(self.T, qs, self.backend)

    def same_as(self, other: "Model") -> bool:
        return (self.omega == other.omega and self.weights == other.weights
                and self.partition == other.partition and self.events == other.events
                and self.sets == other.sets and self.options == other.options)


# -- parsing -----------------------------------------------------------------

def _rational(value, fld: str) -> Fraction:
    if isinstance(value, bool):
        raise ValidationError("booleans are not weights", field=fld, invariant="exact-rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"{value!r} is not a rational number", field=fld,
                                  invariant="exact-rational") from None
    raise ValidationError(f"weights must be 'p/q' strings or integers, got {value!r}", field=fld,
                          invariant="exact-rational")


def _label(value, fld: str):
    if isinstance(value, (str, int)) and not isinstance(value, bool):
        return value
    raise ValidationError(f"labels must be strings or integers, got {value!r}", field=fld,
                          invariant="label-type")


def _label_lists(doc: dict, key: str) -> list:
    raw = doc.get(key)
    if not isinstance(raw, list):
        raise ValidationError("expected a list of label lists", field=key, invariant="type")
    out = []
    for b, blk in enumerate(raw):
        if not isinstance(blk, list):
            raise ValidationError("expected a list of labels", field=f"{key}[{b}]", invariant="type")
        out.append([_label(x, f"{key}[{b}][{i}]") for i, x in enumerate(blk)])
    return out


def model_from_dict(doc: dict, name: str = "model") -> Model:
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object", field="$", invariant="type")
    unknown = sorted(set(doc) - set(SCHEMA_KEYS))
    if unknown:
        raise ValidationError(f"unknown keys {unknown}", field="$", invariant="schema")
    for key in ("omega", "weights", "partition", "events"):
        if key not in doc:
            raise ValidationError("missing required key", field=key, invariant="schema")
    if not isinstance(doc["omega"], list):
        raise ValidationError("expected a list of labels", field="omega", invariant="type")
    omega = [_label(x, f"omega[{i}]") for i, x in enumerate(doc["omega"])]
    if not isinstance(doc["weights"], list):
        raise ValidationError("expected a list of weights", field="weights", invariant="type")
    weights = [_rational(x, f"weights[{i}]") for i, x in enumerate(doc["weights"])]
    if len(weights) != len(omega):
        raise ValidationError(f"{len(weights)} weights for {len(omega)} labels", field="weights",
                              invariant="length")
    partition = _label_lists(doc, "partition")
    events = _label_lists(doc, "events")

    sets = {}
    raw_sets = doc.get("sets", {})
    if not isinstance(raw_sets, dict):
        raise ValidationError("expected an object of named sets", field="sets", invariant="type")
    for nm, spec in raw_sets.items():
        fld = f"sets.{nm}"
        if not isinstance(spec, dict) or not isinstance(spec.get("base", []), list):
            raise ValidationError("expected {base: [ints], complemented: bool}", field=fld, invariant="type")
        try:
            sets[nm] = NatSet.from_dict(spec)
        except ValueError as exc:
            raise ValidationError(str(exc), field=fld, invariant="natural-numbers") from None

    options = dict(DEFAULT_OPTIONS)
    raw_opts = doc.get("options", {})
    if not isinstance(raw_opts, dict):
        raise ValidationError("expected an object", field="options", invariant="type")
    for key, val in raw_opts.items():
        if key not in DEFAULT_OPTIONS:
            raise ValidationError(f"unknown option {key!r}", field="options", invariant="schema")
        options[key] = val
    if options["backend"] not in ("rational", "float"):
        raise ValidationError(f"unknown backend {options['backend']!r}", field="options.backend",
                              invariant="backend")
    if not isinstance(options["tolerance"], (int, float)) or not options["tolerance"] >= 0:
        raise ValidationError("tolerance must be a number >= 0", field="options.tolerance", invariant="range")
    if not isinstance(options["j_max"], int) or options["j_max"] < 1:
        raise ValidationError("j_max must be a positive integer", field="options.j_max", invariant="range")

    model = Model(omega, weights, partition, events, sets, options, name)
    _validate(model)
    return model


def _validate(model: Model) -> None:
    """Build the lattice objects so invariant violations surface at parse time."""
    steps = (("omega", lambda: model.space), ("partition", lambda: model.sigma),
             ("events", lambda: model.family))
    for fld, build in steps:
        try:
            build()
        except KeyError as exc:
            raise ValidationError(f"unknown label {exc.args[0]!r}", field=fld, invariant="known-label") from None
        except (SteinChenError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            inv = type(exc).__name__.removesuffix("Error")
            if fld == "omega" and inv in ("NonpositiveMass", "MassExceedsOne"):
                fld = "weights"
            raise ValidationError(str(exc), field=fld, invariant=inv) from None


def parse_model(text: str, name: str = "model") -> Model:
    """Parse a JSON model document; syntax errors carry line and column."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return model_from_dict(doc, name)


def load_model(path: str) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_model(text, name=path)


def model_to_dict(model: Model) -> dict:
    return {
        "omega": list(model.omega),
        "weights": [format_scalar(Fraction(w)) for w in model.weights],
        "partition": [list(b) for b in model.partition],
        "events": [list(e) for e in model.events],
        "sets": {k: v.to_dict() for k, v in model.sets.items()},
        "options": dict(model.options),
    }


def emit_model(model: Model) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


# -- fixtures ----------------------------------------------------------------

def load_fixture(name: str) -> Model:
    text = resources.files("steinchen.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return parse_model(text, name=name)


def example1() -> Model:
    return load_fixture("example1")


def example2() -> Model:
    return load_fixture("example2")


def example3(K: int) -> Model:
    """Pair-block model truncated to points ``1..2K``.

    Point ``2k-1`` has mass ``2/(3·2^k)`` and ``2k`` has mass ``4^{-k}``; the
    blocks are ``{2k-1, 2k}``.  Events are ``B_{2m-1} = {n ≡ 1,2 (mod 4), n >= 4m-3}``
    and ``B_{2m} = {4m}``, cut down to the retained points; events that miss
    every retained point are dropped.  Conditional quantities on retained
    blocks depend only on within-block mass ratios, so every block is exact.
    """
    if not isinstance(K, int) or K < 2:
        raise BadExampleError(f"the pair-block model needs K >= 2, got {K!r}")
    top = 2 * K
    omega = list(range(1, top + 1))
    weights = []
    for k in range(1, K + 1):
        weights += [Fraction(2, 3 * 2**k), Fraction(1, 4**k)]
    partition = [[2 * k - 1, 2 * k] for k in range(1, K + 1)]
    events, names = [], []
    m = 1
    while 4 * m - 3 <= top:
        events.append([n for n in range(4 * m - 3, top + 1) if n % 4 in (1, 2)])
        names.append(f"B{2 * m - 1}")
        if 4 * m <= top:
            events.append([4 * m])
            names.append(f"B{2 * m}")
        m += 1
    model = Model(omega, weights, partition, events, {}, dict(DEFAULT_OPTIONS), name=f"example3(K={K})")
    model.notes["event_names"] = names
    model.notes["exact_blocks"] = list(range(K))
    return model


def build_example(n: int, K: int = 3) -> Model:
    if n == 1:
        return example1()
    if n == 2:
        return example2()
    if n == 3:
        return example3(K)
    raise BadExampleError(f"no example {n!r}; choose 1, 2 or 3")


# -- A battery ---------------------------------------------------------------

def set_battery(kappa: int, seed: int = 0, rng: Optional[random.Random] = None) -> dict:
    """Named test sets: empty, N0, singletons ``0..κ+2``, evens up to ``κ+3``,
    a seeded random subset of ``0..κ+2``, and the complements of all of these.

    The even numbers are truncated because a set must be finite or cofinite;
    beyond ``κ`` only the Poisson side has mass.
    """
    rng = rng or random.Random(seed)
    top = kappa + 2
    base = {"empty": NatSet.empty()}
    for j in range(top + 1):
        base[f"k{j}"] = NatSet.of(j)
    base["evens"] = NatSet.finite(range(0, kappa + 4, 2))
    base["random"] = NatSet.finite(j for j in range(top + 1) if rng.random() < 0.5)
    out = dict(base)
    for nm, A in base.items():
        out["not_" + nm if nm != "empty" else "naturals"] = ~A
    return out
