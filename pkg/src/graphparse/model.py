"""Declarative language models: loading, validation, serialization, grammar compilation.

A language model is the abstract syntax of a language: a set of element
definitions (lexical, composition, alternative) plus per-element constraint
and probability attachments.  Models are plain data, loaded from a strict
JSON document format, and compiled into an internal :class:`Grammar` that the
parse engine consumes.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field, replace

from .errors import ModelSyntaxError, ModelValidationError, RegistryError

KINDS = ("lexical", "composition", "alternative")
STRATEGIES = ("regex", "lexicon", "heuristic")
PROBABILITY_MODES = ("value", "frequency", "evaluator", "default")

INFINITE = -1  # sentinel for "no upper bound" in float slots


@dataclass(frozen=True)
class PatternSpec:
    """How a lexical element recognizes lexemes."""

    strategy: str
    expression: str | None = None
    lexicon_class: str | None = None
    heuristic_name: str | None = None
    open_class: bool = False      # unknown-word fallback may propose this element
    case_sensitive: bool = False  # lexicon rows for this class match exactly


@dataclass(frozen=True)
class ProbabilitySpec:
    mode: str = "default"
    value: float | None = None
    frequency: int | None = None
    evaluator: str | None = None
    member_presence: dict[str, float] = field(default_factory=dict)


DEFAULT_PROBABILITY = ProbabilitySpec()


@dataclass(frozen=True)
class MemberDef:
    name: str
    target: str
    optional: bool = False
    floating: bool = False
    many: bool = False
    min_count: int = 1
    reference: bool = False
    reference_form: str | None = None

    @property
    def effectively_optional(self) -> bool:
        """True when the member may be wholly absent (presence factor applies)."""
        return self.optional or (self.many and self.min_count == 0)


@dataclass(frozen=True)
class ConstraintSpec:
    name: str
    params: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ElementDef:
    name: str
    kind: str
    pattern: PatternSpec | None = None
    members: tuple[MemberDef, ...] = ()
    variants: tuple[str, ...] = ()
    constraints: tuple[ConstraintSpec, ...] = ()
    probability: ProbabilitySpec = DEFAULT_PROBABILITY


@dataclass(frozen=True)
class LanguageModel:
    name: str
    start: str
    elements: tuple[ElementDef, ...]

    def element(self, name: str) -> ElementDef:
        return self._index()[name]

    def get(self, name: str) -> ElementDef | None:
        return self._index().get(name)

    def _index(self) -> dict[str, ElementDef]:
        # cached on the instance despite frozen=True; object.__setattr__ is the
        # blessed escape hatch and the cache is derived data
        cache = self.__dict__.get("_element_index")
        if cache is None:
            cache = {e.name: e for e in self.elements}
            object.__setattr__(self, "_element_index", cache)
        return cache

    def variant_closure(self, name: str) -> frozenset[str]:
        """All concrete element names reachable from ``name`` through
        alternative variants, including ``name`` itself."""
        seen: set[str] = set()
        stack = [name]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            edef = self.get(cur)
            if edef is not None and edef.kind == "alternative":
                stack.extend(edef.variants)
        return frozenset(seen)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "notice"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.upper()} {self.path}: {self.message}"


# ---------------------------------------------------------------------------
# Loading


def _reject_duplicates(pairs):
    seen = set()
    out = {}
    for key, value in pairs:
        if key in seen:
            raise ModelSyntaxError(f"duplicate field {key!r}")
        seen.add(key)
        out[key] = value
    return out


class _Reader:
    """Strict dict reader that tracks consumed keys and reports leftovers."""

    def __init__(self, data, path):
        if not isinstance(data, dict):
            raise ModelSyntaxError(f"{path}: expected an object")
        self.data = data
        self.path = path
        self.seen = set()

    def take(self, key, default=None, required=False):
        self.seen.add(key)
        if key not in self.data:
            if required:
                raise ModelSyntaxError(f"{self.path}: missing required field {key!r}")
            return default
        return self.data[key]

    def finish(self):
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ModelSyntaxError(f"{self.path}: unknown key {unknown[0]!r}")


def _expect(value, types, path, what):
    if not isinstance(value, types):
        raise ModelSyntaxError(f"{path}: {what} has wrong type")
    return value


def _load_pattern(data, path):
    r = _Reader(data, path)
    strategy = r.take("strategy", required=True)
    if strategy not in STRATEGIES:
        raise ModelSyntaxError(f"{path}: unknown strategy tag {strategy!r}")
    spec = PatternSpec(
        strategy=strategy,
        expression=r.take("expression"),
        lexicon_class=r.take("lexiconClass"),
        heuristic_name=r.take("heuristicName"),
        open_class=bool(r.take("open", False)),
        case_sensitive=bool(r.take("caseSensitive", False)),
    )
    r.finish()
    return spec


def _load_probability(data, path):
    r = _Reader(data, path)
    mode = r.take("mode", "default")
    if mode not in PROBABILITY_MODES:
        raise ModelSyntaxError(f"{path}: unknown probability mode {mode!r}")
    presence_raw = r.take("memberPresence", {})
    _expect(presence_raw, dict, path, "memberPresence")
    value = r.take("value")
    if value is not None:
        value = float(_expect(value, (int, float), path, "value"))
    frequency = r.take("frequency")
    if frequency is not None:
        frequency = _expect(frequency, int, path, "frequency")
    spec = ProbabilitySpec(
        mode=mode,
        value=value,
        frequency=frequency,
        evaluator=r.take("evaluator"),
        member_presence={k: float(v) for k, v in presence_raw.items()},
    )
    r.finish()
    return spec


def _load_member(data, path):
    r = _Reader(data, path)
    name = _expect(r.take("name", required=True), str, path, "name")
    target = _expect(r.take("target", required=True), str, path, "target")
    multiplicity = r.take("multiplicity", "one")
    many = False
    min_count = 1
    if multiplicity == "one":
        pass
    elif isinstance(multiplicity, dict) and set(multiplicity) == {"many"}:
        inner = _Reader(multiplicity["many"], f"{path}.multiplicity.many")
        many = True
        min_count = _expect(inner.take("min", 1), int, path, "min")
        inner.finish()
    else:
        raise ModelSyntaxError(f"{path}: unknown multiplicity tag {multiplicity!r}")
    member = MemberDef(
        name=name,
        target=target,
        optional=bool(r.take("optional", False)),
        floating=bool(r.take("floating", False)),
        many=many,
        min_count=min_count,
        reference=bool(r.take("reference", False)),
        reference_form=r.take("referenceForm"),
    )
    r.finish()
    return member


def _load_constraint(data, path):
    r = _Reader(data, path)
    name = _expect(r.take("name", required=True), str, path, "name")
    params = r.take("params", {})
    _expect(params, dict, path, "params")
    spec = ConstraintSpec(name=name, params={k: str(v) for k, v in params.items()})
    r.finish()
    return spec


def _load_element(data, index):
    path = f"elements[{index}]"
    r = _Reader(data, path)
    name = _expect(r.take("name", required=True), str, path, "name")
    kind = r.take("kind", required=True)
    if kind not in KINDS:
        raise ModelSyntaxError(f"{path}: unknown kind tag {kind!r}")
    path = name  # diagnostics and errors below refer to the element by name
    pattern_raw = r.take("pattern")
    members_raw = r.take("members", [])
    variants_raw = r.take("variants", [])
    constraints_raw = r.take("constraints", [])
    probability_raw = r.take("probability")
    r.finish()

    _expect(members_raw, list, path, "members")
    _expect(variants_raw, list, path, "variants")
    _expect(constraints_raw, list, path, "constraints")
    return ElementDef(
        name=name,
        kind=kind,
        pattern=_load_pattern(pattern_raw, f"{path}.pattern") if pattern_raw is not None else None,
        members=tuple(
            _load_member(m, f"{path}.members[{i}]") for i, m in enumerate(members_raw)
        ),
        variants=tuple(_expect(v, str, path, "variant") for v in variants_raw),
        constraints=tuple(
            _load_constraint(c, f"{path}.constraints[{i}]") for i, c in enumerate(constraints_raw)
        ),
        probability=(
            _load_probability(probability_raw, f"{path}.probability")
            if probability_raw is not None
            else DEFAULT_PROBABILITY
        ),
    )


def load_model(document: str) -> LanguageModel:
    """Parse a model document into a :class:`LanguageModel`.

    Loading is purely structural: unknown tags, duplicate fields and type
    errors are rejected here, while semantic problems (dangling targets,
    bad probabilities, ...) are left to :func:`validate_model`.
    """
    try:
        raw = json.loads(document, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    r = _Reader(raw, "$")
    name = _expect(r.take("name", required=True), str, "$", "name")
    start = _expect(r.take("start", required=True), str, "$", "start")
    elements_raw = _expect(r.take("elements", required=True), list, "$", "elements")
    r.finish()
    elements = tuple(_load_element(e, i) for i, e in enumerate(elements_raw))
    return LanguageModel(name=name, start=start, elements=elements)


def load_model_file(path) -> LanguageModel:
    with io.open(path, "r", encoding="utf-8") as handle:
        return load_model(handle.read())


# ---------------------------------------------------------------------------
# Serialization


def _pattern_to_json(p: PatternSpec) -> dict:
    out = {"strategy": p.strategy}
    if p.expression is not None:
        out["expression"] = p.expression
    if p.lexicon_class is not None:
        out["lexiconClass"] = p.lexicon_class
    if p.heuristic_name is not None:
        out["heuristicName"] = p.heuristic_name
    if p.open_class:
        out["open"] = True
    if p.case_sensitive:
        out["caseSensitive"] = True
    return out


def _probability_to_json(p: ProbabilitySpec) -> dict:
    out = {"mode": p.mode}
    if p.value is not None:
        out["value"] = p.value
    if p.frequency is not None:
        out["frequency"] = p.frequency
    if p.evaluator is not None:
        out["evaluator"] = p.evaluator
    if p.member_presence:
        out["memberPresence"] = dict(p.member_presence)
    return out


def _member_to_json(m: MemberDef) -> dict:
    out = {"name": m.name, "target": m.target}
    if m.optional:
        out["optional"] = True
    if m.floating:
        out["floating"] = True
    if m.many:
        out["multiplicity"] = {"many": {"min": m.min_count}}
    if m.reference:
        out["reference"] = True
    if m.reference_form is not None:
        out["referenceForm"] = m.reference_form
    return out


def model_to_json(model: LanguageModel) -> dict:
    elements = []
    for e in model.elements:
        entry = {"name": e.name, "kind": e.kind}
        if e.pattern is not None:
            entry["pattern"] = _pattern_to_json(e.pattern)
        if e.members:
            entry["members"] = [_member_to_json(m) for m in e.members]
        if e.variants:
            entry["variants"] = list(e.variants)
        if e.constraints:
            entry["constraints"] = [
                {"name": c.name, "params": dict(c.params)} if c.params else {"name": c.name}
                for c in e.constraints
            ]
        if e.probability != DEFAULT_PROBABILITY:
            entry["probability"] = _probability_to_json(e.probability)
        elements.append(entry)
    return {"name": model.name, "start": model.start, "elements": elements}


def serialize_model(model: LanguageModel) -> str:
    """Inverse of :func:`load_model` on valid models (field-for-field)."""
    return json.dumps(model_to_json(model), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Validation


def _alternative_parents(model: LanguageModel) -> dict[str, list[str]]:
    parents: dict[str, list[str]] = {}
    for e in model.elements:
        if e.kind == "alternative":
            for v in e.variants:
                parents.setdefault(v, []).append(e.name)
    return parents


def validate_model(model: LanguageModel) -> list[Diagnostic]:
    """Check every model invariant; problems are returned, never raised.

    Diagnostics come out in element declaration order and are deterministic.
    """
    diags: list[Diagnostic] = []
    err = lambda path, msg: diags.append(Diagnostic("error", path, msg))
    warn = lambda path, msg: diags.append(Diagnostic("warning", path, msg))
    note = lambda path, msg: diags.append(Diagnostic("notice", path, msg))

    names = [e.name for e in model.elements]
    known = set()
    for n in names:
        if n in known:
            err(n, "duplicate element name")
        known.add(n)

    if model.start not in known:
        err("start", f"start element {model.start!r} is not declared")

    parents = _alternative_parents(model)

    for e in model.elements:
        # kind-specific field population
        if e.kind == "lexical":
            if e.pattern is None:
                err(e.name, "lexical element needs a pattern")
            if e.members:
                err(e.name, "lexical element must not declare members")
            if e.variants:
                err(e.name, "lexical element must not declare variants")
        elif e.kind == "composition":
            if e.pattern is not None:
                err(e.name, "composition element must not declare a pattern")
            if e.variants:
                err(e.name, "composition element must not declare variants")
            if not e.members:
                err(e.name, "composition element needs at least one member")
        elif e.kind == "alternative":
            if e.pattern is not None:
                err(e.name, "alternative element must not declare a pattern")
            if e.members:
                err(e.name, "alternative element must not declare members")
            if not e.variants:
                err(e.name, "alternative element needs at least one variant")
            for v in e.variants:
                if v not in known:
                    err(e.name, f"variant {v!r} is not declared")

        if e.pattern is not None:
            p = e.pattern
            path = f"{e.name}.pattern"
            if p.strategy == "regex":
                if not p.expression:
                    err(path, "regex strategy needs an expression")
                else:
                    import re

                    try:
                        re.compile(p.expression)
                    except re.error as exc:
                        err(path, f"regex does not compile: {exc}")
            elif p.strategy == "lexicon" and not p.lexicon_class:
                err(path, "lexicon strategy needs a lexiconClass")
            elif p.strategy == "heuristic" and not p.heuristic_name:
                err(path, "heuristic strategy needs a heuristicName")

        member_names = set()
        for m in e.members:
            path = f"{e.name}.members.{m.name}"
            if m.name in member_names:
                err(path, "duplicate member name")
            member_names.add(m.name)
            if m.target not in known:
                err(path, f"target {m.target!r} is not declared")
            if m.many and m.min_count < 0:
                err(path, "many multiplicity needs a non-negative min")
            if m.reference:
                if m.reference_form is None:
                    err(path, "reference member needs a referenceForm")
                elif m.reference_form not in known:
                    err(path, f"referenceForm {m.reference_form!r} is not declared")
            elif m.reference_form is not None:
                err(path, "referenceForm is only meaningful on reference members")

        prob = e.probability
        path = f"{e.name}.probability"
        if prob.mode == "value":
            if prob.value is None:
                err(f"{path}.value", "value mode needs a value")
            elif not 0.0 <= prob.value <= 1.0:
                err(f"{path}.value", "probability out of range [0,1]")
        elif prob.mode == "frequency":
            if prob.frequency is None:
                err(f"{path}.frequency", "frequency mode needs a frequency")
            elif prob.frequency < 0:
                err(f"{path}.frequency", "frequency must be non-negative")
            if e.kind == "lexical":
                warn(path, "frequencies of lexical elements live in the lexicon; this one is ignored")
            elif len(parents.get(e.name, [])) > 1:
                warn(
                    path,
                    "frequency normalizes within an alternative, but this element "
                    "has several alternative parents; the first declared one is used",
                )
            elif not parents.get(e.name):
                warn(path, "frequency on an element that is no alternative variant scores as 1.0")
        elif prob.mode == "evaluator":
            if not prob.evaluator:
                err(f"{path}.evaluator", "evaluator mode needs an evaluator name")
        if prob.mode in ("value", "frequency"):
            optional_members = {m.name for m in e.members if m.effectively_optional}
            for key, val in prob.member_presence.items():
                ppath = f"{path}.memberPresence.{key}"
                if key not in {m.name for m in e.members}:
                    err(ppath, f"memberPresence names unknown member {key!r}")
                elif key not in optional_members:
                    err(ppath, f"memberPresence applies to optional members only, {key!r} is required")
                if not 0.0 <= val <= 1.0:
                    err(ppath, "presence probability out of range [0,1]")
            for name in sorted(optional_members - set(prob.member_presence)):
                note(
                    f"{path}.memberPresence.{name}",
                    "optional member without a declared presence probability; 0.5 is assumed",
                )
        elif prob.member_presence:
            note(path, "memberPresence has no effect outside value/frequency modes")
        if e.kind == "alternative" and prob.mode in ("value", "frequency"):
            note(path, "probability on an alternative element has no effect; annotate its variants")

    # nullability: an element that can match empty input breaks the span
    # discipline of tokens, instances and forest packing, so reject it
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for e in model.elements:
            if e.name in nullable:
                continue
            if e.kind == "alternative":
                is_nullable = any(v in nullable for v in e.variants)
            elif e.kind == "composition" and e.members:
                is_nullable = all(
                    m.effectively_optional
                    or (m.reference_form if m.reference else m.target) in nullable
                    for m in e.members
                )
            else:
                is_nullable = False
            if is_nullable:
                nullable.add(e.name)
                changed = True
    for e in model.elements:
        if e.name in nullable:
            err(e.name, "element can match empty input, which the parse engine rejects")

    # reachability from start
    if model.start in known:
        reachable: set[str] = set()
        stack = [model.start]
        while stack:
            cur = stack.pop()
            if cur in reachable:
                continue
            reachable.add(cur)
            edef = model.get(cur)
            if edef is None:
                continue
            for m in edef.members:
                if m.target in known:
                    stack.append(m.target)
                if m.reference_form in known:
                    stack.append(m.reference_form)
            stack.extend(v for v in edef.variants if v in known)
        for e in model.elements:
            if e.name not in reachable:
                warn(e.name, "element is not reachable from the start element")

    return diags


def has_errors(diagnostics) -> bool:
    return any(d.severity == "error" for d in diagnostics)


# ---------------------------------------------------------------------------
# Grammar compilation


@dataclass(frozen=True)
class Slot:
    """A positional member position in a production."""

    member: str
    symbol: str
    optional: bool = False
    many: bool = False
    min_count: int = 1
    reference: bool = False

    @property
    def rep_cap(self) -> int:
        """Repetition counter cap for many slots: tracks presence and
        min-count satisfaction, saturating beyond."""
        return max(self.min_count, 1) if self.many else 0


@dataclass(frozen=True)
class FloatSlot:
    """A floating member: may be consumed at any top-level gap, including
    between repetitions of a many member."""

    member: str
    symbol: str
    optional: bool = False
    many: bool = False
    min_count: int = 1
    reference: bool = False

    @property
    def count_cap(self) -> int:
        return max(self.min_count, 1) if self.many else 1

    def may_consume(self, count: int) -> bool:
        return self.many or count < 1

    def satisfied(self, count: int) -> bool:
        if count == 0:
            return self.optional or (self.many and self.min_count == 0)
        if self.many:
            return count >= min(self.min_count, self.count_cap)
        return True


@dataclass(frozen=True)
class Production:
    pid: int
    lhs: str
    slots: tuple[Slot, ...] = ()
    floats: tuple[FloatSlot, ...] = ()
    variant_of: str | None = None  # set on unit productions of alternatives
    member_order: tuple[str, ...] = ()  # declared member order, for instance layout


@dataclass(frozen=True)
class Grammar:
    model: LanguageModel
    start: str
    productions: tuple[Production, ...]
    lexical_elements: frozenset[str]
    element_values: dict[str, float]  # resolved linear P(E) for value/frequency modes

    def productions_of(self, lhs: str) -> tuple[Production, ...]:
        cache = self.__dict__.get("_by_lhs")
        if cache is None:
            cache = {}
            for p in self.productions:
                cache.setdefault(p.lhs, []).append(p)
            cache = {k: tuple(v) for k, v in cache.items()}
            object.__setattr__(self, "_by_lhs", cache)
        return cache.get(lhs, ())


def resolved_element_values(model: LanguageModel) -> dict[str, float]:
    """Linear P(E) per element for value/frequency modes.

    Frequencies normalize within the sibling set of the first alternative
    the element is a variant of; this is the standard PCFG reading of
    frequency annotations.
    """
    parents = _alternative_parents(model)
    values: dict[str, float] = {}
    for e in model.elements:
        prob = e.probability
        if prob.mode == "value" and prob.value is not None:
            values[e.name] = float(prob.value)
        elif prob.mode == "frequency" and prob.frequency is not None:
            if e.kind == "lexical" or not parents.get(e.name):
                values[e.name] = 1.0
                continue
            parent = model.element(parents[e.name][0])
            total = 0
            for sibling in parent.variants:
                sdef = model.get(sibling)
                if sdef is not None and sdef.probability.mode == "frequency":
                    total += sdef.probability.frequency or 0
            values[e.name] = (prob.frequency / total) if total > 0 else 0.0
    return values


def compile_grammar(model: LanguageModel, constraints=None, evaluators=None) -> Grammar:
    """Derive the internal grammar from a validated model.

    Composition elements become one production each, with positional slots in
    declared member order and floating members set aside in a float pool.
    Alternative elements become one unit production per variant.  Reference
    members compile to a slot over the member's reference form; the actual
    linking is the reference resolver's job.

    Raises :class:`ModelValidationError` when the model has error
    diagnostics, and :class:`RegistryError` for constraint/evaluator names
    missing from the given registries (pass ``None`` to skip that check).
    """
    diags = [d for d in validate_model(model) if d.severity == "error"]
    if diags:
        raise ModelValidationError(diags)

    if constraints is not None:
        for e in model.elements:
            for c in e.constraints:
                if c.name not in constraints:
                    raise RegistryError(f"{e.name}: constraint {c.name!r} is not registered")
    if evaluators is not None:
        for e in model.elements:
            if e.probability.mode == "evaluator" and e.probability.evaluator not in evaluators:
                raise RegistryError(
                    f"{e.name}: evaluator {e.probability.evaluator!r} is not registered"
                )

    productions: list[Production] = []
    for e in model.elements:
        if e.kind == "composition":
            slots = []
            floats = []
            for m in e.members:
                symbol = m.reference_form if m.reference else m.target
                if m.floating:
                    floats.append(
                        FloatSlot(
                            member=m.name,
                            symbol=symbol,
                            optional=m.optional,
                            many=m.many,
                            min_count=m.min_count if m.many else 1,
                            reference=m.reference,
                        )
                    )
                else:
                    slots.append(
                        Slot(
                            member=m.name,
                            symbol=symbol,
                            optional=m.optional,
                            many=m.many,
                            min_count=m.min_count if m.many else 1,
                            reference=m.reference,
                        )
                    )
            productions.append(
                Production(
                    pid=len(productions),
                    lhs=e.name,
                    slots=tuple(slots),
                    floats=tuple(floats),
                    member_order=tuple(m.name for m in e.members),
                )
            )
        elif e.kind == "alternative":
            for v in e.variants:
                productions.append(
                    Production(
                        pid=len(productions),
                        lhs=e.name,
                        slots=(Slot(member="<variant>", symbol=v),),
                        variant_of=v,
                    )
                )

    return Grammar(
        model=model,
        start=model.start,
        productions=tuple(productions),
        lexical_elements=frozenset(e.name for e in model.elements if e.kind == "lexical"),
        element_values=resolved_element_values(model),
    )


__all__ = [
    "PatternSpec",
    "ProbabilitySpec",
    "MemberDef",
    "ConstraintSpec",
    "ElementDef",
    "LanguageModel",
    "Diagnostic",
    "Slot",
    "FloatSlot",
    "Production",
    "Grammar",
    "load_model",
    "load_model_file",
    "serialize_model",
    "model_to_json",
    "validate_model",
    "has_errors",
    "compile_grammar",
    "resolved_element_values",
]
