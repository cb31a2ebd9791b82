"""Uncertainty representation and scoring.

Scores live in a valuation algebra: a value domain with an associative,
commutative combine operator, an identity, a total order, and optional casts
into other algebras.  Two algebras ship by default:

* ``probabilistic`` — combine is multiplication over [0,1], identity 1.
  Folds run in log space so long products do not underflow.
* ``possibilistic`` — combine is minimum over [0,1], identity 1.

A parse candidate's score is the combination of one factor per element
instance (the element probability given its observed optional members), one
factor per lexical token (the tagger's P(element|lexeme)), and, for resolved
syntax graphs, one factor per reference edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import AlgebraError, RegistryError
from .model import ElementDef, LanguageModel

PRESENCE_DEFAULT = 0.5  # maximum-entropy presence for undeclared optional members


@dataclass(frozen=True)
class Score:
    """A value in some algebra's domain.

    ``value`` is always linear space (what exports show).  The probabilistic
    algebra also carries ``log_value`` so that ordering survives products too
    long for linear floats; it is internal and never serialized.
    """

    algebra: str
    value: float
    log_value: float | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Factor:
    """One term of a score combination, traceable to its source."""

    kind: str  # "instance" | "token" | "reference"
    ref: int
    value: float

    def to_json(self) -> dict:
        key = {"instance": "instanceId", "token": "tokenId", "reference": "referenceId"}[self.kind]
        return {key: self.ref, "value": self.value}


class ValuationAlgebra:
    """Base class; subclasses define combine/fold/order over [lo, hi]."""

    id = "abstract"
    lo = 0.0
    hi = 1.0

    def __init__(self):
        self.identity = Score(self.id, self.identity_value())
        self.casts = {}

    def identity_value(self) -> float:
        raise NotImplementedError

    def check(self, value: float) -> float:
        if not (self.lo <= value <= self.hi) or math.isnan(value):
            raise AlgebraError(f"value {value!r} outside {self.id} domain [{self.lo}, {self.hi}]")
        return value

    def score(self, value: float) -> Score:
        return Score(self.id, self.check(float(value)))

    def combine(self, a: Score, b: Score) -> Score:
        if a.algebra != self.id or b.algebra != self.id:
            raise AlgebraError(
                f"cannot combine {a.algebra}/{b.algebra} scores under {self.id}; cast first"
            )
        return Score(self.id, self.combine_values(a.value, b.value))

    def combine_values(self, a: float, b: float) -> float:
        raise NotImplementedError

    def fold(self, values) -> Score:
        """Combine an iterable of linear values; empty folds to identity."""
        raise NotImplementedError

    def sort_key(self, score: Score) -> float:
        """Larger key = better candidate."""
        return score.value

    def cast_to(self, score: Score, target: "ValuationAlgebra") -> Score:
        if target.id == self.id:
            return score
        fn = self.casts.get(target.id)
        if fn is None:
            raise AlgebraError(f"no cast path from {self.id} to {target.id}")
        return target.score(fn(score.value))


class ProbabilisticAlgebra(ValuationAlgebra):
    id = "probabilistic"

    def identity_value(self):
        return 1.0

    def combine_values(self, a, b):
        return a * b

    def fold(self, values):
        # log-space accumulation; exact zeros short through -inf
        total = 0.0
        for v in values:
            self.check(v)
            total += math.log(v) if v > 0.0 else -math.inf
        linear = math.exp(total) if total > -math.inf else 0.0
        return Score(self.id, linear, log_value=total)

    def sort_key(self, score: Score) -> float:
        if score.log_value is not None:
            return score.log_value
        return math.log(score.value) if score.value > 0.0 else -math.inf


class PossibilisticAlgebra(ValuationAlgebra):
    id = "possibilistic"

    def identity_value(self):
        return 1.0

    def combine_values(self, a, b):
        return min(a, b)

    def fold(self, values):
        out = 1.0
        for v in values:
            self.check(v)
            out = min(out, v)
        return Score(self.id, out)


PROBABILISTIC = ProbabilisticAlgebra()
POSSIBILISTIC = PossibilisticAlgebra()
# the canonical embedding: a probability reads as a possibility degree as-is
PROBABILISTIC.casts["possibilistic"] = lambda v: v

ALGEBRAS: dict[str, ValuationAlgebra] = {
    PROBABILISTIC.id: PROBABILISTIC,
    POSSIBILISTIC.id: POSSIBILISTIC,
}


def get_algebra(algebra_id: str) -> ValuationAlgebra:
    try:
        return ALGEBRAS[algebra_id]
    except KeyError:
        raise AlgebraError(f"unknown algebra {algebra_id!r}") from None


def cast(score: Score, target: ValuationAlgebra) -> Score:
    return get_algebra(score.algebra).cast_to(score, target)


# ---------------------------------------------------------------------------
# Evaluation context


@dataclass
class EvaluationContext:
    """Context handed to constraints and custom evaluators.

    For reference evaluations the referenced instance, its parse node and the
    context graph (smallest subtree containing both ends) are populated; for
    plain element evaluations they stay None.
    """

    text: str = ""
    current_graph: object | None = None
    current_symbol: object | None = None
    referenced_instance: object | None = None
    referenced_symbol: object | None = None
    context_graph: object | None = None
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Eq.-level scoring


def _member_present(instance, member) -> bool:
    value = instance.members.get(member.name)
    if isinstance(value, list):
        return len(value) > 0
    return value is not None


def presence_factors(edef: ElementDef, instance) -> list[float]:
    """One factor per optional member: declared presence probability when the
    member was observed, its complement when absent."""
    factors = []
    presence = edef.probability.member_presence
    for m in edef.members:
        if not m.effectively_optional:
            continue
        p = presence.get(m.name, PRESENCE_DEFAULT)
        factors.append(p if _member_present(instance, m) else 1.0 - p)
    return factors


def element_score(
    edef: ElementDef,
    instance,
    ctx: EvaluationContext,
    algebra: ValuationAlgebra,
    evaluators=None,
    value_overrides=None,
) -> Score:
    """Probability of an element given its observed optional members.

    value mode:      P(E) * prod(present P(Mi|E)) * prod(absent 1 - P(Mj|E))
    frequency mode:  same, with P(E) pre-normalized over the sibling variants
                     (pass the compiled grammar's ``element_values`` as
                     ``value_overrides``)
    evaluator mode:  the registered evaluator applied to (instance, ctx)
    default mode:    the algebra identity; unannotated elements never distort
                     a ranking
    """
    prob = edef.probability
    if prob.mode == "default":
        return algebra.identity
    if prob.mode == "evaluator":
        if evaluators is None:
            raise RegistryError(f"{edef.name}: evaluator registry required")
        fn = evaluators.get(prob.evaluator)
        return algebra.score(fn(instance, ctx))
    if prob.mode == "value":
        base = prob.value if value_overrides is None else value_overrides.get(edef.name, prob.value)
    else:  # frequency
        if value_overrides is None or edef.name not in value_overrides:
            raise AlgebraError(
                f"{edef.name}: frequency-mode probabilities need compile-time "
                "normalization; pass the grammar's element_values"
            )
        base = value_overrides[edef.name]
    out = base
    for f in presence_factors(edef, instance):
        out *= f
    return algebra.score(out)


def collect_factors(graph_like, model: LanguageModel, algebra, evaluators=None, value_overrides=None):
    """The full factor list of a candidate: one instance factor per element
    instance, one token factor per lexical token, one reference factor per
    edge (syntax graphs only)."""
    factors: list[Factor] = []
    tree = getattr(graph_like, "tree", graph_like)
    for inst in tree.instances:
        edef = model.element(inst.element)
        ctx = EvaluationContext(text=tree.text, current_graph=graph_like, current_symbol=inst)
        s = element_score(edef, inst, ctx, algebra, evaluators, value_overrides)
        factors.append(Factor("instance", inst.instance_id, s.value))
        if inst.token is not None:
            factors.append(Factor("token", inst.token.id, inst.token.pos_prob))
    for idx, edge in enumerate(getattr(graph_like, "references", ()) or ()):
        factors.append(Factor("reference", idx, edge.score.value))
    return factors


def graph_score(graph_like, model, algebra, evaluators=None, value_overrides=None) -> Score:
    """Combine every factor of a candidate under the algebra (Eq. 1 shape)."""
    factors = collect_factors(graph_like, model, algebra, evaluators, value_overrides)
    return algebra.fold(f.value for f in factors)


def rank(candidates, algebra: ValuationAlgebra) -> list:
    """Sort candidates by score, best first.

    Candidates must expose ``score`` and ``canonical_key()``; equal scores
    fall back to the lexicographically smallest canonical serialization,
    which makes the order total and run-to-run stable.
    """
    resolved = []
    for c in candidates:
        score = c.score
        if score.algebra != algebra.id:
            score = cast(score, algebra)
        resolved.append((-algebra.sort_key(score), c.canonical_key(), c))
    resolved.sort(key=lambda item: (item[0], item[1]))
    return [c for _, _, c in resolved]


def score_to_json(score: Score, factors=None) -> dict:
    out = {"algebra": score.algebra, "value": score.value}
    if factors is not None:
        out["factors"] = [f.to_json() for f in factors]
    return out


__all__ = [
    "Score",
    "Factor",
    "ValuationAlgebra",
    "ProbabilisticAlgebra",
    "PossibilisticAlgebra",
    "PROBABILISTIC",
    "POSSIBILISTIC",
    "ALGEBRAS",
    "get_algebra",
    "cast",
    "EvaluationContext",
    "element_score",
    "presence_factors",
    "collect_factors",
    "graph_score",
    "rank",
    "score_to_json",
    "PRESENCE_DEFAULT",
]
