"""Reference resolution: from parse trees to abstract syntax graphs.

Reference members parse as their declared reference form (a pronoun where a
noun is referenced, say); afterwards the resolver enumerates every
type-compatible binding of each pending reference, classifies the edges as
anaphoric, cataphoric or recursive, scores them, and folds the edge scores
into the tree score.  The resulting tree-plus-edges structure is a graph,
not a tree, which is the whole point.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .errors import EnumerationOverflowError, GraphParseError
from .lexgraph import Span
from .model import LanguageModel
from .trees import ElementInstance, ParseGraphCandidate, PendingReference
from .uncertainty import (
    EvaluationContext,
    Factor,
    Score,
    ValuationAlgebra,
    rank,
    score_to_json,
)

ASSIGNMENT_GUARD = 10_000


@dataclass(frozen=True)
class ReferenceEdge:
    from_instance: int
    member: str
    to_instance: int | None  # None = explicitly unresolved
    kind: str  # anaphoric | cataphoric | recursive | unresolved
    score: Score

    def to_json(self) -> dict:
        return {
            "from": [self.from_instance, self.member],
            "to": self.to_instance,
            "kind": self.kind,
            "score": self.score.value,
        }


@dataclass
class AbstractSyntaxGraph:
    tree: ParseGraphCandidate
    references: list[ReferenceEdge]
    score: Score
    factors: list[Factor] = field(default_factory=list)

    @property
    def text(self) -> str:
        return self.tree.text

    def canonical_key(self) -> str:
        key = self.__dict__.get("_canonical")
        if key is None:
            key = self.tree.canonical_key() + "|" + json.dumps(
                [e.to_json() for e in self.references], sort_keys=True
            )
            self.__dict__["_canonical"] = key
        return key

    def to_json(self, explain: bool = False) -> dict:
        out = {
            "tree": self.tree.root.to_json(),
            "references": [e.to_json() for e in self.references],
            "score": score_to_json(self.score, self.factors if explain else None),
        }
        return out

    def to_dot(self) -> str:
        base = self.tree.to_dot().rstrip()[:-1].rstrip()  # reopen the digraph
        lines = [base]
        for edge in self.references:
            if edge.to_instance is None:
                continue
            lines.append(
                f'  n{edge.from_instance} -> n{edge.to_instance} '
                f'[style=dashed,label="{edge.kind}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class ReferenceContext:
    """Context handed to reference scorers for one potential binding."""

    candidate: ParseGraphCandidate
    reference: ElementInstance
    member: str
    referent: ElementInstance | None
    context_graph: "ContextGraph | None"
    kind: str


@dataclass
class ContextGraph:
    """Smallest subtree containing both the reference and the referent:
    the two spines down from their lowest common ancestor plus both complete
    instances."""

    root: ElementInstance
    instances: list[ElementInstance]

    @property
    def instance_ids(self) -> frozenset[int]:
        return frozenset(i.instance_id for i in self.instances)


def classify(reference: ElementInstance, referent: ElementInstance) -> str:
    """anaphoric: referent entirely before the reference; cataphoric: after
    (or dangling forward); recursive: the referent's span contains the
    reference (ancestor or self)."""
    rs, fs = reference.span, referent.span
    if fs.start <= rs.start and rs.end <= fs.end:
        return "recursive"
    if fs.end <= rs.start:
        return "anaphoric"
    if rs.end <= fs.start:
        return "cataphoric"
    if rs.start <= fs.start and fs.end <= rs.end:
        # reference strictly containing the referent counts as forward-looking
        return "cataphoric"
    raise GraphParseError(
        f"overlapping non-nested spans {rs} / {fs}: not a well-formed tree pair"
    )


def lowest_common_ancestor(reference: ElementInstance, referent: ElementInstance) -> ElementInstance:
    a = list(reversed([reference] + list(reference.ancestors())))
    b = list(reversed([referent] + list(referent.ancestors())))
    lca = None
    for x, y in zip(a, b):
        if x is y:
            lca = x
        else:
            break
    if lca is None:
        raise GraphParseError("instances do not share a tree")
    return lca


def context_graph(
    candidate: ParseGraphCandidate,
    reference: ElementInstance,
    referent: ElementInstance,
) -> ContextGraph:
    """The paper-style evaluation context: both spines from the lowest common
    ancestor plus the full subtrees of both endpoints."""
    for inst in (reference, referent):
        if candidate.instances[inst.instance_id] is not inst:
            raise GraphParseError("instance does not belong to this candidate")
    lca = lowest_common_ancestor(reference, referent)
    keep: dict[int, ElementInstance] = {}
    for endpoint in (reference, referent):
        node = endpoint
        while node is not None:
            keep[node.instance_id] = node
            if node is lca:
                break
            node = node.parent
        for sub in endpoint.walk():
            keep[sub.instance_id] = sub
    ordered = [candidate.instances[i] for i in sorted(keep)]
    return ContextGraph(root=lca, instances=ordered)


def reference_metrics(
    reference: ElementInstance, referent: ElementInstance
) -> tuple[int, int, str]:
    """(signed character-offset gap, spine length through the LCA, kind)."""
    kind = classify(reference, referent)
    token_distance = referent.span.start - reference.span.start
    lca = lowest_common_ancestor(reference, referent)
    tree_distance = (reference.depth() - lca.depth()) + (referent.depth() - lca.depth())
    return token_distance, tree_distance, kind


# ---------------------------------------------------------------------------
# Scorers


class DistanceDecayScorer:
    """Default reference scorer: exponential decay over input distance.

    score = 0.5 ** (|gap| / D) with D = mean token length * 5; unresolved
    references take a fixed penalty.  Only monotonicity in distance matters
    to the shipped ranking; swap in your own scorer through the registry.
    """

    def __init__(self, unresolved: float = 0.1, halflife_tokens: float = 5.0):
        self.unresolved = unresolved
        self.halflife_tokens = halflife_tokens

    def __call__(self, ctx: ReferenceContext) -> float:
        if ctx.referent is None:
            return self.unresolved
        lengths = [
            len(i.token.lexeme) for i in ctx.candidate.instances if i.token is not None
        ]
        mean_len = sum(lengths) / len(lengths) if lengths else 1.0
        halflife = max(mean_len * self.halflife_tokens, 1.0)
        gap = abs(ctx.referent.span.start - ctx.reference.span.start)
        return 0.5 ** (gap / halflife)


class IdentityScorer:
    """Scores every edge (resolved or not) with the algebra identity; leaves
    tree ranking untouched."""

    def __call__(self, ctx: ReferenceContext) -> float:
        return 1.0


# ---------------------------------------------------------------------------
# Resolution


def pending_references(candidate: ParseGraphCandidate, model: LanguageModel) -> list[PendingReference]:
    out: list[PendingReference] = []
    for inst in candidate.instances:
        edef = model.get(inst.element)
        if edef is None:
            continue
        for m in edef.members:
            if not m.reference:
                continue
            value = inst.members.get(m.name)
            forms = value if isinstance(value, list) else ([value] if value is not None else [])
            for form in forms:
                out.append(PendingReference(owner=inst, member=m.name, form=form, target=m.target))
    return out


def compatible_targets(
    candidate: ParseGraphCandidate, model: LanguageModel, ref: PendingReference
) -> list[ElementInstance]:
    allowed = model.variant_closure(ref.target)
    return [
        inst
        for inst in candidate.instances
        if inst.element in allowed and inst is not ref.owner
    ]


def resolve(
    candidate: ParseGraphCandidate,
    model: LanguageModel,
    algebra: ValuationAlgebra,
    scorer=None,
    assignment_guard: int = ASSIGNMENT_GUARD,
) -> list[AbstractSyntaxGraph]:
    """Every assignment of the candidate's pending references to
    type-compatible instances, as scored syntax graphs, best first.

    A reference with no compatible target gets the explicit unresolved
    marker; a reference whose member is optional may also stay unresolved.
    The output size is the product of per-reference option counts, guarded
    against combinatorial blowup.
    """
    if scorer is None:
        scorer = DistanceDecayScorer()
    refs = pending_references(candidate, model)

    option_lists: list[list[ElementInstance | None]] = []
    total = 1
    for ref in refs:
        targets = compatible_targets(candidate, model, ref)
        member_def = next(
            m for m in model.element(ref.owner.element).members if m.name == ref.member
        )
        options: list[ElementInstance | None] = list(targets)
        if not targets or member_def.optional:
            options.append(None)
        option_lists.append(options)
        total *= len(options)
        if total > assignment_guard:
            raise EnumerationOverflowError(
                f"{total}+ reference assignments exceed the guard of {assignment_guard}"
            )

    graphs: list[AbstractSyntaxGraph] = []
    for assignment in itertools.product(*option_lists):
        edges: list[ReferenceEdge] = []
        for ref, target in zip(refs, assignment):
            if target is None:
                ctx = ReferenceContext(candidate, ref.owner, ref.member, None, None, "unresolved")
                value = scorer(ctx)
                edges.append(
                    ReferenceEdge(ref.owner.instance_id, ref.member, None, "unresolved",
                                  algebra.score(value))
                )
            else:
                kind = classify(ref.owner, target)
                cg = context_graph(candidate, ref.owner, target)
                ctx = ReferenceContext(candidate, ref.owner, ref.member, target, cg, kind)
                value = scorer(ctx)
                edges.append(
                    ReferenceEdge(ref.owner.instance_id, ref.member, target.instance_id,
                                  kind, algebra.score(value))
                )
        graph = AbstractSyntaxGraph(tree=candidate, references=edges, score=algebra.identity)
        graph.factors = list(candidate.factors) + [
            Factor("reference", i, e.score.value) for i, e in enumerate(edges)
        ]
        graph.score = algebra.fold(f.value for f in graph.factors)
        graphs.append(graph)
    return rank(graphs, algebra)


__all__ = [
    "ReferenceEdge",
    "AbstractSyntaxGraph",
    "ReferenceContext",
    "ContextGraph",
    "classify",
    "context_graph",
    "lowest_common_ancestor",
    "reference_metrics",
    "pending_references",
    "compatible_targets",
    "resolve",
    "DistanceDecayScorer",
    "IdentityScorer",
    "ASSIGNMENT_GUARD",
]
