"""Unpacking parse trees from the forest in best-first order.

The fast path is a lazy k-best enumeration over the packed forest: every
node keeps a stream of its derivations in non-increasing score order, produced by
a heap over (alternative, child-rank-vector) frontiers.  It applies whenever
every probability in the model is compositional (value/frequency/default
modes).  Custom evaluators may inspect the whole candidate graph, so models
that use them fall back to exhaustive enumeration plus rescoring, behind a
combinatorial guard.
"""

from __future__ import annotations

import heapq
import math

from ..errors import EnumerationOverflowError
from ..lexgraph import Span
from ..model import ElementDef
from ..trees import ElementInstance, ParseGraphCandidate
from ..uncertainty import (
    PRESENCE_DEFAULT,
    ValuationAlgebra,
    collect_factors,
    graph_score,
    rank,
)
from .forest import Alternative, ForestNode, ParseForest

SLOW_PATH_GUARD = 100_000


def instance_local_value(edef: ElementDef, present: frozenset[str], element_values) -> float:
    """The compositional instance factor: P(E) times one presence term per
    optional member (declared presence when observed, complement when not)."""
    mode = edef.probability.mode
    if mode == "default":
        return 1.0
    if mode == "evaluator":
        raise ValueError(f"{edef.name}: evaluator probabilities are not compositional")
    base = element_values.get(edef.name, 1.0)
    declared = edef.probability.member_presence
    for m in edef.members:
        if not m.effectively_optional:
            continue
        p = declared.get(m.name, PRESENCE_DEFAULT)
        base *= p if m.name in present else 1.0 - p
    return base


class _Acc:
    """Monotone accumulator for one algebra: log-sums for the probabilistic
    algebra, running minima for the possibilistic one."""

    def __init__(self, algebra: ValuationAlgebra):
        if algebra.id == "probabilistic":
            self.zero = 0.0
            self.lift = lambda v: math.log(v) if v > 0.0 else -math.inf
            self.add = lambda a, b: a + b
        else:
            self.zero = algebra.identity.value
            self.lift = lambda v: v
            self.add = min


class _Derivation:
    __slots__ = ("acc", "serial", "dtree")

    def __init__(self, acc, serial, dtree):
        self.acc = acc
        self.serial = serial
        self.dtree = dtree


class _NodeEnum:
    """Best-first stream of one node's derivations."""

    def __init__(self, node: ForestNode, ctx: "_EnumContext"):
        self.node = node
        self.ctx = ctx
        self.out: list[_Derivation] = []
        self.heap: list = []
        self.seen: set = set()
        self.exhausted = False
        if node.is_leaf:
            acc = ctx.leaf_acc(node)
            self.out.append(_Derivation(acc, f"t{node.token.id}", ("t", node)))
            self.exhausted = True
        else:
            for ai in range(len(node.alternatives)):
                self._push(ai, (0,) * len(node.alternatives[ai].children))

    def _push(self, ai: int, ranks: tuple[int, ...]):
        if (ai, ranks) in self.seen:
            return
        self.seen.add((ai, ranks))
        alt = self.node.alternatives[ai]
        child_derivs = []
        for child, r in zip(alt.children, ranks):
            d = self.ctx.enum(child).get(r)
            if d is None:
                return
            child_derivs.append(d)
        acc = self.ctx.alt_acc(self.node, ai)
        add = self.ctx.acc.add
        for d in child_derivs:
            acc = add(acc, d.acc)
        serial = "(" + str(alt.production.pid) + ":" + ",".join(d.serial for d in child_derivs) + ")"
        dtree = ("c", self.node, ai, tuple(d.dtree for d in child_derivs))
        heapq.heappush(self.heap, (-acc, serial, ai, ranks, dtree))

    def get(self, i: int) -> _Derivation | None:
        while len(self.out) <= i and self.heap:
            neg_acc, serial, ai, ranks, dtree = heapq.heappop(self.heap)
            self.out.append(_Derivation(-neg_acc, serial, dtree))
            for pos in range(len(ranks)):
                nxt = list(ranks)
                nxt[pos] += 1
                self._push(ai, tuple(nxt))
        return self.out[i] if i < len(self.out) else None


class _EnumContext:
    def __init__(self, forest: ParseForest, algebra: ValuationAlgebra):
        self.forest = forest
        self.model = forest.grammar.model
        self.element_values = forest.grammar.element_values
        self.algebra = algebra
        self.acc = _Acc(algebra)
        self._enums: dict[int, _NodeEnum] = {}
        self._alt_accs: dict[tuple[int, int], float] = {}

    def enum(self, node: ForestNode) -> _NodeEnum:
        e = self._enums.get(id(node))
        if e is None:
            e = _NodeEnum(node, self)
            self._enums[id(node)] = e
        return e

    def leaf_acc(self, node: ForestNode) -> float:
        edef = self.model.element(node.element)
        value = instance_local_value(edef, frozenset(), self.element_values)
        lift = self.acc.lift
        return self.acc.add(lift(node.token.pos_prob), lift(value))

    def alt_acc(self, node: ForestNode, ai: int) -> float:
        key = (id(node), ai)
        got = self._alt_accs.get(key)
        if got is None:
            alt = node.alternatives[ai]
            if alt.production.variant_of is not None:
                got = self.acc.zero  # unit productions add no instance factor
            else:
                edef = self.model.element(node.element)
                got = self.acc.lift(
                    instance_local_value(edef, alt.present_members(), self.element_values)
                )
            self._alt_accs[key] = got
        return got


# ---------------------------------------------------------------------------
# dtree realization


def _realize(dtree) -> ElementInstance:
    if dtree[0] == "t":
        node = dtree[1]
        return ElementInstance(element=node.element, span=node.span, token=node.token)
    _, node, ai, children = dtree
    alt: Alternative = node.alternatives[ai]
    if alt.production.variant_of is not None:
        return _realize(children[0])
    many_members = {s.member for s in alt.production.slots if s.many}
    many_members.update(f.member for f in alt.production.floats if f.many)
    members: dict[str, object] = {
        name: ([] if name in many_members else None)
        for name in alt.production.member_order
    }
    for child_dtree, member in zip(children, alt.child_member):
        inst = _realize(child_dtree)
        if isinstance(members.get(member), list):
            members[member].append(inst)
        else:
            members[member] = inst
    return ElementInstance(element=node.element, span=node.span, members=members)


def _candidate(dtree, forest: ParseForest, algebra, evaluators) -> ParseGraphCandidate:
    root = _realize(dtree)
    cand = ParseGraphCandidate(root=root, text=forest.text, score=algebra.identity)
    model = forest.grammar.model
    cand.factors = collect_factors(
        cand, model, algebra, evaluators, forest.grammar.element_values
    )
    cand.score = algebra.fold(f.value for f in cand.factors)
    return cand


def _model_needs_slow_path(model) -> bool:
    return any(e.probability.mode == "evaluator" for e in model.elements)


def _dedup(candidates) -> list[ParseGraphCandidate]:
    seen: set[str] = set()
    out = []
    for cand in candidates:
        key = cand.canonical_key()
        if key not in seen:
            seen.add(key)
            out.append(cand)
    return out


def _all_dtrees(node: ForestNode, memo) -> list:
    if node.is_leaf:
        return [("t", node)]
    got = memo.get(id(node))
    if got is None:
        got = []
        for ai, alt in enumerate(node.alternatives):
            child_lists = [_all_dtrees(c, memo) for c in alt.children]
            stack = [((), 0)]
            while stack:
                chosen, idx = stack.pop()
                if idx == len(child_lists):
                    got.append(("c", node, ai, chosen))
                    continue
                for option in reversed(child_lists[idx]):
                    stack.append((chosen + (option,), idx + 1))
        memo[id(node)] = got
    return got


def enumerate_graphs(
    forest: ParseForest,
    k: int,
    algebra: ValuationAlgebra,
    evaluators=None,
) -> list[ParseGraphCandidate]:
    """At most ``k`` complete parse candidates in non-increasing score order.

    With ``k`` at least the total tree count, every tree comes out.  Ties are
    broken by the canonical serialization, making the order total and stable.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if not forest.roots:
        raise ValueError("forest has no roots")

    if _model_needs_slow_path(forest.grammar.model):
        total = forest.tree_count()
        if total > SLOW_PATH_GUARD:
            raise EnumerationOverflowError(
                f"{total} candidate trees exceed the evaluator-mode guard of {SLOW_PATH_GUARD}"
            )
        memo: dict = {}
        dtrees = [d for root in forest.roots for d in _all_dtrees(root, memo)]
        candidates = _dedup(_candidate(d, forest, algebra, evaluators) for d in dtrees)
        return rank(candidates, algebra)[:k]

    ctx = _EnumContext(forest, algebra)
    streams = []
    for ri, root in enumerate(forest.roots):
        d = ctx.enum(root).get(0)
        if d is not None:
            streams.append((-d.acc, d.serial, ri, 0, d))
    heapq.heapify(streams)
    # distinct derivations may collapse to one instance tree when alternative
    # chains form a diamond, so dedup on the canonical tree serialization
    picked = []
    seen_keys: set[str] = set()
    while streams and len(picked) < k:
        neg_acc, serial, ri, rank_i, d = heapq.heappop(streams)
        cand = _candidate(d.dtree, forest, algebra, evaluators)
        if cand.canonical_key() not in seen_keys:
            seen_keys.add(cand.canonical_key())
            picked.append(cand)
        nxt = ctx.enum(forest.roots[ri]).get(rank_i + 1)
        if nxt is not None:
            heapq.heappush(streams, (-nxt.acc, nxt.serial, ri, rank_i + 1, nxt))
    return rank(picked, algebra)
