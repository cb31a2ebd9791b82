"""Shared packed parse forest construction.

The recognizer kernel reports chart items, derivation links and packed
(element, span) completions.  This module walks those links into explicit
per-node alternatives, evaluates element constraints on each completed
derivation (pruning failures before they can reach a parent), and assembles
the :class:`ParseForest` the rest of the pipeline consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import NoParseError, NothingToParseError
from ..lexgraph import LexicalAnalysisGraph, Span, TokenCandidate
from ..model import Grammar, Production
from ..registry import Registry, default_constraints
from .encoding import (
    ADVANCE,
    COMPLETE,
    FLOAT_COMPLETE,
    FLOAT_SCAN,
    SCAN,
    SKIP,
    EncodedGrammar,
    EncodedLattice,
    RecognizeResult,
    encode_grammar,
    encode_lattice,
)
from .kernel import get_kernel


@dataclass
class Alternative:
    """One derivation of a packed node: children in span order plus the
    member each child fills; members absent from ``child_member`` were
    skipped (optional) or matched zero repetitions."""

    production: Production
    children: tuple["ForestNode", ...]
    child_member: tuple[str, ...]

    def key(self):
        return (
            self.production.pid,
            tuple(c.key for c in self.children),
            self.child_member,
        )

    def present_members(self) -> frozenset[str]:
        return frozenset(self.child_member)


@dataclass
class ForestNode:
    element: str
    span: Span
    token: TokenCandidate | None = None
    alternatives: list[Alternative] = field(default_factory=list)
    export_id: int = -1

    @property
    def key(self):
        return (self.element, self.span.start, self.span.end, self.token.id if self.token else -1)

    @property
    def is_leaf(self) -> bool:
        return self.token is not None


@dataclass
class ChildView:
    """What constraints may see of a packed child: element, exact span and
    input slice; never the child's own (possibly ambiguous) derivations."""

    element: str
    span: Span
    lexeme: str


class InstanceView:
    """Completed-instance facade handed to constraints at pruning time."""

    def __init__(self, element: str, span: Span, text: str, members, order):
        self.element = element
        self.span = span
        self.text = text
        self.members = members  # name -> ChildView | list[ChildView] | None
        self._order = order  # (member, ChildView) pairs in span order

    @property
    def lexeme(self) -> str:
        return self.text[self.span.start : self.span.end]

    def member(self, name: str):
        return self.members.get(name)

    def all_children(self):
        return list(self._order)


def check_constraints(view, element_def, registry: Registry) -> bool:
    """Conjunction of the element's constraints over a completed instance."""
    for spec in element_def.constraints:
        fn = registry.get(spec.name)
        if not fn(view, spec.params):
            return False
    return True


@dataclass
class ParseForest:
    text: str
    grammar: Grammar
    nodes: list[ForestNode]
    roots: list[ForestNode]

    def tree_count(self) -> int:
        memo: dict[int, int] = {}

        def count(node: ForestNode) -> int:
            if node.is_leaf:
                return 1
            got = memo.get(id(node))
            if got is None:
                got = 0
                for alt in node.alternatives:
                    ways = 1
                    for child in alt.children:
                        ways *= count(child)
                    got += ways
                memo[id(node)] = got
            return got

        return sum(count(r) for r in self.roots)

    def node_count(self) -> int:
        return len(self.nodes)

    def to_json(self) -> dict:
        nodes = []
        for node in self.nodes:
            entry = {
                "id": node.export_id,
                "element": node.element,
                "start": node.span.start,
                "end": node.span.end,
                "alternatives": [
                    [c.export_id for c in alt.children] for alt in node.alternatives
                ],
            }
            if node.token is not None:
                entry["tokenId"] = node.token.id
                entry["lexeme"] = node.token.lexeme
            nodes.append(entry)
        return {"nodes": nodes, "roots": [r.export_id for r in self.roots]}

    def to_dot(self) -> str:
        lines = ["digraph forest {", "  node [shape=box];"]
        for node in self.nodes:
            shape = "" if node.token is None else ', style="rounded"'
            label = f"{node.element} [{node.span.start},{node.span.end})"
            if node.token is not None:
                label += f"\\n{node.token.lexeme}"
            label = label.replace('"', '\\"')
            lines.append(f'  n{node.export_id} [label="{label}"{shape}];')
        for node in self.nodes:
            for ai, alt in enumerate(node.alternatives):
                if len(node.alternatives) > 1:
                    alt_id = f"n{node.export_id}a{ai}"
                    lines.append(f'  {alt_id} [shape=point,label=""];')
                    lines.append(f"  n{node.export_id} -> {alt_id};")
                    src = alt_id
                else:
                    src = f"n{node.export_id}"
                for child in alt.children:
                    lines.append(f"  {src} -> n{child.export_id};")
        lines.append("}")
        return "\n".join(lines) + "\n"


class _ForestBuilder:
    def __init__(self, text, grammar, graph, enc_g, lattice, result, constraints):
        self.text = text
        self.grammar = grammar
        self.graph = graph
        self.g = enc_g
        self.lat = lattice
        self.result = result
        self.constraints = constraints
        self.productions = grammar.productions
        self.node_memo: dict[int, ForestNode | None] = {}
        self.leaf_memo: dict[int, ForestNode | None] = {}
        self.path_memo: dict[int, list[list[tuple[int, int, int]]]] = {}
        self.in_progress: set[int] = set()

    # -- kernel-id helpers

    def _node_span(self, kid: int) -> Span:
        start = self.lat.col_char[self.result.node_start[kid]]
        end = self.lat.col_raw_end[self.result.node_end[kid]]
        return Span(start, end)

    def token_leaf(self, tid: int) -> ForestNode | None:
        got = self.leaf_memo.get(tid)
        if tid in self.leaf_memo:
            return got
        cand = self.graph.tokens[self.lat.tok_orig[tid]]
        node = ForestNode(element=cand.element, span=cand.span, token=cand)
        edef = self.grammar.model.element(cand.element)
        if edef.constraints:
            view = InstanceView(cand.element, cand.span, self.text, {}, ())
            if not check_constraints(view, edef, self.constraints):
                node = None
        self.leaf_memo[tid] = node
        return node

    def paths(self, item: int) -> list[list[tuple[int, int, int]]]:
        """All chronological action sequences deriving ``item`` from its
        production's initial chart item."""
        got = self.path_memo.get(item)
        if got is not None:
            return got
        links = self.result.links_of(item)
        if not links:
            out = [[]]
        else:
            out = []
            for prev, action, slot, payload in links:
                for prefix in self.paths(prev):
                    out.append(prefix + [(action, slot, payload)])
        self.path_memo[item] = out
        return out

    def build(self, kid: int) -> ForestNode | None:
        got = self.node_memo.get(kid)
        if kid in self.node_memo:
            return got
        if kid in self.in_progress:
            # same-span recursion: derivations that close a cycle would stand
            # for infinitely many trees; only acyclic unfoldings survive
            return None
        self.in_progress.add(kid)
        try:
            node = self._build_inner(kid)
        finally:
            self.in_progress.discard(kid)
        self.node_memo[kid] = node
        return node

    def _build_inner(self, kid: int) -> ForestNode | None:
        span = self._node_span(kid)
        element = self.g.symbol_names[self.result.node_sym[kid]]
        node = ForestNode(element=element, span=span)
        seen = set()
        for item in self.result.node_items[kid]:
            prod = self.productions[self.result.item_prod[item]]
            for path in self.paths(item):
                alt = self._realize_path(prod, path)
                if alt is None:
                    continue
                key = alt.key()
                if key in seen:
                    continue
                seen.add(key)
                node.alternatives.append(alt)
        if not node.alternatives:
            return None
        edef = self.grammar.model.element(element)
        if edef.kind == "composition" and edef.constraints:
            node.alternatives = [
                alt
                for alt in node.alternatives
                if check_constraints(self._view(node, alt), edef, self.constraints)
            ]
            if not node.alternatives:
                return None
        node.alternatives.sort(key=lambda a: a.key())
        return node

    def _realize_path(self, prod: Production, path) -> Alternative | None:
        children: list[ForestNode] = []
        members: list[str] = []
        for action, slot, payload in path:
            if action in (SKIP, ADVANCE):
                continue
            if action == SCAN or action == FLOAT_SCAN:
                child = self.token_leaf(payload)
            else:  # COMPLETE / FLOAT_COMPLETE
                child = self.build(payload)
            if child is None:
                return None
            if action in (SCAN, COMPLETE):
                members.append(prod.slots[slot].member)
            else:
                members.append(prod.floats[slot].member)
            children.append(child)
        return Alternative(
            production=prod, children=tuple(children), child_member=tuple(members)
        )

    def _view(self, node: ForestNode, alt: Alternative) -> InstanceView:
        members: dict[str, object] = {}
        order: list[tuple[str, ChildView]] = []
        declared = {
            m.name: m for m in self.grammar.model.element(node.element).members
        }
        for m in declared.values():
            members[m.name] = [] if m.many else None
        for child, member in zip(alt.children, alt.child_member):
            view = ChildView(child.element, child.span, self.text[child.span.start : child.span.end])
            order.append((member, view))
            mdef = declared.get(member)
            if mdef is not None and mdef.many:
                members[member].append(view)
            else:
                members[member] = view
        order.sort(key=lambda pair: (pair[1].span.start, pair[1].span.end, pair[0]))
        return InstanceView(node.element, node.span, self.text, members, tuple(order))


def _expected_at(result: RecognizeResult, g: EncodedGrammar, col: int) -> set[str]:
    expected: set[str] = set()
    for item in range(len(result.item_prod)):
        if result.item_cur[item] != col:
            continue
        prod = result.item_prod[item]
        dot = result.item_dot[item]
        fs = result.item_fs[item]
        if dot < g.n_slots[prod]:
            sym = g.slot_sym[prod][dot]
            if g.terminal[sym]:
                expected.add(g.symbol_names[sym])
        for j in range(g.n_floats[prod]):
            if g.ftrans[prod][fs][j] >= 0 and g.terminal[g.float_sym[prod][j]]:
                expected.add(g.symbol_names[g.float_sym[prod][j]])
    return expected


def parse(
    graph: LexicalAnalysisGraph,
    grammar: Grammar,
    constraints: Registry | None = None,
    kernel: str | None = None,
) -> ParseForest:
    """Parse a lexical analysis graph into a shared packed parse forest.

    Raises :class:`NothingToParseError` on an empty graph and
    :class:`NoParseError` (with furthest-progress diagnostics) when no
    complete start-to-end derivation survives.
    """
    if not graph.tokens:
        raise NothingToParseError("nothing to parse: the lexical analysis graph is empty")
    if constraints is None:
        constraints = default_constraints()

    enc_g = encode_grammar(grammar)
    lattice = encode_lattice(graph, enc_g.symbol_ids)

    start_def = grammar.model.element(grammar.start)
    if start_def.kind == "lexical":
        # degenerate single-element grammars: the roots are whole-input tokens
        builder = _ForestBuilder(
            graph.text, grammar, graph, enc_g, lattice,
            _empty_result(lattice), constraints,
        )
        roots = []
        for tid in range(lattice.n_tokens):
            if (
                lattice.tok_sym[tid] == enc_g.start
                and lattice.tok_from[tid] == lattice.start_col
                and lattice.tok_to[tid] == lattice.end_col
            ):
                leaf = builder.token_leaf(tid)
                if leaf is not None:
                    roots.append(leaf)
        if not roots:
            raise NoParseError(
                "no parse", offset=lattice.col_char[lattice.start_col],
                expected={grammar.start},
            )
        return _finish(graph.text, grammar, roots)

    result = get_kernel(kernel).recognize(enc_g, lattice)

    if result.root_node < 0:
        offset = lattice.col_char[result.max_col]
        raise NoParseError(
            f"no parse: the chart stalled at offset {offset}",
            offset=offset,
            expected=_expected_at(result, enc_g, result.max_col),
        )

    builder = _ForestBuilder(graph.text, grammar, graph, enc_g, lattice, result, constraints)
    root = builder.build(result.root_node)
    if root is None:
        end_offset = lattice.col_char[lattice.end_col]
        raise NoParseError(
            "no parse: every complete derivation violated a constraint",
            offset=end_offset,
            expected=set(),
        )
    return _finish(graph.text, grammar, [root])


def _empty_result(lattice: EncodedLattice) -> RecognizeResult:
    return RecognizeResult(
        item_prod=[], item_dot=[], item_rep=[], item_fs=[], item_origin=[], item_cur=[],
        link_item=[], link_prev=[], link_action=[], link_slot=[], link_payload=[],
        node_sym=[], node_start=[], node_end=[], node_items=[],
        root_node=-1, max_col=lattice.start_col,
    )


def _finish(text: str, grammar: Grammar, roots: list[ForestNode]) -> ParseForest:
    # collect reachable nodes and assign deterministic export ids
    seen: dict[int, ForestNode] = {}
    stack = list(roots)
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        for alt in node.alternatives:
            stack.extend(alt.children)
    ordered = sorted(seen.values(), key=lambda n: n.key)
    for i, node in enumerate(ordered):
        node.export_id = i
    return ParseForest(text=text, grammar=grammar, nodes=ordered, roots=roots)


def forest_to_json_text(forest: ParseForest) -> str:
    return json.dumps(forest.to_json(), indent=2, ensure_ascii=False) + "\n"


__all__ = [
    "Alternative",
    "ForestNode",
    "ChildView",
    "InstanceView",
    "ParseForest",
    "parse",
    "check_constraints",
    "forest_to_json_text",
]
