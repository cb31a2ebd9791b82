"""Integer encodings of grammar and token lattice for the recognizer kernels.

The recognizer is the hot loop of the whole pipeline, so it runs over flat
integer arrays.  Both the compiled and the pure-Python kernel consume exactly
this encoding and must produce identical results.

Float pools are precomputed as small state machines: a float state is the
tuple of per-float-slot consumed counts, saturated at each slot's cap; the
transition table answers "may slot j consume another child, and which state
follows", and the satisfied table answers "may the item complete".
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ..lexgraph import LexicalAnalysisGraph, canonical_position
from ..model import Grammar

# link actions
SCAN = 0
COMPLETE = 1
SKIP = 2
ADVANCE = 3
FLOAT_SCAN = 4
FLOAT_COMPLETE = 5


@dataclass
class EncodedGrammar:
    n_symbols: int
    symbol_names: list[str]
    symbol_ids: dict[str, int]
    terminal: list[bool]
    start: int
    # productions
    n_prods: int
    lhs: list[int]
    n_slots: list[int]
    slot_sym: list[list[int]]
    slot_opt: list[list[int]]
    slot_many: list[list[int]]
    slot_min: list[list[int]]
    slot_rep_cap: list[list[int]]
    n_floats: list[int]
    float_sym: list[list[int]]
    # float-state machine, per production
    n_fstates: list[int]
    ftrans: list[list[list[int]]]  # [pid][state][float slot] -> state or -1
    fsat: list[list[bool]]  # [pid][state] -> completion allowed
    prods_of: list[list[int]]  # [symbol] -> production ids


@dataclass
class EncodedLattice:
    n_cols: int
    col_char: list[int]  # column -> canonical character offset
    col_raw_end: list[int]  # column -> raw end offset of tokens ending there
    n_tokens: int
    tok_sym: list[int]
    tok_from: list[int]
    tok_to: list[int]
    tok_orig: list[int]  # kernel token id -> TokenCandidate id in the source graph
    tokens_at: list[list[int]]  # [column] -> token ids starting there, ascending
    start_col: int
    end_col: int


@dataclass
class RecognizeResult:
    """Chart items, derivation links and packed completions.

    Items are identified by insertion order; a link ``(item, prev, action,
    slot, payload)`` records one way of deriving ``item`` from ``prev``
    (payload: token id for scans, node id for completions).  Nodes are the
    packed (symbol, start column, end column) completions.
    """

    item_prod: list[int]
    item_dot: list[int]
    item_rep: list[int]
    item_fs: list[int]
    item_origin: list[int]
    item_cur: list[int]
    link_item: list[int]
    link_prev: list[int]
    link_action: list[int]
    link_slot: list[int]
    link_payload: list[int]
    node_sym: list[int]
    node_start: list[int]
    node_end: list[int]
    node_items: list[list[int]]
    root_node: int
    max_col: int

    def links_of(self, item: int) -> list[tuple[int, int, int, int]]:
        index = getattr(self, "_links_index", None)
        if index is None:
            index = [[] for _ in self.item_prod]
            for i, it in enumerate(self.link_item):
                index[it].append(
                    (self.link_prev[i], self.link_action[i], self.link_slot[i], self.link_payload[i])
                )
            self._links_index = index
        return index[item]

    def signature(self) -> tuple:
        """Canonical summary for cross-kernel parity checks."""
        return (
            tuple(zip(self.item_prod, self.item_dot, self.item_rep, self.item_fs,
                      self.item_origin, self.item_cur)),
            tuple(zip(self.link_item, self.link_prev, self.link_action,
                      self.link_slot, self.link_payload)),
            tuple(zip(self.node_sym, self.node_start, self.node_end)),
            tuple(tuple(items) for items in self.node_items),
            self.root_node,
            self.max_col,
        )


def encode_grammar(grammar: Grammar) -> EncodedGrammar:
    names = [e.name for e in grammar.model.elements]
    ids = {n: i for i, n in enumerate(names)}
    terminal = [e.kind == "lexical" for e in grammar.model.elements]

    n_prods = len(grammar.productions)
    lhs, n_slots = [], []
    slot_sym, slot_opt, slot_many, slot_min, slot_rep_cap = [], [], [], [], []
    n_floats, float_sym = [], []
    n_fstates, ftrans, fsat = [], [], []
    prods_of: list[list[int]] = [[] for _ in names]

    for p in grammar.productions:
        lhs.append(ids[p.lhs])
        prods_of[ids[p.lhs]].append(p.pid)
        n_slots.append(len(p.slots))
        slot_sym.append([ids[s.symbol] for s in p.slots])
        slot_opt.append([1 if s.optional else 0 for s in p.slots])
        slot_many.append([1 if s.many else 0 for s in p.slots])
        slot_min.append([s.min_count for s in p.slots])
        slot_rep_cap.append([s.rep_cap for s in p.slots])
        n_floats.append(len(p.floats))
        float_sym.append([ids[f.symbol] for f in p.floats])

        caps = [f.count_cap for f in p.floats]
        states = list(product(*(range(c + 1) for c in caps))) if p.floats else [()]
        state_ids = {s: i for i, s in enumerate(states)}
        trans = []
        sat = []
        for state in states:
            row = []
            for j, f in enumerate(p.floats):
                if f.may_consume(state[j]):
                    nxt = list(state)
                    nxt[j] = min(state[j] + 1, caps[j])
                    row.append(state_ids[tuple(nxt)])
                else:
                    row.append(-1)
            trans.append(row)
            sat.append(all(f.satisfied(state[j]) for j, f in enumerate(p.floats)))
        n_fstates.append(len(states))
        ftrans.append(trans)
        fsat.append(sat)

    return EncodedGrammar(
        n_symbols=len(names),
        symbol_names=names,
        symbol_ids=ids,
        terminal=terminal,
        start=ids[grammar.start],
        n_prods=n_prods,
        lhs=lhs,
        n_slots=n_slots,
        slot_sym=slot_sym,
        slot_opt=slot_opt,
        slot_many=slot_many,
        slot_min=slot_min,
        slot_rep_cap=slot_rep_cap,
        n_floats=n_floats,
        float_sym=float_sym,
        n_fstates=n_fstates,
        ftrans=ftrans,
        fsat=fsat,
        prods_of=prods_of,
    )


def encode_lattice(graph: LexicalAnalysisGraph, symbol_ids: dict[str, int]) -> EncodedLattice:
    """Map token spans onto chart columns.

    Columns are the canonical boundary positions: a token's end column is the
    first non-whitespace offset after it, so lattice adjacency becomes exact
    column equality and the kernel never consults the edge list.
    """
    text = graph.text
    boundaries: set[int] = set()
    raw_end: dict[int, int] = {}
    for t in graph.tokens:
        boundaries.add(t.span.start)
        end = canonical_position(text, t.span.end)
        boundaries.add(end)
        raw_end[end] = t.span.end
    first = canonical_position(text, 0)
    boundaries.add(first)
    boundaries.add(len(text))
    cols = sorted(boundaries)
    col_of = {c: i for i, c in enumerate(cols)}

    tok_sym, tok_from, tok_to, tok_orig = [], [], [], []
    tokens_at: list[list[int]] = [[] for _ in cols]
    for t in graph.tokens:
        sym = symbol_ids.get(t.element)
        if sym is None:
            continue  # token of an element the grammar does not know
        tok_sym.append(sym)
        f = col_of[t.span.start]
        to = col_of[canonical_position(text, t.span.end)]
        tok_from.append(f)
        tok_to.append(to)
        tok_orig.append(t.id)
        tokens_at[f].append(len(tok_sym) - 1)

    return EncodedLattice(
        n_cols=len(cols),
        col_char=cols,
        col_raw_end=[raw_end.get(c, c) for c in cols],
        n_tokens=len(tok_sym),
        tok_sym=tok_sym,
        tok_from=tok_from,
        tok_to=tok_to,
        tok_orig=tok_orig,
        tokens_at=tokens_at,
        start_col=col_of[first],
        end_col=col_of[len(text)],
    )


__all__ = [
    "SCAN",
    "COMPLETE",
    "SKIP",
    "ADVANCE",
    "FLOAT_SCAN",
    "FLOAT_COMPLETE",
    "EncodedGrammar",
    "EncodedLattice",
    "RecognizeResult",
    "encode_grammar",
    "encode_lattice",
]
