"""Pure-Python recognizer kernel.

Earley-style chart recognition generalized to token lattices: chart columns
are canonical character positions, the scanner consumes any lattice token
starting at the current column, and items carry two extras beyond (rule,
dot, origin): a saturating repetition counter for many-multiplicity slots
and a float-pool state for floating members, which may be consumed at any
slot boundary, including between repetitions.

The compiled kernel (``_recognizer_c.pyx``) mirrors this module statement
for statement; both must produce identical results, including item, link and
node ordering.  Fix bugs in both places.
"""

from __future__ import annotations

from collections import deque

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
)

KERNEL_ID = "python"


def recognize(g: EncodedGrammar, lat: EncodedLattice) -> RecognizeResult:
    item_index: dict[tuple[int, int, int, int, int, int], int] = {}
    item_prod: list[int] = []
    item_dot: list[int] = []
    item_rep: list[int] = []
    item_fs: list[int] = []
    item_origin: list[int] = []
    item_cur: list[int] = []

    link_item: list[int] = []
    link_prev: list[int] = []
    link_action: list[int] = []
    link_slot: list[int] = []
    link_payload: list[int] = []

    node_index: dict[tuple[int, int, int], int] = {}
    node_sym: list[int] = []
    node_start: list[int] = []
    node_end: list[int] = []
    node_items: list[list[int]] = []

    n_cols = lat.n_cols
    agendas: list[deque[int]] = [deque() for _ in range(n_cols)]
    predicted: list[set[int]] = [set() for _ in range(n_cols)]
    # waiting[col][sym] -> [(item, mode, slot)]; mode 0 = positional, 1 = float
    waiting: list[dict[int, list[tuple[int, int, int]]]] = [{} for _ in range(n_cols)]
    eps_nodes: list[dict[int, int]] = [{} for _ in range(n_cols)]

    max_col = lat.start_col

    def add_item(prod, dot, rep, fs, origin, cur, prev, action, slot, payload):
        nonlocal max_col
        key = (prod, dot, rep, fs, origin, cur)
        iid = item_index.get(key)
        if iid is None:
            iid = len(item_prod)
            item_index[key] = iid
            item_prod.append(prod)
            item_dot.append(dot)
            item_rep.append(rep)
            item_fs.append(fs)
            item_origin.append(origin)
            item_cur.append(cur)
            agendas[cur].append(iid)
            if cur > max_col:
                max_col = cur
        if prev >= 0 and prev != iid:  # self-links (zero-width repetition) collapse
            link_item.append(iid)
            link_prev.append(prev)
            link_action.append(action)
            link_slot.append(slot)
            link_payload.append(payload)
        return iid

    def predict(sym, col):
        if sym in predicted[col]:
            return
        predicted[col].add(sym)
        for pid in g.prods_of[sym]:
            add_item(pid, 0, 0, 0, col, col, -1, -1, -1, -1)

    def advance_waiter(witem, mode, slot, node, col):
        wprod = item_prod[witem]
        wdot = item_dot[witem]
        wrep = item_rep[witem]
        wfs = item_fs[witem]
        worigin = item_origin[witem]
        if mode == 0:
            if g.slot_many[wprod][wdot]:
                cap = g.slot_rep_cap[wprod][wdot]
                rep2 = wrep + 1 if wrep + 1 < cap else cap
                add_item(wprod, wdot, rep2, wfs, worigin, col, witem, COMPLETE, wdot, node)
            else:
                add_item(wprod, wdot + 1, 0, wfs, worigin, col, witem, COMPLETE, wdot, node)
        else:
            fs2 = g.ftrans[wprod][wfs][slot]
            add_item(wprod, wdot, wrep, fs2, worigin, col, witem, FLOAT_COMPLETE, slot, node)

    if not g.terminal[g.start]:
        predict(g.start, lat.start_col)

    for col in range(n_cols):
        agenda = agendas[col]
        while agenda:
            iid = agenda.popleft()
            prod = item_prod[iid]
            dot = item_dot[iid]
            rep = item_rep[iid]
            fs = item_fs[iid]
            origin = item_origin[iid]
            nslots = g.n_slots[prod]

            if dot < nslots:
                sym = g.slot_sym[prod][dot]
                many = g.slot_many[prod][dot]
                if g.terminal[sym]:
                    for tid in lat.tokens_at[col]:
                        if lat.tok_sym[tid] == sym:
                            to = lat.tok_to[tid]
                            if many:
                                cap = g.slot_rep_cap[prod][dot]
                                rep2 = rep + 1 if rep + 1 < cap else cap
                                add_item(prod, dot, rep2, fs, origin, to, iid, SCAN, dot, tid)
                            else:
                                add_item(prod, dot + 1, 0, fs, origin, to, iid, SCAN, dot, tid)
                else:
                    predict(sym, col)
                    waiting[col].setdefault(sym, []).append((iid, 0, dot))
                    eps = eps_nodes[col].get(sym)
                    if eps is not None:
                        advance_waiter(iid, 0, dot, eps, col)
                if rep == 0 and (
                    g.slot_opt[prod][dot] or (many and g.slot_min[prod][dot] == 0)
                ):
                    add_item(prod, dot + 1, 0, fs, origin, col, iid, SKIP, dot, -1)
                if many and rep == g.slot_rep_cap[prod][dot]:
                    add_item(prod, dot + 1, 0, fs, origin, col, iid, ADVANCE, dot, -1)

            nfloats = g.n_floats[prod]
            if nfloats:
                trans_row = g.ftrans[prod][fs]
                for j in range(nfloats):
                    fs2 = trans_row[j]
                    if fs2 < 0:
                        continue
                    fsym = g.float_sym[prod][j]
                    if g.terminal[fsym]:
                        for tid in lat.tokens_at[col]:
                            if lat.tok_sym[tid] == fsym:
                                to = lat.tok_to[tid]
                                add_item(prod, dot, rep, fs2, origin, to, iid, FLOAT_SCAN, j, tid)
                    else:
                        predict(fsym, col)
                        waiting[col].setdefault(fsym, []).append((iid, 1, j))
                        eps = eps_nodes[col].get(fsym)
                        if eps is not None:
                            advance_waiter(iid, 1, j, eps, col)

            if dot == nslots and g.fsat[prod][fs]:
                lhs = g.lhs[prod]
                nkey = (lhs, origin, col)
                nid = node_index.get(nkey)
                if nid is None:
                    nid = len(node_sym)
                    node_index[nkey] = nid
                    node_sym.append(lhs)
                    node_start.append(origin)
                    node_end.append(col)
                    node_items.append([])
                    if origin == col:
                        eps_nodes[col][lhs] = nid
                    for witem, mode, slot in list(waiting[origin].get(lhs, ())):
                        advance_waiter(witem, mode, slot, nid, col)
                node_items[nid].append(iid)

    root = node_index.get((g.start, lat.start_col, lat.end_col), -1)
    return RecognizeResult(
        item_prod=item_prod,
        item_dot=item_dot,
        item_rep=item_rep,
        item_fs=item_fs,
        item_origin=item_origin,
        item_cur=item_cur,
        link_item=link_item,
        link_prev=link_prev,
        link_action=link_action,
        link_slot=link_slot,
        link_payload=link_payload,
        node_sym=node_sym,
        node_start=node_start,
        node_end=node_end,
        node_items=node_items,
        root_node=root,
        max_col=max_col,
    )
