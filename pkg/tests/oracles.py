"""Independent brute-force oracles for the test suite.

Everything here recomputes expected values by a different algorithm than the
library under test: path counting by naive DFS, tree enumeration by top-down
range splitting over the raw model (no chart, no packing), scores by direct
product expansion, minimal context subgraphs by subset search.
"""

from __future__ import annotations

import itertools
import json

from graphparse.lexgraph import LexicalAnalysisGraph, TokenCandidate
from graphparse.model import LanguageModel


# ---------------------------------------------------------------------------
# lattice paths


def dfs_paths(graph: LexicalAnalysisGraph) -> list[tuple[int, ...]]:
    """Every start-to-end token-id path, by plain depth-first search."""
    ends = set(graph.end_tokens)
    out: list[tuple[int, ...]] = []

    def walk(token_id: int, acc: tuple[int, ...]):
        if token_id in ends:
            out.append(acc)
        for succ in graph.successors(token_id):
            walk(succ, acc + (succ,))

    for start in graph.start_tokens:
        walk(start, (start,))
    return out


def dfs_count(graph: LexicalAnalysisGraph) -> int:
    return len(dfs_paths(graph))


# ---------------------------------------------------------------------------
# tree enumeration over the raw model (generate-and-filter)


def _leaf_json(token: TokenCandidate) -> dict:
    return {
        "element": token.element,
        "span": [token.span.start, token.span.end],
        "lexeme": token.lexeme,
    }


def _member_counts(member, available: int) -> list[int]:
    counts: set[int] = set()
    if member.many:
        low = max(member.min_count, 1)
        counts.update(range(low, available + 1))
        if member.min_count == 0 or member.optional:
            counts.add(0)
    else:
        counts.add(1)
        if member.optional:
            counts.add(0)
    return sorted(c for c in counts if c <= available)


def _interleave(fixed: list, movable: list) -> list[list]:
    """All distinct shuffles of ``movable`` occurrences into ``fixed``: the
    relative order of ``fixed`` is kept, equal movable occurrences are
    interchangeable (their order is span order either way)."""
    if not fixed and not movable:
        return [[]]
    out = []
    if fixed:
        for tail in _interleave(fixed[1:], movable):
            out.append([fixed[0]] + tail)
    chosen = set()
    for idx, m in enumerate(movable):
        if m.name in chosen:
            continue
        chosen.add(m.name)
        rest = movable[:idx] + movable[idx + 1 :]
        for tail in _interleave(fixed, rest):
            out.append([m] + tail)
    return out


def enumerate_sequence_trees(model: LanguageModel, tokens: list[TokenCandidate]) -> list[dict]:
    """All instance trees of ``model.start`` spanning the whole token
    sequence, as canonical JSON dicts (the same shape the engine exports)."""
    memo: dict[tuple[str, int, int], list[dict]] = {}

    def derive(element: str, i: int, j: int) -> list[dict]:
        key = (element, i, j)
        got = memo.get(key)
        if got is not None:
            return got
        memo[key] = []  # cycle guard; overwritten below
        edef = model.element(element)
        results: list[dict] = []
        if edef.kind == "lexical":
            if j - i == 1 and tokens[i].element == element:
                results.append(_leaf_json(tokens[i]))
        elif edef.kind == "alternative":
            seen = set()
            for variant in edef.variants:
                for tree in derive(variant, i, j):
                    mark = json.dumps(tree, sort_keys=True)
                    if mark not in seen:
                        seen.add(mark)
                        results.append(tree)
        else:
            results = _derive_composition(edef, i, j, derive)
        memo[key] = results
        return results

    def _derive_composition(edef, i, j, derive) -> list[dict]:
        available = j - i
        positionals = [m for m in edef.members if not m.floating]
        floats = [m for m in edef.members if m.floating]
        results = []
        seen = set()
        count_axes = [_member_counts(m, available) for m in positionals + floats]
        for counts in itertools.product(*count_axes):
            pos_counts = counts[: len(positionals)]
            float_counts = counts[len(positionals) :]
            occurrences_fixed = []
            for m, c in zip(positionals, pos_counts):
                occurrences_fixed.extend([m] * c)
            movable = []
            for m, c in zip(floats, float_counts):
                movable.extend([m] * c)
            total = len(occurrences_fixed) + len(movable)
            if total == 0 or total > available:
                continue
            for order in _interleave(occurrences_fixed, movable):
                for split in itertools.combinations(range(i + 1, j), len(order) - 1):
                    bounds = [i, *split, j]
                    assignments = []
                    ok = True
                    for occ, lo, hi in zip(order, bounds, bounds[1:]):
                        target = occ.reference_form if occ.reference else occ.target
                        subtrees = derive(target, lo, hi)
                        if not subtrees:
                            ok = False
                            break
                        assignments.append((occ, subtrees))
                    if not ok:
                        continue
                    for chosen in itertools.product(*(s for _, s in assignments)):
                        members: dict[str, object] = {}
                        for m in edef.members:
                            members[m.name] = [] if m.many else None
                        for (occ, _), sub in zip(assignments, chosen):
                            if occ.many:
                                members[occ.name].append(sub)
                            else:
                                members[occ.name] = sub
                        span_lo = tokens[i].span.start
                        span_hi = tokens[j - 1].span.end
                        tree = {
                            "element": edef.name,
                            "span": [span_lo, span_hi],
                            "members": members,
                        }
                        mark = json.dumps(tree, sort_keys=True)
                        if mark not in seen:
                            seen.add(mark)
                            results.append(tree)
        return results

    return derive(model.start, 0, len(tokens))


def enumerate_lattice_trees(model: LanguageModel, graph: LexicalAnalysisGraph) -> list[dict]:
    """Union of sequence-tree enumerations over every complete lattice path."""
    seen = set()
    out = []
    for path in dfs_paths(graph):
        tokens = [graph.tokens[t] for t in path]
        for tree in enumerate_sequence_trees(model, tokens):
            mark = json.dumps(tree, sort_keys=True)
            if mark not in seen:
                seen.add(mark)
                out.append(tree)
    return out


# ---------------------------------------------------------------------------
# direct probability recomputation (value/default modes only)


def tree_probability(model: LanguageModel, tree: dict, pos_prob) -> float:
    """Plain product expansion of the candidate probability: element priors,
    presence terms for optional members, and P(element|lexeme) per leaf.

    ``pos_prob`` maps (span start, span end, element) to the tagger value.
    """
    edef = model.element(tree["element"])
    if "members" not in tree:
        value = 1.0
        if edef.probability.mode == "value":
            value *= edef.probability.value
        return value * pos_prob[(tree["span"][0], tree["span"][1], tree["element"])]
    prob = 1.0
    spec = edef.probability
    if spec.mode == "value":
        prob *= spec.value
        for m in edef.members:
            if not m.effectively_optional:
                continue
            p = spec.member_presence.get(m.name, 0.5)
            value = tree["members"].get(m.name)
            present = bool(value) if isinstance(value, (list, type(None))) else True
            prob *= p if present else 1.0 - p
    elif spec.mode != "default":
        raise AssertionError("oracle supports value/default probability modes only")
    for value in tree["members"].values():
        children = value if isinstance(value, list) else ([value] if value else [])
        for child in children:
            prob *= tree_probability(model, child, pos_prob)
    return prob


# ---------------------------------------------------------------------------
# minimal connected subgraph (context-graph oracle)


def minimal_connected_subgraph(parents: dict[int, int | None], required: set[int]) -> frozenset[int]:
    """The unique smallest connected node set of a tree containing
    ``required``, found by brute-force subset search in size order."""
    nodes = sorted(parents)
    adjacency: dict[int, set[int]] = {n: set() for n in nodes}
    for child, parent in parents.items():
        if parent is not None:
            adjacency[child].add(parent)
            adjacency[parent].add(child)

    def connected(subset: frozenset[int]) -> bool:
        todo = [next(iter(subset))]
        seen = set()
        while todo:
            cur = todo.pop()
            if cur in seen:
                continue
            seen.add(cur)
            todo.extend(adjacency[cur] & subset - seen)
        return seen == set(subset)

    optional_nodes = [n for n in nodes if n not in required]
    for extra in range(len(optional_nodes) + 1):
        hits = []
        for combo in itertools.combinations(optional_nodes, extra):
            subset = frozenset(required) | frozenset(combo)
            if connected(subset):
                hits.append(subset)
        if hits:
            assert len(hits) == 1, "Steiner subgraph in a tree must be unique"
            return hits[0]
    raise AssertionError("no connected superset found")
