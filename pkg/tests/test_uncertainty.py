import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphparse import (
    AlgebraError,
    PROBABILISTIC,
    POSSIBILISTIC,
    cast,
    compile_grammar,
    element_score,
    enumerate_graphs,
    graph_score,
    rank,
)
from graphparse.lexgraph import Span, TokenCandidate
from graphparse.model import ElementDef, MemberDef, ProbabilitySpec
from graphparse.trees import ElementInstance, ParseGraphCandidate
from graphparse.uncertainty import EvaluationContext, Factor, Score

from .grammars import lexical, model_from, parse_toy
from .oracles import enumerate_lattice_trees, tree_probability

UNIT = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def two_optional_def(p_e=0.5, p1=0.3, p2=0.2):
    return ElementDef(
        name="E",
        kind="composition",
        members=(
            MemberDef(name="m1", target="X", optional=True),
            MemberDef(name="m2", target="X", optional=True),
            MemberDef(name="req", target="X"),
        ),
        probability=ProbabilitySpec(
            mode="value", value=p_e, member_presence={"m1": p1, "m2": p2}
        ),
    )


def fake_instance(present):
    members = {"m1": None, "m2": None, "req": ElementInstance("X", Span(0, 1))}
    for name in present:
        members[name] = ElementInstance("X", Span(0, 1))
    return ElementInstance("E", Span(0, 1), members=members)


def test_element_score_worked_example():
    score = element_score(
        two_optional_def(), fake_instance({"m1"}), EvaluationContext(), PROBABILISTIC
    )
    assert score.value == pytest.approx(0.5 * 0.3 * (1 - 0.2), abs=1e-12)


def test_element_score_no_optional_members():
    edef = ElementDef(
        name="E", kind="composition",
        members=(MemberDef(name="req", target="X"),),
        probability=ProbabilitySpec(mode="value", value=0.37),
    )
    inst = ElementInstance("E", Span(0, 1), members={"req": ElementInstance("X", Span(0, 1))})
    assert element_score(edef, inst, EvaluationContext(), PROBABILISTIC).value == pytest.approx(0.37)


def test_element_score_presence_one_is_transparent():
    edef = two_optional_def(p_e=0.41, p1=1.0, p2=1.0)
    score = element_score(edef, fake_instance({"m1", "m2"}), EvaluationContext(), PROBABILISTIC)
    assert score.value == pytest.approx(0.41, abs=1e-12)


def test_element_score_default_mode_is_identity():
    edef = ElementDef(name="E", kind="composition", members=(MemberDef(name="m", target="X"),))
    inst = fake_instance(set())
    assert element_score(edef, inst, EvaluationContext(), PROBABILISTIC) == PROBABILISTIC.identity


@given(
    p_e=UNIT,
    p1=UNIT,
    p2=UNIT,
    present1=st.booleans(),
    present2=st.booleans(),
)
def test_element_score_matches_direct_formula(p_e, p1, p2, present1, present2):
    edef = two_optional_def(p_e, p1, p2)
    present = {n for n, flag in (("m1", present1), ("m2", present2)) if flag}
    got = element_score(edef, fake_instance(present), EvaluationContext(), PROBABILISTIC).value
    expected = p_e * (p1 if present1 else 1 - p1) * (p2 if present2 else 1 - p2)
    assert got == pytest.approx(expected, abs=1e-12)
    assert 0.0 <= got <= p_e + 1e-15  # Eq-level bound


def _leaf_candidate(pos_prob):
    token = TokenCandidate(id=0, element="A", span=Span(0, 1), lexeme="x", pos_prob=pos_prob)
    root = ElementInstance("A", Span(0, 1), token=token)
    return ParseGraphCandidate(root=root, text="x", score=PROBABILISTIC.identity)


def test_graph_score_product_of_instances():
    model = model_from(
        [
            lexical("A"),
            {"name": "Inner", "kind": "composition",
             "members": [{"name": "a", "target": "A"}],
             "probability": {"mode": "value", "value": 0.4}},
            {"name": "Outer", "kind": "composition",
             "members": [{"name": "i", "target": "Inner"}],
             "probability": {"mode": "value", "value": 0.5}},
        ],
        start="Outer",
    )
    forest = parse_toy(model, "x\tA\t1", "x")
    (cand,) = enumerate_graphs(forest, 5, PROBABILISTIC)
    assert cand.score.value == pytest.approx(0.2, rel=1e-12)


def test_graph_score_single_lexical_pos_prob():
    model = model_from([lexical("A"), lexical("B")], start="A")
    forest = parse_toy(model, "x\tA\t3\nx\tB\t1", "x")
    (cand,) = enumerate_graphs(forest, 5, PROBABILISTIC)
    assert cand.score.value == pytest.approx(0.75, rel=1e-12)


def test_graph_score_factor_product_matches_score(english):
    model, lexicon = english
    from graphparse import parse_text

    for graph in parse_text(model, lexicon, "I saw a picture of New York", k=4):
        product = 1.0
        for f in graph.factors:
            product *= f.value
        assert graph.score.value == pytest.approx(product, rel=1e-12)


def test_fold_survives_underflow_ordering():
    many_small = [1e-250] * 3  # linear product underflows float range
    a = PROBABILISTIC.fold(many_small)
    b = PROBABILISTIC.fold(many_small + [0.5])
    assert a.value == 0.0 and b.value == 0.0  # linear view flushes to zero
    assert PROBABILISTIC.sort_key(a) > PROBABILISTIC.sort_key(b)  # order survives


# --- rank --------------------------------------------------------------------


class Item:
    def __init__(self, score, key):
        self.score = score
        self._key = key

    def canonical_key(self):
        return self._key


def test_rank_orders_by_score():
    items = [Item(Score("probabilistic", 0.2), "b"), Item(Score("probabilistic", 0.3), "a")]
    assert [i.score.value for i in rank(items, PROBABILISTIC)] == [0.3, 0.2]


def test_rank_breaks_ties_canonically():
    items = [Item(Score("probabilistic", 0.2), "b"), Item(Score("probabilistic", 0.2), "a")]
    assert [i._key for i in rank(items, PROBABILISTIC)] == ["a", "b"]


def test_rank_empty():
    assert rank([], PROBABILISTIC) == []


# --- casts -------------------------------------------------------------------


def test_cast_probabilistic_to_possibilistic():
    out = cast(Score("probabilistic", 0.2), POSSIBILISTIC)
    assert out == Score("possibilistic", 0.2)


def test_cast_preserves_identity():
    out = cast(PROBABILISTIC.identity, POSSIBILISTIC)
    assert out.value == POSSIBILISTIC.identity.value


def test_cast_without_path_fails():
    with pytest.raises(AlgebraError, match="no cast path"):
        cast(Score("possibilistic", 0.2), PROBABILISTIC)


def test_mixed_algebra_combination_fails():
    with pytest.raises(AlgebraError):
        PROBABILISTIC.combine(Score("probabilistic", 0.5), Score("possibilistic", 0.5))


# --- algebra laws ------------------------------------------------------------


@given(a=UNIT, b=UNIT, c=UNIT)
def test_probabilistic_laws(a, b, c):
    alg = PROBABILISTIC
    left = alg.combine_values(alg.combine_values(a, b), c)
    right = alg.combine_values(a, alg.combine_values(b, c))
    assert left == pytest.approx(right, rel=1e-12, abs=1e-300)
    assert alg.combine_values(a, b) == alg.combine_values(b, a)
    assert alg.combine_values(a, alg.identity.value) == a


@given(a=UNIT, b=UNIT, c=UNIT)
def test_possibilistic_laws(a, b, c):
    alg = POSSIBILISTIC
    assert alg.combine_values(alg.combine_values(a, b), c) == alg.combine_values(a, alg.combine_values(b, c))
    assert alg.combine_values(a, b) == alg.combine_values(b, a)
    assert alg.combine_values(a, alg.identity.value) == a


def test_out_of_domain_score_rejected():
    with pytest.raises(AlgebraError):
        PROBABILISTIC.score(1.5)
    with pytest.raises(AlgebraError):
        POSSIBILISTIC.score(-0.1)


# --- argmax invariance -------------------------------------------------------


def test_uniform_prior_scaling_preserves_order():
    def scaled_model(c):
        return model_from(
            [
                lexical("A"),
                {"name": "One", "kind": "composition",
                 "members": [{"name": "a", "target": "A", "multiplicity": {"many": {"min": 1}}}],
                 "probability": {"mode": "value", "value": 0.3 * c}},
                {"name": "Two", "kind": "composition",
                 "members": [{"name": "first", "target": "A"},
                             {"name": "rest", "target": "A", "multiplicity": {"many": {"min": 1}}}],
                 "probability": {"mode": "value", "value": 0.6 * c}},
                {"name": "S", "kind": "alternative", "variants": ["One", "Two"]},
            ],
            start="S",
        )

    def order(c):
        forest = parse_toy(scaled_model(c), "a\tA\t1", "a a a")
        return [cand.canonical_key() for cand in enumerate_graphs(forest, 100, PROBABILISTIC)]

    base = order(1.0)
    for c in (0.5, 0.1):
        assert order(c) == base  # same instance count per candidate -> same order
    # and every score scales by c^n for n scored instances (here exactly 1)
    forest1 = parse_toy(scaled_model(1.0), "a\tA\t1", "a a a")
    forest_half = parse_toy(scaled_model(0.5), "a\tA\t1", "a a a")
    s1 = [c.score.value for c in enumerate_graphs(forest1, 100, PROBABILISTIC)]
    s2 = [c.score.value for c in enumerate_graphs(forest_half, 100, PROBABILISTIC)]
    assert all(b == pytest.approx(a * 0.5, rel=1e-12) for a, b in zip(s1, s2))


# --- PCFG oracle equivalence --------------------------------------------------


def pcfg_model():
    return model_from(
        [
            {"name": "S", "kind": "alternative", "variants": ["Pair", "Triple", "A"]},
            {"name": "Pair", "kind": "composition",
             "members": [{"name": "left", "target": "S"}, {"name": "right", "target": "S"}],
             "probability": {"mode": "value", "value": 0.5}},
            {"name": "Triple", "kind": "composition",
             "members": [{"name": "a", "target": "S"}, {"name": "b", "target": "S"},
                         {"name": "c", "target": "S"}],
             "probability": {"mode": "value", "value": 0.2}},
            lexical("A"),
        ],
        start="S",
    )


def test_pcfg_ranking_matches_bruteforce():
    from graphparse import scan, load_lexicon
    from graphparse.engine import parse

    model = pcfg_model()
    graph = scan("a a a a", model, load_lexicon("a\tA\t1"))
    pos_prob = {
        (t.span.start, t.span.end, t.element): t.pos_prob for t in graph.tokens
    }
    oracle = [
        (json.dumps(t, sort_keys=True), tree_probability(model, t, pos_prob))
        for t in enumerate_lattice_trees(model, graph)
    ]
    oracle.sort(key=lambda pair: (-pair[1], pair[0]))

    forest = parse(graph, compile_grammar(model))
    engine = [
        (c.canonical_key(), c.score.value)
        for c in enumerate_graphs(forest, 10_000, PROBABILISTIC)
    ]
    assert len(engine) == len(oracle)
    for (ek, ev), (ok, ov) in zip(engine, oracle):
        assert ek == ok
        assert ev == pytest.approx(ov, rel=1e-12)
