"""End-to-end pipeline: scan -> parse -> enumerate -> resolve -> rank."""

from __future__ import annotations

from .engine import enumerate_graphs, parse
from .lexgraph import scan
from .lexicon import Lexicon
from .model import LanguageModel, compile_grammar
from .refs import AbstractSyntaxGraph, resolve
from .registry import Registry, default_constraints, default_evaluators, default_matchers
from .uncertainty import PROBABILISTIC, ValuationAlgebra, rank


def parse_text(
    model: LanguageModel,
    lexicon: Lexicon,
    text: str,
    k: int = 3,
    algebra: ValuationAlgebra = PROBABILISTIC,
    constraints: Registry | None = None,
    evaluators: Registry | None = None,
    matchers: Registry | None = None,
    scorer=None,
    tree_budget: int | None = None,
    kernel: str | None = None,
) -> list[AbstractSyntaxGraph]:
    """Top-k abstract syntax graphs for ``text`` under ``model``.

    Candidate trees are enumerated up to ``tree_budget`` (default
    ``max(16 * k, 64)``) before reference resolution; the ranking over
    resolved graphs is exact whenever the budget covers every tree, which it
    does at demo scale.
    """
    constraints = constraints if constraints is not None else default_constraints()
    evaluators = evaluators if evaluators is not None else default_evaluators()
    matchers = matchers if matchers is not None else default_matchers()

    graph = scan(text, model, lexicon, matchers)
    grammar = compile_grammar(model, constraints, evaluators)
    forest = parse(graph, grammar, constraints, kernel=kernel)
    budget = tree_budget if tree_budget is not None else max(16 * k, 64)
    trees = enumerate_graphs(forest, budget, algebra, evaluators)
    graphs: list[AbstractSyntaxGraph] = []
    for tree in trees:
        graphs.extend(resolve(tree, model, algebra, scorer))
    return rank(graphs, algebra)[:k]


__all__ = ["parse_text"]
