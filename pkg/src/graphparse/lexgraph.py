"""Scanning ambiguous input into a lexical analysis graph.

Every lexical element's pattern is tried at every whitespace-delimited
position, with no maximal munch and no winner-take-all: overlapping and
competing candidates all survive into a DAG whose start-to-end paths are the
possible token sequences.  Lexicon-backed candidates carry P(class|lexeme)
as their probability, so the scanner doubles as a part-of-speech tagger.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import ScanError
from .lexicon import Lexicon, pos_distribution
from .model import LanguageModel
from .registry import Registry, default_matchers

_WORD_RE = re.compile(r"\S+")


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span [{self.start},{self.end})")

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def to_json(self):
        return [self.start, self.end]


@dataclass(frozen=True)
class TokenCandidate:
    id: int
    element: str
    span: Span
    lexeme: str
    pos_prob: float


@dataclass(frozen=True)
class LexicalAnalysisGraph:
    text: str
    tokens: tuple[TokenCandidate, ...]
    edges: tuple[tuple[int, int], ...]
    start_tokens: tuple[int, ...]
    end_tokens: tuple[int, ...]

    def successors(self, token_id: int) -> list[int]:
        cache = self.__dict__.get("_succ")
        if cache is None:
            cache = {t.id: [] for t in self.tokens}
            for a, b in self.edges:
                cache[a].append(b)
            object.__setattr__(self, "_succ", cache)
        return cache[token_id]

    def to_json(self) -> dict:
        return {
            "tokens": [
                {
                    "id": t.id,
                    "element": t.element,
                    "start": t.span.start,
                    "end": t.span.end,
                    "lexeme": t.lexeme,
                    "posProb": t.pos_prob,
                }
                for t in self.tokens
            ],
            "edges": [[a, b] for a, b in self.edges],
        }

    def to_dot(self) -> str:
        lines = ["digraph lexgraph {", "  rankdir=LR;", "  node [shape=box];"]
        for t in self.tokens:
            label = f"{t.lexeme}/{t.element}/{t.pos_prob:.4g}".replace('"', '\\"')
            lines.append(f'  t{t.id} [label="{label}"];')
        for a, b in self.edges:
            lines.append(f"  t{a} -> t{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def canonical_position(text: str, offset: int) -> int:
    """First non-whitespace offset at or after ``offset`` (input length if
    only whitespace remains).  Two token boundaries with equal canonical
    positions are adjacent across whitespace."""
    n = len(text)
    while offset < n and text[offset].isspace():
        offset += 1
    return offset


def _words(text: str) -> list[tuple[int, int, str]]:
    return [(m.start(), m.end(), m.group()) for m in _WORD_RE.finditer(text)]


def scan(
    text: str,
    model: LanguageModel,
    lexicon: Lexicon,
    matchers: Registry | None = None,
) -> LexicalAnalysisGraph:
    """Scan ``text`` against the model's lexical elements.

    Candidates begin and end at whitespace boundaries; lexicon entries may
    span several words (single internal whitespace runs).  Raises
    :class:`ScanError` when a non-whitespace position is covered by no
    candidate at all.
    """
    if matchers is None:
        matchers = default_matchers()
    words = _words(text)
    lexical = [e for e in model.elements if e.kind == "lexical"]
    by_class: dict[str, list] = {}
    open_classes: set[str] = set()
    for e in lexical:
        p = e.pattern
        if p is None or p.strategy != "lexicon":
            continue
        by_class.setdefault(p.lexicon_class, []).append(e)
        if p.open_class:
            open_classes.add(p.lexicon_class)
    regex_elements = [
        (e, re.compile(e.pattern.expression)) for e in lexical if e.pattern.strategy == "regex"
    ]
    heuristic_elements = [
        (e, matchers.get(e.pattern.heuristic_name))
        for e in lexical
        if e.pattern.strategy == "heuristic"
    ]

    found: dict[tuple[int, int, str], float] = {}

    max_words = max(lexicon.max_words, 1)
    # regex and heuristic matchers try every word run; lexicon lookups stop
    # at the longest entry in the lexicon
    span_limit = len(words) if (regex_elements or heuristic_elements) else max_words
    for i in range(len(words)):
        for j in range(i, min(i + span_limit, len(words))):
            start = words[i][0]
            end = words[j][1]
            slice_text = text[start:end]
            query = " ".join(w[2] for w in words[i : j + 1])
            span_words = j - i + 1
            if span_words <= max_words and by_class:
                dist = pos_distribution(
                    lexicon, query, open_classes if span_words == 1 else ()
                )
                for word_class, prob in dist.items():
                    if prob <= 0.0:
                        continue
                    for e in by_class.get(word_class, ()):
                        found[(start, end, e.name)] = prob
            for e, compiled in regex_elements:
                if compiled.fullmatch(query):
                    found[(start, end, e.name)] = 1.0
            for e, matcher in heuristic_elements:
                prob = matcher(query)
                if prob is not None and prob > 0.0:
                    found[(start, end, e.name)] = float(prob)

    ordered = sorted(found)
    tokens = tuple(
        TokenCandidate(
            id=tid,
            element=element,
            span=Span(start, end),
            lexeme=text[start:end],
            pos_prob=found[(start, end, element)],
        )
        for tid, (start, end, element) in enumerate(ordered)
    )

    # coverage check: every non-whitespace character must fall inside a candidate
    covered = bytearray(len(text))
    for t in tokens:
        for k in range(t.span.start, t.span.end):
            covered[k] = 1
    for start, end, word in words:
        if not all(covered[start:end]):
            raise ScanError(
                f"uncovered input at offset {start}: {word!r}", offset=start, slice_text=word
            )

    by_start: dict[int, list[int]] = {}
    for t in tokens:
        by_start.setdefault(t.span.start, []).append(t.id)
    edges = []
    for t in tokens:
        follow = canonical_position(text, t.span.end)
        for succ in by_start.get(follow, ()):
            edges.append((t.id, succ))
    first = canonical_position(text, 0)
    start_tokens = tuple(t.id for t in tokens if t.span.start == first)
    end_tokens = tuple(
        t.id for t in tokens if canonical_position(text, t.span.end) == len(text)
    )
    return LexicalAnalysisGraph(
        text=text,
        tokens=tokens,
        edges=tuple(sorted(edges)),
        start_tokens=start_tokens,
        end_tokens=end_tokens,
    )


def count_sequences(graph: LexicalAnalysisGraph) -> int:
    """Number of start-to-end paths, by dynamic programming in topological
    order (tokens sorted by span; edges always advance)."""
    if not graph.tokens:
        return 0
    ends = set(graph.end_tokens)
    ways: dict[int, int] = {}
    for t in sorted(graph.tokens, key=lambda t: (-t.span.start, -t.span.end)):
        total = 1 if t.id in ends else 0
        for succ in graph.successors(t.id):
            total += ways[succ]
        ways[t.id] = total
    return sum(ways[t] for t in graph.start_tokens)


def graph_to_json_text(graph: LexicalAnalysisGraph) -> str:
    return json.dumps(graph.to_json(), indent=2, ensure_ascii=False) + "\n"


__all__ = [
    "Span",
    "TokenCandidate",
    "LexicalAnalysisGraph",
    "scan",
    "count_sequences",
    "canonical_position",
    "graph_to_json_text",
]
