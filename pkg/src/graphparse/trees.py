"""Parse trees unpacked from the forest: element instances and candidates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .lexgraph import Span, TokenCandidate
from .uncertainty import Factor, Score


@dataclass
class ElementInstance:
    """One applied element: a lexical token or a composition with members.

    ``members`` maps member name to a child instance, a list of children
    (many members), or None (absent optional member).  Reference members hold
    their parsed reference-form instance; the resolver binds them to real
    targets later.
    """

    element: str
    span: Span
    members: dict[str, "ElementInstance | list[ElementInstance] | None"] = field(default_factory=dict)
    token: TokenCandidate | None = None
    instance_id: int = -1
    parent: "ElementInstance | None" = field(default=None, repr=False, compare=False)

    @property
    def lexeme(self) -> str | None:
        return self.token.lexeme if self.token is not None else None

    def children(self):
        """Child instances in declared member order (lists splice in place)."""
        for name, value in self.members.items():
            if value is None:
                continue
            if isinstance(value, list):
                for child in value:
                    yield name, child
            else:
                yield name, value

    def walk(self):
        yield self
        for _, child in self.children():
            yield from child.walk()

    def depth(self) -> int:
        d = 0
        node = self
        while node.parent is not None:
            node = node.parent
            d += 1
        return d

    def ancestors(self):
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def to_json(self, with_ids: bool = True) -> dict:
        out: dict = {"element": self.element, "span": self.span.to_json()}
        if with_ids:
            out["id"] = self.instance_id
        if self.token is not None:
            out["lexeme"] = self.token.lexeme
        if self.members:
            members = {}
            for name, value in self.members.items():
                if value is None:
                    members[name] = None
                elif isinstance(value, list):
                    members[name] = [c.to_json(with_ids) for c in value]
                else:
                    members[name] = value.to_json(with_ids)
            out["members"] = members
        return out


@dataclass
class PendingReference:
    owner: ElementInstance
    member: str
    form: ElementInstance
    target: str  # declared target element of the reference member


@dataclass
class ParseGraphCandidate:
    """A fully expanded parse tree with its score and factor trace."""

    root: ElementInstance
    text: str
    score: Score
    factors: list[Factor] = field(default_factory=list)

    def __post_init__(self):
        self.instances: list[ElementInstance] = list(self.root.walk())
        for i, inst in enumerate(self.instances):
            inst.instance_id = i
        for inst in self.instances:
            for _, child in inst.children():
                child.parent = inst
        self.root.parent = None

    def instance(self, instance_id: int) -> ElementInstance:
        return self.instances[instance_id]

    def canonical_key(self) -> str:
        key = self.__dict__.get("_canonical")
        if key is None:
            key = json.dumps(self.root.to_json(with_ids=False), sort_keys=True)
            self.__dict__["_canonical"] = key
        return key

    def to_json(self, explain: bool = False) -> dict:
        from .uncertainty import score_to_json

        out = {
            "tree": self.root.to_json(),
            "score": score_to_json(self.score, self.factors if explain else None),
        }
        return out

    def to_dot(self) -> str:
        lines = ["digraph parse {", "  node [shape=box];"]
        for inst in self.instances:
            label = inst.element
            if inst.token is not None:
                label += f"\\n{inst.token.lexeme}"
            lines.append(f'  n{inst.instance_id} [label="{label}"];')
        for inst in self.instances:
            for name, child in inst.children():
                lines.append(f'  n{inst.instance_id} -> n{child.instance_id} [label="{name}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def render_tree_text(inst: ElementInstance, indent: str = "") -> str:
    """Compact indented rendering used by the CLI text format."""
    head = f"{indent}{inst.element} [{inst.span.start},{inst.span.end})"
    if inst.token is not None:
        head += f" {inst.token.lexeme!r}"
    lines = [head]
    for name, value in inst.members.items():
        if value is None:
            lines.append(f"{indent}  {name}: -")
        elif isinstance(value, list):
            lines.append(f"{indent}  {name}:")
            for child in value:
                lines.append(render_tree_text(child, indent + "    "))
        else:
            lines.append(f"{indent}  {name}:")
            lines.append(render_tree_text(value, indent + "    "))
    return "\n".join(lines)


__all__ = ["ElementInstance", "PendingReference", "ParseGraphCandidate", "render_tree_text"]
