"""Named registries for the pluggable seams: constraints, probability
evaluators, heuristic pattern matchers and reference scorers.

All registered callables must be pure functions of their arguments; ranking
determinism depends on it.  Re-registration under an existing name is
rejected so a model always means the same thing.
"""

from __future__ import annotations

from .errors import RegistryError


class Registry:
    def __init__(self, kind: str, initial=None):
        self.kind = kind
        self._entries: dict[str, object] = {}
        for name, fn in (initial or {}).items():
            self.register(name, fn)

    def register(self, name: str, fn):
        if name in self._entries:
            raise RegistryError(f"{self.kind} {name!r} is already registered")
        self._entries[name] = fn
        return fn

    def get(self, name: str):
        try:
            return self._entries[name]
        except KeyError:
            raise RegistryError(f"unknown {self.kind} {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list[str]:
        return sorted(self._entries)


# ---------------------------------------------------------------------------
# Built-in constraints.
#
# A constraint receives the completed instance view and a parameter mapping
# and answers whether the instance is valid.  Views expose ``element``,
# ``span`` (character offsets), ``lexeme`` (exact input slice), ``member(n)``
# returning a child view, a list of child views, or None, and
# ``float_children`` as (member, view) pairs in span order.


def _single(view, member):
    child = view.member(member)
    if isinstance(child, list):
        return child[0] if child else None
    return child


def constraint_member_equals(view, params):
    """The named member's lexeme equals the given text (case folded)."""
    child = _single(view, params["member"])
    if child is None:
        return False
    return child.lexeme.lower() == params["lexeme"].lower()


def constraint_adjacent(view, params):
    """When both members are present, only whitespace separates them."""
    first = _single(view, params["first"])
    second = _single(view, params["second"])
    if first is None or second is None:
        return True
    gap = view.text[first.span.end : second.span.start]
    return second.span.start >= first.span.end and gap.strip() == ""

def constraint_floating_interior(view, params):
    """A floating member, when present, sits strictly between two other
    children rather than before the first or after the last."""
    name = params["member"]
    others = []
    for member, child in view.all_children():
        if member == name:
            continue
        others.append(child.span)
    floats = [child.span for member, child in view.all_children() if member == name]
    if not floats:
        return True
    if len(others) < 2:
        return False
    lo = min(s.start for s in others)
    hi = max(s.end for s in others)
    return all(lo < s.start and s.end < hi for s in floats)


_PLURAL_EXCEPTIONS = {
    # lexemes ending in "s" that are singular
    "bus", "gas", "lens", "news", "series", "species", "physics", "analysis",
}
_IRREGULAR_PLURALS = {"men", "women", "children", "people", "feet", "teeth", "mice", "geese"}
_SINGULAR_DETERMINERS = {"a", "an", "every", "each", "this", "that", "one"}
_PLURAL_DETERMINERS = {"these", "those", "many", "few", "several", "both"}


def _looks_plural(lexeme: str) -> bool:
    word = lexeme.lower()
    if word in _IRREGULAR_PLURALS:
        return True
    if word in _PLURAL_EXCEPTIONS:
        return False
    return word.endswith("s") and not word.endswith("ss")


def constraint_en_number_agreement(view, params):
    """English determiner/noun number agreement, by suffix heuristic."""
    det = _single(view, params["determiner"])
    noun = _single(view, params["noun"])
    if det is None or noun is None:
        return True
    det_word = det.lexeme.lower()
    if det_word in _SINGULAR_DETERMINERS:
        return not _looks_plural(noun.lexeme)
    if det_word in _PLURAL_DETERMINERS:
        return _looks_plural(noun.lexeme)
    return True


def default_constraints() -> Registry:
    return Registry(
        "constraint",
        {
            "member_equals": constraint_member_equals,
            "adjacent": constraint_adjacent,
            "floating_interior": constraint_floating_interior,
            "en_number_agreement": constraint_en_number_agreement,
        },
    )


# ---------------------------------------------------------------------------
# Built-in heuristic matchers: candidate slice text -> probability or None.


def matcher_capitalized(slice_text: str):
    words = slice_text.split()
    if words and all(w[:1].isupper() for w in words):
        return 0.9
    return None


def matcher_number(slice_text: str):
    try:
        float(slice_text)
    except ValueError:
        return None
    return 1.0


def default_matchers() -> Registry:
    return Registry(
        "matcher",
        {
            "capitalized": matcher_capitalized,
            "number": matcher_number,
        },
    )


# ---------------------------------------------------------------------------
# Evaluators: (instance, context) -> linear score.  None ship by default;
# the registry exists so models can name their own.


def default_evaluators() -> Registry:
    return Registry("evaluator")


def default_scorers() -> Registry:
    # reference scorers; populated lazily by refs to avoid an import cycle
    from .refs import DistanceDecayScorer, IdentityScorer

    return Registry(
        "scorer",
        {
            "distance_decay": DistanceDecayScorer(),
            "identity": IdentityScorer(),
        },
    )


__all__ = [
    "Registry",
    "default_constraints",
    "default_matchers",
    "default_evaluators",
    "default_scorers",
]
