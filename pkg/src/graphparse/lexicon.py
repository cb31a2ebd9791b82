"""Lexicon files and part-of-speech probability estimation.

A lexicon is a TSV document, one row per entry::

    lexeme<TAB>word-class<TAB>frequency

Lines starting with ``#`` are ignored; lines starting with ``#!`` carry
directives and are still comments to other tools:

    #! case: fold                      (or: exact)
    #! case-sensitive: ProperNoun      (classes matching exactly despite folding)

Frequencies turn into P(class|lexeme) by normalization over all classes a
lexeme belongs to, which makes the scanner behave as a context-free
part-of-speech tagger.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .errors import LexiconError


@dataclass(frozen=True)
class LexiconEntry:
    lexeme: str
    word_class: str
    frequency: int

    @property
    def word_count(self) -> int:
        return len(self.lexeme.split())


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[LexiconEntry, ...]
    case_policy: str = "fold"  # "fold" | "exact"
    case_sensitive_classes: frozenset[str] = frozenset()

    def __post_init__(self):
        exact: dict[str, list[LexiconEntry]] = {}
        folded: dict[str, list[LexiconEntry]] = {}
        for entry in self.entries:
            exact.setdefault(entry.lexeme, []).append(entry)
            folded.setdefault(entry.lexeme.lower(), []).append(entry)
        object.__setattr__(self, "_exact", exact)
        object.__setattr__(self, "_folded", folded)
        object.__setattr__(
            self, "max_words", max((e.word_count for e in self.entries), default=1)
        )

    def _folds(self, word_class: str) -> bool:
        return self.case_policy == "fold" and word_class not in self.case_sensitive_classes

    def lookup(self, lexeme: str) -> list[LexiconEntry]:
        """Entries matching ``lexeme`` under the case policy.

        Case-sensitive classes match the lexeme exactly; every other class
        matches after folding both sides to lower case (single internal
        spaces are the caller's normalization duty).
        """
        out = []
        for entry in self._exact.get(lexeme, ()):
            if not self._folds(entry.word_class):
                out.append(entry)
        for entry in self._folded.get(lexeme.lower(), ()):
            if self._folds(entry.word_class):
                out.append(entry)
        return out

    def known(self, lexeme: str) -> bool:
        return bool(self.lookup(lexeme))


def load_lexicon(document: str) -> Lexicon:
    """Parse a lexicon document; duplicate (lexeme, class) rows are an error."""
    entries: list[LexiconEntry] = []
    seen: set[tuple[str, str]] = set()
    case_policy = "fold"
    case_sensitive: set[str] = set()
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip("\n")
        if not line.strip():
            continue
        if line.startswith("#!"):
            directive = line[2:].strip()
            if ":" not in directive:
                raise LexiconError(f"line {lineno}: malformed directive {directive!r}")
            key, _, value = directive.partition(":")
            key = key.strip()
            value = value.strip()
            if key == "case":
                if value not in ("fold", "exact"):
                    raise LexiconError(f"line {lineno}: unknown case policy {value!r}")
                case_policy = value
            elif key == "case-sensitive":
                case_sensitive.update(value.split())
            else:
                raise LexiconError(f"line {lineno}: unknown directive {key!r}")
            continue
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise LexiconError(f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}")
        lexeme, word_class, freq_text = (f.strip() for f in fields)
        if not lexeme or not word_class:
            raise LexiconError(f"line {lineno}: empty lexeme or word class")
        if len(lexeme.split()) != len(lexeme.split(" ")) or "  " in lexeme:
            raise LexiconError(f"line {lineno}: multi-word lexemes use single internal spaces")
        try:
            frequency = int(freq_text)
        except ValueError:
            raise LexiconError(f"line {lineno}: frequency {freq_text!r} is not an integer") from None
        if frequency < 0:
            raise LexiconError(f"line {lineno}: negative frequency {frequency}")
        key = (lexeme, word_class)
        if key in seen:
            raise LexiconError(f"line {lineno}: duplicate entry {lexeme!r}/{word_class}")
        seen.add(key)
        entries.append(LexiconEntry(lexeme, word_class, frequency))
    return Lexicon(
        entries=tuple(entries),
        case_policy=case_policy,
        case_sensitive_classes=frozenset(case_sensitive),
    )


def load_lexicon_file(path) -> Lexicon:
    with io.open(path, "r", encoding="utf-8") as handle:
        return load_lexicon(handle.read())


def pos_distribution(lexicon: Lexicon, lexeme: str, open_classes=()) -> dict[str, float]:
    """P(word-class | lexeme), from lexicon frequencies.

    Known lexemes normalize their class frequencies; a known lexeme whose
    frequencies are all zero has no usable statistics and is an error.
    Unknown lexemes fall back to a uniform distribution over the given open
    word classes (empty mapping when no open classes are designated).
    """
    entries = lexicon.lookup(lexeme)
    if not entries:
        classes = sorted(set(open_classes))
        if not classes:
            return {}
        share = 1.0 / len(classes)
        return {c: share for c in classes}
    totals: dict[str, int] = {}
    for entry in entries:
        totals[entry.word_class] = totals.get(entry.word_class, 0) + entry.frequency
    grand = sum(totals.values())
    if grand == 0:
        raise LexiconError(f"degenerate lexeme {lexeme!r}: all class frequencies are zero")
    return {c: totals[c] / grand for c in sorted(totals) if totals[c] > 0}


__all__ = ["Lexicon", "LexiconEntry", "load_lexicon", "load_lexicon_file", "pos_distribution"]
