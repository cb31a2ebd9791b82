"""The bundled X-bar natural-language model and its English instantiation.

The general model mirrors classic X-bar structure: sentences hold clauses,
clauses are simple or coordinate, and five complement families (nominal,
verbal, adverbial, adjectival, prepositional) recurse through phrases,
composites and subordinate clauses.  English specifics live in the lexicon
(word classes, frequencies, case-sensitive proper nouns), hand-set
probability attachments, and a couple of agreement/placement constraints.

Two deliberate adaptations for an English parser are documented in detail in
the README: the simple clause requires its subject (English drops no
subjects) and takes an optional set of clause-level complements, and a plain
adjectival phrase grounds the adjectival family.

Bundle integrity is guarded by sha256 checksums in data/MANIFEST.json.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources

from .errors import BundleError, ModelValidationError
from .lexicon import Lexicon, load_lexicon
from .model import LanguageModel, compile_grammar, has_errors, load_model, validate_model
from .pipeline import parse_text
from .refs import AbstractSyntaxGraph
from .uncertainty import PROBABILISTIC, ValuationAlgebra

MODEL_FILE = "models/xbar.model.json"
LEXICON_FILE = "lexicons/english.tsv"
CORPUS_FILE = "corpora/demo_sentences.txt"
_BUNDLE_FILES = (MODEL_FILE, LEXICON_FILE, CORPUS_FILE)


def _data_root():
    return resources.files("graphparse").joinpath("data")


def data_path(relative: str) -> str:
    """Filesystem path of a bundled data file (for CLI --model/--lexicon)."""
    return str(_data_root().joinpath(relative))


def model_path() -> str:
    return data_path(MODEL_FILE)


def lexicon_path() -> str:
    return data_path(LEXICON_FILE)


def corpus_path() -> str:
    return data_path(CORPUS_FILE)


def _manifest() -> dict:
    try:
        raw = _data_root().joinpath("MANIFEST.json").read_text(encoding="utf-8")
    except OSError as exc:
        raise BundleError(f"bundle manifest missing: {exc}") from exc
    return json.loads(raw)


def bundled_text(relative: str, verify: bool = True) -> str:
    try:
        data = _data_root().joinpath(relative).read_bytes()
    except OSError as exc:
        raise BundleError(f"bundled file {relative} missing: {exc}") from exc
    if verify:
        digest = hashlib.sha256(data).hexdigest()
        expected = _manifest().get(relative)
        if expected != digest:
            raise BundleError(
                f"bundled file {relative} failed its checksum "
                f"(expected {expected}, got {digest})"
            )
    return data.decode("utf-8")


def refresh_manifest() -> dict:
    """Regenerate data/MANIFEST.json from the current bundle contents."""
    manifest = {}
    for name in _BUNDLE_FILES:
        data = _data_root().joinpath(name).read_bytes()
        manifest[name] = hashlib.sha256(data).hexdigest()
    target = _data_root().joinpath("MANIFEST.json")
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def build_english_model(verify: bool = True) -> tuple[LanguageModel, Lexicon]:
    """Load and validate the bundled model and lexicon.

    Raises :class:`BundleError` on checksum mismatch and
    :class:`ModelValidationError` if the shipped model ever stops validating.
    """
    model = load_model(bundled_text(MODEL_FILE, verify))
    diagnostics = [d for d in validate_model(model) if d.severity == "error"]
    if diagnostics:
        raise ModelValidationError(diagnostics)
    lexicon = load_lexicon(bundled_text(LEXICON_FILE, verify))
    compile_grammar(model)  # compiles cleanly or raises
    return model, lexicon


def demo_sentences() -> list[str]:
    lines = bundled_text(CORPUS_FILE).splitlines()
    return [l.strip() for l in lines if l.strip() and not l.lstrip().startswith("#")]


def demo_parse(
    sentence: str,
    k: int = 3,
    algebra: ValuationAlgebra = PROBABILISTIC,
    **kwargs,
) -> list[AbstractSyntaxGraph]:
    """End-to-end parse of ``sentence`` with the bundled English model."""
    model, lexicon = build_english_model()
    return parse_text(model, lexicon, sentence, k=k, algebra=algebra, **kwargs)


__all__ = [
    "build_english_model",
    "demo_parse",
    "demo_sentences",
    "bundled_text",
    "refresh_manifest",
    "data_path",
    "model_path",
    "lexicon_path",
    "corpus_path",
    "MODEL_FILE",
    "LEXICON_FILE",
    "CORPUS_FILE",
]
