"""graphparse: a model-driven probabilistic parser generator.

Declare a language as data (elements, members, references, constraints,
probability attachments), scan ambiguous input into a lexical analysis
graph, parse it into a shared packed parse forest, resolve references into
abstract syntax graphs, and rank the candidates under a pluggable
uncertainty algebra.
"""

from .engine import (
    ParseForest,
    active_kernel_id,
    available_kernels,
    check_constraints,
    enumerate_graphs,
    parse,
)
from .errors import (
    AlgebraError,
    BundleError,
    EnumerationOverflowError,
    GraphParseError,
    LexiconError,
    ModelSyntaxError,
    ModelValidationError,
    NoParseError,
    NothingToParseError,
    RegistryError,
    ScanError,
)
from .lexgraph import LexicalAnalysisGraph, Span, TokenCandidate, count_sequences, scan
from .lexicon import Lexicon, load_lexicon, load_lexicon_file, pos_distribution
from .model import (
    ConstraintSpec,
    Diagnostic,
    ElementDef,
    Grammar,
    LanguageModel,
    MemberDef,
    PatternSpec,
    ProbabilitySpec,
    compile_grammar,
    load_model,
    load_model_file,
    serialize_model,
    validate_model,
)
from .pipeline import parse_text
from .refs import (
    AbstractSyntaxGraph,
    ReferenceEdge,
    classify,
    context_graph,
    reference_metrics,
    resolve,
)
from .registry import (
    Registry,
    default_constraints,
    default_evaluators,
    default_matchers,
    default_scorers,
)
from .trees import ElementInstance, ParseGraphCandidate
from .uncertainty import (
    ALGEBRAS,
    POSSIBILISTIC,
    PROBABILISTIC,
    EvaluationContext,
    Factor,
    Score,
    ValuationAlgebra,
    cast,
    element_score,
    get_algebra,
    graph_score,
    rank,
)
from .xbar import build_english_model, demo_parse, demo_sentences

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "LanguageModel", "ElementDef", "MemberDef", "PatternSpec", "ProbabilitySpec",
    "ConstraintSpec", "Diagnostic", "Grammar",
    "load_model", "load_model_file", "serialize_model", "validate_model", "compile_grammar",
    # lexicon / scanning
    "Lexicon", "load_lexicon", "load_lexicon_file", "pos_distribution",
    "Span", "TokenCandidate", "LexicalAnalysisGraph", "scan", "count_sequences",
    # engine
    "parse", "enumerate_graphs", "check_constraints", "ParseForest",
    "available_kernels", "active_kernel_id",
    # trees / refs
    "ElementInstance", "ParseGraphCandidate",
    "AbstractSyntaxGraph", "ReferenceEdge", "classify", "context_graph",
    "reference_metrics", "resolve",
    # uncertainty
    "Score", "Factor", "ValuationAlgebra", "PROBABILISTIC", "POSSIBILISTIC",
    "ALGEBRAS", "get_algebra", "cast", "element_score", "graph_score", "rank",
    "EvaluationContext",
    # registries
    "Registry", "default_constraints", "default_evaluators", "default_matchers",
    "default_scorers",
    # pipeline / bundle
    "parse_text", "build_english_model", "demo_parse", "demo_sentences",
    # errors
    "GraphParseError", "ModelSyntaxError", "ModelValidationError", "LexiconError",
    "ScanError", "NothingToParseError", "NoParseError", "RegistryError",
    "AlgebraError", "EnumerationOverflowError", "BundleError",
]
