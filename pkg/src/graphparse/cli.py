"""Command-line front end.

Three subcommands exposing the pipeline stages::

    graphparse validate --model F
    graphparse scan     --model F --lexicon F --input S|- [--format json|dot|text]
    graphparse parse    --model F --lexicon F --input S|- [--top-k N]
                        [--algebra probabilistic|possibilistic] [--explain]
                        [--format json|dot|text]

Exit codes: 0 success, 1 domain failure (validation errors, uncovered input,
no parse), 2 usage or I/O errors.  Output is byte-deterministic for fixed
inputs and flags; there is no randomized behavior anywhere in the pipeline.

The environment variable ``GRAPHPARSE_REGISTRY`` may name a JSON manifest of
extra registrations, e.g.::

    {"constraints": {"my_check": "mypkg.checks:my_check"},
     "evaluators": {"my_eval": "mypkg.scores:my_eval"},
     "matchers": {"my_matcher": "mypkg.lex:my_matcher"}}
"""

from __future__ import annotations

import argparse
import importlib
import json
import os
import sys

from .errors import GraphParseError, NoParseError, NothingToParseError, ScanError
from .lexgraph import count_sequences, scan
from .lexicon import load_lexicon
from .model import compile_grammar, has_errors, load_model, validate_model
from .pipeline import parse_text
from .registry import default_constraints, default_evaluators, default_matchers
from .uncertainty import get_algebra
from .trees import render_tree_text

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _read_input(value: str) -> str:
    if value == "-":
        return sys.stdin.read()
    return value


def _load_registries():
    constraints = default_constraints()
    evaluators = default_evaluators()
    matchers = default_matchers()
    manifest_path = os.environ.get("GRAPHPARSE_REGISTRY")
    if manifest_path:
        manifest = json.loads(_read_file(manifest_path))
        targets = {"constraints": constraints, "evaluators": evaluators, "matchers": matchers}
        for section, registry in targets.items():
            for name, spec in manifest.get(section, {}).items():
                module_name, _, attr = spec.partition(":")
                fn = getattr(importlib.import_module(module_name), attr)
                registry.register(name, fn)
    return constraints, evaluators, matchers


def cmd_validate(args) -> int:
    try:
        document = _read_file(args.model)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        model = load_model(document)
    except GraphParseError as exc:
        print(f"ERROR $: {exc}")
        return EXIT_DOMAIN
    diagnostics = validate_model(model)
    for d in diagnostics:
        print(f"{d.severity.upper()} {d.path}: {d.message}")
    return EXIT_DOMAIN if has_errors(diagnostics) else EXIT_OK


def _scan_graph(args, matchers):
    model = load_model(_read_file(args.model))
    diagnostics = validate_model(model)
    if has_errors(diagnostics):
        raise GraphParseError(
            "model has validation errors; run `graphparse validate` for details"
        )
    lexicon = load_lexicon(_read_file(args.lexicon))
    text = _read_input(args.input)
    return model, lexicon, text


def cmd_scan(args) -> int:
    try:
        model, lexicon, text = _scan_graph(args, None)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        graph = scan(text, model, lexicon, _load_registries()[2])
    except ScanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    sequences = count_sequences(graph)
    if args.format == "json":
        print(json.dumps(graph.to_json(), indent=2, ensure_ascii=False))
    elif args.format == "dot":
        print(graph.to_dot(), end="")
    else:
        for t in graph.tokens:
            print(f"{t.id}\t{t.element}\t[{t.span.start},{t.span.end})\t{t.lexeme}\t{t.pos_prob:.6g}")
        for a, b in graph.edges:
            print(f"edge\t{a} -> {b}")
    print(f"sequences: {sequences}")
    return EXIT_OK


def cmd_parse(args) -> int:
    try:
        model, lexicon, text = _scan_graph(args, None)
        constraints, evaluators, matchers = _load_registries()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    algebra = get_algebra(args.algebra)
    try:
        graphs = parse_text(
            model,
            lexicon,
            text,
            k=args.top_k,
            algebra=algebra,
            constraints=constraints,
            evaluators=evaluators,
            matchers=matchers,
        )
    except (NoParseError, NothingToParseError, ScanError) as exc:
        offset = getattr(exc, "offset", None)
        expected = getattr(exc, "expected", None)
        message = f"error: {exc}"
        if expected:
            message += f" (expected: {', '.join(expected)})"
        print(message, file=sys.stderr)
        return EXIT_DOMAIN
    if args.format == "json":
        payload = {"input": text, "graphs": [g.to_json(explain=args.explain) for g in graphs]}
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    elif args.format == "dot":
        for g in graphs:
            print(g.to_dot(), end="")
    else:
        for i, g in enumerate(graphs, start=1):
            print(f"#{i} score={g.score.value:.12g} algebra={g.score.algebra}")
            print(render_tree_text(g.tree.root))
            for edge in g.references:
                target = "unresolved" if edge.to_instance is None else f"instance {edge.to_instance}"
                print(
                    f"  ref {edge.from_instance}.{edge.member} -> {target} "
                    f"[{edge.kind}] score={edge.score.value:.6g}"
                )
            if args.explain:
                for f in g.factors:
                    print(f"  factor {f.kind}:{f.ref} = {f.value:.12g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphparse",
        description="Model-driven probabilistic parser generator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a model document")
    p_validate.add_argument("--model", required=True)
    p_validate.set_defaults(fn=cmd_validate)

    p_scan = sub.add_parser("scan", help="scan input into a lexical analysis graph")
    p_scan.add_argument("--model", required=True)
    p_scan.add_argument("--lexicon", required=True)
    p_scan.add_argument("--input", required=True, help="input text, or - for stdin")
    p_scan.add_argument("--format", choices=("json", "dot", "text"), default="text")
    p_scan.set_defaults(fn=cmd_scan)

    p_parse = sub.add_parser("parse", help="parse input into ranked syntax graphs")
    p_parse.add_argument("--model", required=True)
    p_parse.add_argument("--lexicon", required=True)
    p_parse.add_argument("--input", required=True, help="input text, or - for stdin")
    p_parse.add_argument("--top-k", type=int, default=3)
    p_parse.add_argument(
        "--algebra", choices=("probabilistic", "possibilistic"), default="probabilistic"
    )
    p_parse.add_argument("--explain", action="store_true")
    p_parse.add_argument("--format", choices=("json", "dot", "text"), default="text")
    p_parse.set_defaults(fn=cmd_parse)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "top_k", 1) < 1:
        parser.error("--top-k must be at least 1")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
