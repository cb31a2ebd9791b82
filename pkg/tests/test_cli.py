import io
import json
import os
import textwrap

import jsonschema
import pytest

from graphparse import count_sequences, load_lexicon, load_model, scan
from graphparse.cli import main
from graphparse.xbar import lexicon_path, model_path

from .dot_checker import check_dot

DEMO = "I saw a picture of New York"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- validate ----------------------------------------------------------------


def test_validate_bundled_model(capsys):
    code, out, err = run(capsys, "validate", "--model", model_path())
    assert code == 0
    assert out == ""


def test_validate_reports_errors(capsys, tmp_path):
    bad = tmp_path / "bad.model.json"
    bad.write_text(json.dumps({
        "name": "m", "start": "Top",
        "elements": [
            {"name": "W", "kind": "lexical",
             "pattern": {"strategy": "regex", "expression": "x"}},
            {"name": "Top", "kind": "composition",
             "members": [{"name": "w", "target": "W"}],
             "probability": {"mode": "value", "value": 1.2}},
        ],
    }))
    code, out, err = run(capsys, "validate", "--model", str(bad))
    assert code == 1
    error_lines = [l for l in out.splitlines() if l.startswith("ERROR")]
    assert len(error_lines) == 1
    assert "out of range" in error_lines[0]


def test_validate_missing_file(capsys):
    code, out, err = run(capsys, "validate", "--model", "/nonexistent/nope.json")
    assert code == 2


# --- scan --------------------------------------------------------------------


def test_scan_text_format_matches_api(capsys, english):
    code, out, err = run(
        capsys, "scan", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", DEMO,
    )
    assert code == 0
    model, lexicon = english
    expected = count_sequences(scan(DEMO, model, lexicon))
    assert out.strip().splitlines()[-1] == f"sequences: {expected}"


def test_scan_empty_input(capsys):
    code, out, err = run(
        capsys, "scan", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", "   ",
    )
    assert code == 0
    assert out.strip() == "sequences: 0"


def test_scan_uncovered_input(capsys):
    code, out, err = run(
        capsys, "scan", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", "I saw a zzgrxx",
    )
    assert code == 1
    assert "offset" in err


def test_scan_dot_output_is_wellformed(capsys, english):
    code, out, err = run(
        capsys, "scan", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", DEMO, "--format", "dot",
    )
    assert code == 0
    dot = out.rsplit("sequences:", 1)[0]
    nodes, edges = check_dot(dot)
    model, lexicon = english
    graph = scan(DEMO, model, lexicon)
    assert len(nodes) == len(graph.tokens)
    assert len(edges) == len(graph.edges)


def test_scan_json_schema(capsys):
    schema = {
        "type": "object",
        "required": ["tokens", "edges"],
        "properties": {
            "tokens": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id", "element", "start", "end", "lexeme", "posProb"],
                    "properties": {
                        "id": {"type": "integer"},
                        "element": {"type": "string"},
                        "start": {"type": "integer", "minimum": 0},
                        "end": {"type": "integer", "minimum": 1},
                        "lexeme": {"type": "string"},
                        "posProb": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    },
                    "additionalProperties": False,
                },
            },
            "edges": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2,
                          "maxItems": 2},
            },
        },
        "additionalProperties": False,
    }
    code, out, err = run(
        capsys, "scan", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", DEMO, "--format", "json",
    )
    assert code == 0
    body = out.rsplit("sequences:", 1)[0]
    jsonschema.validate(json.loads(body), schema)


# --- parse -------------------------------------------------------------------

SCORE_SCHEMA = {
    "type": "object",
    "required": ["algebra", "value"],
    "properties": {
        "algebra": {"enum": ["probabilistic", "possibilistic"]},
        "value": {"type": "number", "minimum": 0, "maximum": 1},
        "factors": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "instanceId": {"type": "integer"},
                    "tokenId": {"type": "integer"},
                    "referenceId": {"type": "integer"},
                    "value": {"type": "number"},
                },
                "required": ["value"],
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

TREE_SCHEMA = {
    "type": "object",
    "required": ["element", "span", "id"],
    "properties": {
        "element": {"type": "string"},
        "span": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "id": {"type": "integer"},
        "lexeme": {"type": "string"},
        "members": {
            "type": "object",
            "additionalProperties": {
                "anyOf": [
                    {"type": "null"},
                    {"$ref": "#/$defs/tree"},
                    {"type": "array", "items": {"$ref": "#/$defs/tree"}},
                ]
            },
        },
    },
    "additionalProperties": False,
}

PARSE_SCHEMA = {
    "type": "object",
    "$defs": {"tree": TREE_SCHEMA},
    "required": ["input", "graphs"],
    "properties": {
        "input": {"type": "string"},
        "graphs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["tree", "references", "score"],
                "properties": {
                    "tree": {"$ref": "#/$defs/tree"},
                    "references": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["from", "to", "kind", "score"],
                            "properties": {
                                "from": {"type": "array", "minItems": 2, "maxItems": 2},
                                "to": {"type": ["integer", "null"]},
                                "kind": {"enum": ["anaphoric", "cataphoric", "recursive",
                                                  "unresolved"]},
                                "score": {"type": "number"},
                            },
                            "additionalProperties": False,
                        },
                    },
                    "score": SCORE_SCHEMA,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def test_parse_demo_json(capsys):
    code, out, err = run(
        capsys, "parse", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", DEMO, "--top-k", "1", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, PARSE_SCHEMA)
    assert len(payload["graphs"]) == 1
    assert 0.0 < payload["graphs"][0]["score"]["value"] <= 1.0


def toy_two_tree_files(tmp_path):
    model = tmp_path / "toy.model.json"
    model.write_text(json.dumps({
        "name": "toy", "start": "S",
        "elements": [
            {"name": "A", "kind": "lexical",
             "pattern": {"strategy": "lexicon", "lexiconClass": "A"}},
            {"name": "One", "kind": "composition",
             "members": [{"name": "a", "target": "A",
                          "multiplicity": {"many": {"min": 1}}}],
             "probability": {"mode": "value", "value": 0.3}},
            {"name": "Two", "kind": "composition",
             "members": [{"name": "first", "target": "A"},
                         {"name": "rest", "target": "A",
                          "multiplicity": {"many": {"min": 1}}}],
             "probability": {"mode": "value", "value": 0.6}},
            {"name": "S", "kind": "alternative", "variants": ["One", "Two"]},
        ],
    }))
    lexicon = tmp_path / "toy.tsv"
    lexicon.write_text("a\tA\t1\n")
    return str(model), str(lexicon)


def test_parse_k_larger_than_tree_count(capsys, tmp_path):
    model, lexicon = toy_two_tree_files(tmp_path)
    code, out, err = run(
        capsys, "parse", "--model", model, "--lexicon", lexicon,
        "--input", "a a", "--top-k", "1000", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["graphs"]) == 2


def test_parse_possibilistic_scores_are_min_of_factors(capsys, tmp_path):
    model, lexicon = toy_two_tree_files(tmp_path)
    code, out, err = run(
        capsys, "parse", "--model", model, "--lexicon", lexicon,
        "--input", "a a a", "--algebra", "possibilistic", "--explain",
        "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["graphs"]
    for graph in payload["graphs"]:
        factors = [f["value"] for f in graph["score"]["factors"]]
        assert graph["score"]["value"] == min(factors)
        assert graph["score"]["algebra"] == "possibilistic"


def test_parse_no_parse_exit_code(capsys):
    code, out, err = run(
        capsys, "parse", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", "saw I",
    )
    assert code == 1
    assert "offset" in err and "expected" in err


def test_parse_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("birds fly\n"))
    code, out, err = run(
        capsys, "parse", "--model", model_path(), "--lexicon", lexicon_path(),
        "--input", "-", "--top-k", "1",
    )
    assert code == 0
    assert "#1 score=" in out


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["parse", "--model"])
    assert exc.value.code == 2


def test_top_k_zero_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["parse", "--model", model_path(), "--lexicon", lexicon_path(),
              "--input", "x", "--top-k", "0"])
    assert exc.value.code == 2


def test_registry_manifest_loading(capsys, tmp_path, monkeypatch):
    fixture = tmp_path / "extra_constraints.py"
    fixture.write_text(textwrap.dedent("""
        def always_false(view, params):
            return False
    """))
    manifest = tmp_path / "registry.json"
    manifest.write_text(json.dumps({
        "constraints": {"always_false": "extra_constraints:always_false"}
    }))
    model = tmp_path / "m.model.json"
    model.write_text(json.dumps({
        "name": "m", "start": "Top",
        "elements": [
            {"name": "A", "kind": "lexical",
             "pattern": {"strategy": "lexicon", "lexiconClass": "A"}},
            {"name": "Top", "kind": "composition",
             "members": [{"name": "a", "target": "A"}],
             "constraints": [{"name": "always_false"}]},
        ],
    }))
    lexicon = tmp_path / "l.tsv"
    lexicon.write_text("a\tA\t1\n")
    monkeypatch.syspath_prepend(str(tmp_path))
    monkeypatch.setenv("GRAPHPARSE_REGISTRY", str(manifest))
    code, out, err = run(
        capsys, "parse", "--model", str(model), "--lexicon", str(lexicon), "--input", "a",
    )
    assert code == 1  # the registered constraint rejected every derivation
    assert "constraint" in err


def test_cli_output_is_deterministic(capsys):
    args = ["parse", "--model", model_path(), "--lexicon", lexicon_path(),
            "--input", DEMO, "--top-k", "3", "--explain", "--format", "json"]
    code1, out1, err1 = run(capsys, *args)
    code2, out2, err2 = run(capsys, *args)
    assert (code1, out1, err1) == (code2, out2, err2)
