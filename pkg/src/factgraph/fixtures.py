"""Shipped verification fixtures and their self-check.

Each fixture bundles a tiny corpus (CoNLL-U, annotations, manifest) with
the invariants it is expected to satisfy, e.g. the number of nonzero
adjacency entries. fixture_selfcheck re-validates everything and reports
one (name, passed, message) triple per fixture; the CLI's selfcheck
command turns failures into a nonzero exit.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

from . import corpus
from .errors import FactGraphError
from .structure import syntactic_adjacency


@dataclass
class Fixture:
    name: str
    conllu: str
    annotations: str
    manifest: str
    # expectations: sentence_id -> {"n": tokens, "asyn_ones": nonzero count}
    expected: dict[str, dict[str, int]] = field(default_factory=dict)


def _data_text(filename: str) -> str:
    return (importlib.resources.files("factgraph")
            .joinpath("data").joinpath(filename).read_text(encoding="utf-8"))


def builtin_fixtures() -> list[Fixture]:
    return [
        Fixture(
            name="figure_tree",
            conllu=_data_text("figure_tree.conllu"),
            annotations=_data_text("figure_tree.annotations.tsv"),
            manifest=_data_text("figure_tree.manifest.tsv"),
            expected={"fig-will-go": {"n": 15, "asyn_ones": 15 + 2 * 14}},
        ),
        Fixture(
            name="tiny",
            conllu=_data_text("tiny.conllu"),
            annotations=_data_text("tiny.annotations.tsv"),
            manifest=_data_text("tiny.manifest.tsv"),
            expected={
                "tiny-she-left": {"n": 2, "asyn_ones": 2 + 2 * 1},
                "tiny-one": {"n": 1, "asyn_ones": 1},
                "tiny-grad": {"n": 4, "asyn_ones": 4 + 2 * 3},
            },
        ),
    ]


def check_fixture(fixture: Fixture) -> tuple[bool, str]:
    """Validate one fixture against corpus rules and its declared expectations."""
    try:
        parses = corpus.parse_conllu(fixture.conllu)
        annotations = corpus.parse_annotations(fixture.annotations)
        manifest = corpus.parse_manifest(fixture.manifest)
        split = corpus.join_and_split(parses, annotations, manifest)
    except FactGraphError as exc:
        return False, f"validation failed: {exc}"
    if not (split.train or split.dev or split.test):
        return False, "fixture produced no instances"
    by_id = dict(parses)
    for sid, expect in fixture.expected.items():
        tokens = by_id.get(sid)
        if tokens is None:
            return False, f"expected sentence {sid!r} missing"
        if "n" in expect and len(tokens) != expect["n"]:
            return False, (f"{sid}: expected {expect['n']} tokens, "
                           f"got {len(tokens)}")
        ones = int(syntactic_adjacency(tokens).data.sum())
        if "asyn_ones" in expect and ones != expect["asyn_ones"]:
            return False, (f"{sid}: expected {expect['asyn_ones']} adjacency "
                           f"entries, got {ones}")
        n = len(tokens)
        if ones != n + 2 * (n - 1):
            return False, f"{sid}: adjacency count {ones} violates n + 2(n-1)"
    return True, "ok"


def fixture_selfcheck() -> list[tuple[str, bool, str]]:
    results = []
    for fixture in builtin_fixtures():
        ok, message = check_fixture(fixture)
        results.append((fixture.name, ok, message))
    return results


def gradcheck_fixture() -> corpus.SentenceInstance:
    """The 4-token sentence the gradcheck command runs on."""
    parses = corpus.parse_conllu(_data_text("tiny.conllu"))
    annotations = corpus.parse_annotations(_data_text("tiny.annotations.tsv"))
    by_id = dict(parses)
    for sid, anchor, score in annotations:
        if sid == "tiny-grad":
            return corpus.SentenceInstance(sentence_id=sid, tokens=tuple(by_id[sid]),
                                           anchor_index=anchor, gold_score=score)
    raise FactGraphError("tiny-grad fixture missing")
