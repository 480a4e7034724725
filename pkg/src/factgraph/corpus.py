"""Corpus ingestion: CoNLL-U parses, factuality annotations, embeddings, splits.

File formats:
  CoNLL-U        10 tab-separated columns; only ID, FORM, HEAD, DEPREL are
                 consumed. Multiword-token / empty-node lines (ID with '-'
                 or '.') are skipped. Sentence ids come from '# sent_id ='
                 comments, falling back to s1, s2, ...
  annotations    sentence_id<TAB>anchor_index<TAB>score (anchor 0-based,
                 score in [-3, +3]); '#' comments allowed.
  embeddings     token SP v1 SP ... SP vD per line, UTF-8.
  manifest       sentence_id<TAB>{train|dev|test}.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, ParseError, ScoreRangeError, TreeStructureError

SCORE_MIN, SCORE_MAX = -3.0, 3.0


@dataclass(frozen=True)
class Token:
    index: int           # 0-based position
    form: str
    head: int | None     # 0-based head position, None for the root
    deprel: str = "dep"  # ingested for completeness, unused by the model


@dataclass(frozen=True)
class SentenceInstance:
    """One (sentence, annotated event anchor) pair."""

    sentence_id: str
    tokens: tuple[Token, ...]
    anchor_index: int
    gold_score: float

    def __post_init__(self):
        n = len(self.tokens)
        if n < 1:
            raise AlignmentError(f"sentence {self.sentence_id!r} has no tokens")
        if not 0 <= self.anchor_index < n:
            raise AlignmentError(
                f"sentence {self.sentence_id!r}: anchor {self.anchor_index} "
                f"out of bounds for length {n}")
        if not SCORE_MIN <= self.gold_score <= SCORE_MAX:
            raise ScoreRangeError(
                f"sentence {self.sentence_id!r}: score {self.gold_score} "
                f"outside [{SCORE_MIN}, {SCORE_MAX}]")


@dataclass
class DatasetSplit:
    train: list[SentenceInstance] = field(default_factory=list)
    dev: list[SentenceInstance] = field(default_factory=list)
    test: list[SentenceInstance] = field(default_factory=list)

    def part(self, name: str) -> list[SentenceInstance]:
        try:
            return {"train": self.train, "dev": self.dev, "test": self.test}[name]
        except KeyError:
            raise AlignmentError(f"unknown split name {name!r}") from None


def _validate_tree(sentence_id: str, heads: list[int | None]) -> None:
    n = len(heads)
    roots = [i for i, h in enumerate(heads) if h is None]
    if len(roots) == 0:
        raise TreeStructureError("no root token", sentence_id)
    if len(roots) > 1:
        raise TreeStructureError(f"multiple roots at positions {roots}", sentence_id)
    # every node must reach the root without revisiting anything
    for start in range(n):
        seen = set()
        cur: int | None = start
        while cur is not None:
            if cur in seen:
                raise TreeStructureError(
                    f"cycle in head chain starting at token {start}", sentence_id)
            seen.add(cur)
            cur = heads[cur]


def parse_conllu(text: str) -> list[tuple[str, list[Token]]]:
    """Parse CoNLL-U text into (sentence_id, tokens) pairs, validating trees."""
    sentences: list[tuple[str, list[Token]]] = []
    pending: list[tuple[str, int, str]] = []  # (form, head_1based, deprel)
    sent_id: str | None = None
    auto_id = 0

    def flush(line_no: int) -> None:
        nonlocal pending, sent_id, auto_id
        if not pending:
            sent_id = None
            return
        auto_id += 1
        sid = sent_id if sent_id is not None else f"s{auto_id}"
        n = len(pending)
        heads: list[int | None] = []
        for form, head1, deprel in pending:
            if head1 == 0:
                heads.append(None)
            elif 1 <= head1 <= n:
                heads.append(head1 - 1)
            else:
                raise ParseError(
                    f"HEAD {head1} out of range for {n}-token sentence {sid!r}",
                    line=line_no)
        _validate_tree(sid, heads)
        tokens = [Token(index=i, form=pending[i][0], head=heads[i], deprel=pending[i][2])
                  for i in range(n)]
        sentences.append((sid, tokens))
        pending = []
        sent_id = None

    line_no = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(line_no)
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id"):
                _, _, value = body.partition("=")
                if value.strip():
                    sent_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"expected 10 tab-separated columns, got {len(cols)}",
                             line=line_no)
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword-token ranges and empty nodes carry no tree edges
        try:
            int(tok_id)
        except ValueError:
            raise ParseError(f"non-integer token ID {tok_id!r}", line=line_no) from None
        try:
            head1 = int(cols[6])
        except ValueError:
            raise ParseError(f"non-integer HEAD {cols[6]!r}", line=line_no) from None
        if head1 < 0:
            raise ParseError(f"negative HEAD {head1}", line=line_no)
        pending.append((cols[1], head1, cols[7]))
    flush(line_no + 1)
    return sentences


def serialize_conllu(sentences: list[tuple[str, list[Token]]]) -> str:
    """Inverse of parse_conllu for well-formed input (forms and heads survive)."""
    out = io.StringIO()
    for sid, tokens in sentences:
        out.write(f"# sent_id = {sid}\n")
        for tok in tokens:
            head1 = 0 if tok.head is None else tok.head + 1
            out.write(f"{tok.index + 1}\t{tok.form}\t{tok.form}\t_\t_\t_\t"
                      f"{head1}\t{tok.deprel}\t_\t_\n")
        out.write("\n")
    return out.getvalue()


def parse_annotations(text: str) -> list[tuple[str, int, float]]:
    """Parse annotation TSV lines into (sentence_id, anchor_index, score)."""
    out: list[tuple[str, int, float]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ParseError(f"expected 3 tab-separated columns, got {len(cols)}",
                             line=line_no)
        sid, anchor_str, score_str = cols
        try:
            anchor = int(anchor_str)
        except ValueError:
            raise ParseError(f"non-integer anchor index {anchor_str!r}",
                             line=line_no) from None
        if anchor < 0:
            raise ParseError(f"negative anchor index {anchor}", line=line_no)
        try:
            score = float(score_str)
        except ValueError:
            raise ParseError(f"non-numeric score {score_str!r}", line=line_no) from None
        if not SCORE_MIN <= score <= SCORE_MAX:
            raise ScoreRangeError(
                f"line {line_no}: score {score} outside [{SCORE_MIN}, {SCORE_MAX}]")
        out.append((sid, anchor, score))
    return out


class EmbeddingTable:
    """Static word vectors with a zero-vector unknown fallback.

    Lookup policy: exact form, then lowercased form, then the unk vector.
    """

    def __init__(self, dim: int, entries: dict[str, np.ndarray]):
        self.dim = dim
        self.entries = entries
        self.unk = np.zeros(dim, dtype=np.float64)

    def lookup(self, form: str) -> np.ndarray:
        vec = self.entries.get(form)
        if vec is None:
            vec = self.entries.get(form.lower())
        return vec if vec is not None else self.unk

    def __len__(self) -> int:
        return len(self.entries)


def load_embeddings(stream, expected_dim: int | None = None) -> EmbeddingTable:
    """Read a text embedding table; dim is inferred from the first entry."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    dim = expected_dim
    entries: dict[str, np.ndarray] = {}
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split(" ")
        token, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise ParseError("embedding line has no values", line=line_no)
        if len(values) != dim:
            raise ParseError(
                f"embedding for {token!r} has {len(values)} values, expected {dim}",
                line=line_no)
        try:
            entries[token] = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError:
            raise ParseError(f"non-numeric embedding value for {token!r}",
                             line=line_no) from None
    if dim is None:
        raise ParseError("embedding file is empty")
    return EmbeddingTable(dim, entries)


def parse_manifest(text: str) -> dict[str, str]:
    """Parse a split manifest mapping sentence_id -> train|dev|test."""
    mapping: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ParseError(f"expected 2 tab-separated columns, got {len(cols)}",
                             line=line_no)
        sid, split = cols
        if split not in ("train", "dev", "test"):
            raise ParseError(f"unknown split {split!r}", line=line_no)
        if sid in mapping and mapping[sid] != split:
            raise ParseError(f"sentence {sid!r} assigned to two splits", line=line_no)
        mapping[sid] = split
    return mapping


def join_and_split(
    parses: list[tuple[str, list[Token]]],
    annotations: list[tuple[str, int, float]],
    manifest: dict[str, str],
) -> DatasetSplit:
    """Materialize SentenceInstances and route them into splits.

    Multiple datasets union by concatenating their parses/annotations before
    the call; a sentence with several annotated events yields one instance
    per anchor.
    """
    by_id: dict[str, tuple[Token, ...]] = {}
    for sid, tokens in parses:
        if sid in by_id:
            raise AlignmentError(f"duplicate sentence id {sid!r} in corpus")
        by_id[sid] = tuple(tokens)

    split = DatasetSplit()
    for sid, anchor, score in annotations:
        tokens = by_id.get(sid)
        if tokens is None:
            raise AlignmentError(f"annotation references unknown sentence {sid!r}")
        dest = manifest.get(sid)
        if dest is None:
            raise AlignmentError(f"sentence {sid!r} missing from split manifest")
        split.part(dest).append(SentenceInstance(
            sentence_id=sid, tokens=tokens, anchor_index=anchor, gold_score=score))
    return split
