"""Synthetic cue corpora for verification and demonstration.

Each sentence plants cue words whose attachment to the anchor verb decides
the gold factuality score: the base score is shifted by an attached shift
cue, then negated once per attached flip cue, then clamped into [-3, +3].
Distractor cues are the same surface forms attached far from the anchor in
the tree; they leave the score untouched, so only the dependency structure
separates them from real cues.

Placement policies:
  tree_far   cues sit in the first three positions, at least six tokens
             before the anchor, but attach directly to it in the tree (the
             long-distance phenomenon the blended graph is meant to solve).
  adjacent   cues sit immediately before the anchor and attach to it.

With paired_distractor, every sentence carries exactly one attached cue
(a coin flip between one shift and one flip cue) plus the other cue as a
distractor: the bag of words is then identical across the two gold values
and only the tree disambiguates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import Token
from .errors import ConfigError

FILLERS = ["table", "river", "garden", "window", "mountain", "letter",
           "bridge", "market", "forest", "harbor", "meadow", "tunnel",
           "castle", "valley", "orchard", "lantern"]
VERBS = ["go", "leave", "arrive", "travel", "return", "meet"]

_FRONT_ZONE = 3  # positions 0..2 host cues under tree_far


@dataclass(frozen=True)
class CueSpec:
    form: str
    kind: str              # "shift" or "flip"
    amount: float = 0.0    # used by shift cues only


@dataclass
class SynthSpec:
    seed: int = 0
    n_train: int = 32
    n_dev: int = 16
    n_test: int = 0
    min_len: int = 10
    max_len: int = 13
    base_score: float = 3.0
    placement: str = "tree_far"   # or "adjacent"
    shift_rate: float = 0.5
    flip_rate: float = 0.5
    distractor_rate: float = 0.0
    paired_distractor: bool = False
    embed_dim: int = 8
    n_filler_forms: int = len(FILLERS)  # restrict vocabulary for easier corpora
    n_verb_forms: int = len(VERBS)
    cues: list[CueSpec] = field(default_factory=lambda: [
        CueSpec("will", "shift", -2.0),
        CueSpec("might", "shift", -2.5),
        CueSpec("not", "flip"),
        CueSpec("never", "flip"),
    ])

    def validate(self) -> "SynthSpec":
        if self.n_train + self.n_dev + self.n_test < 1:
            raise ConfigError("synth spec generates no sentences")
        if self.placement not in ("tree_far", "adjacent"):
            raise ConfigError(f"unknown placement {self.placement!r}")
        if self.min_len > self.max_len:
            raise ConfigError("min_len exceeds max_len")
        floor = 10 if self.placement == "tree_far" else 5
        if self.min_len < floor:
            raise ConfigError(
                f"{self.placement} placement needs sentences of at least "
                f"{floor} tokens, got min_len={self.min_len}")
        for rate_name in ("shift_rate", "flip_rate", "distractor_rate"):
            rate = getattr(self, rate_name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{rate_name} must lie in [0, 1], got {rate}")
        if self.embed_dim < 1:
            raise ConfigError("embed_dim must be positive")
        if not 1 <= self.n_filler_forms <= len(FILLERS):
            raise ConfigError(f"n_filler_forms must lie in [1, {len(FILLERS)}]")
        if not 1 <= self.n_verb_forms <= len(VERBS):
            raise ConfigError(f"n_verb_forms must lie in [1, {len(VERBS)}]")
        for cue in self.cues:
            if cue.kind not in ("shift", "flip"):
                raise ConfigError(f"cue {cue.form!r}: unknown kind {cue.kind!r}")
        if self.paired_distractor:
            kinds = {c.kind for c in self.cues}
            if kinds != {"shift", "flip"}:
                raise ConfigError(
                    "paired_distractor needs both a shift and a flip cue")
        return self


def spec_from_json(text: str) -> SynthSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"synth spec is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("synth spec must be a JSON object")
    cues = raw.pop("cues", None)
    spec = SynthSpec()
    for key, value in raw.items():
        if not hasattr(spec, key):
            raise ConfigError(f"unknown synth spec key {key!r}")
        setattr(spec, key, value)
    if cues is not None:
        spec.cues = [CueSpec(form=c["form"], kind=c["kind"],
                             amount=float(c.get("amount", 0.0))) for c in cues]
    return spec.validate()


@dataclass
class SynthSentence:
    sid: str
    tokens: list[Token]
    anchor_index: int
    gold: float
    split: str


@dataclass
class SynthCorpus:
    sentences: list[SynthSentence]
    conllu: str
    annotations: str
    manifest: str
    embeddings: str


def _score(base: float, attached: list[CueSpec]) -> float:
    score = base
    for cue in attached:
        if cue.kind == "shift":
            score += cue.amount
    for cue in attached:
        if cue.kind == "flip":
            score = -score
    return float(np.clip(score, -3.0, 3.0))


def _sample_cues(spec: SynthSpec, rng: np.random.Generator
                 ) -> tuple[list[CueSpec], list[CueSpec]]:
    """Returns (attached, distractors) for one sentence."""
    shifts = [c for c in spec.cues if c.kind == "shift"]
    flips = [c for c in spec.cues if c.kind == "flip"]
    if spec.paired_distractor:
        shift = shifts[int(rng.integers(len(shifts)))]
        flip = flips[int(rng.integers(len(flips)))]
        if rng.random() < 0.5:
            return [shift], [flip]
        return [flip], [shift]
    attached = []
    if shifts and rng.random() < spec.shift_rate:
        attached.append(shifts[int(rng.integers(len(shifts)))])
    if flips and rng.random() < spec.flip_rate:
        attached.append(flips[int(rng.integers(len(flips)))])
    distractors = []
    if spec.cues and rng.random() < spec.distractor_rate:
        distractors.append(spec.cues[int(rng.integers(len(spec.cues)))])
    return attached, distractors


def _build_sentence(spec: SynthSpec, rng: np.random.Generator,
                    sid: str, split: str) -> SynthSentence:
    n = int(rng.integers(spec.min_len, spec.max_len + 1))
    anchor = n - 2
    attached, distractors = _sample_cues(spec, rng)
    gold = _score(spec.base_score, attached)

    fillers = FILLERS[:spec.n_filler_forms]
    forms = [fillers[int(rng.integers(len(fillers)))] for _ in range(n)]
    heads: list[int | None] = [None] * n
    forms[anchor] = VERBS[int(rng.integers(spec.n_verb_forms))]
    heads[anchor] = None
    heads[n - 1] = anchor  # trailing filler keeps the anchor off the edge

    if spec.placement == "tree_far":
        chain = list(range(_FRONT_ZONE, n - 2))  # fillers between zone and anchor
        heads[chain[0]] = anchor
        for prev, pos in zip(chain, chain[1:]):
            heads[pos] = prev
        zone = list(range(_FRONT_ZONE))
        rng.shuffle(zone)
        slots = iter(zone)
        for cue in attached:
            pos = next(slots)
            forms[pos] = cue.form
            heads[pos] = anchor
        for cue in distractors:
            pos = next(slots)
            forms[pos] = cue.form
            heads[pos] = chain[2]  # four hops from the anchor, outside the GCN
        for pos in slots:
            heads[pos] = chain[1]  # plain far fillers, three hops out
    else:  # adjacent
        cue_slots = [anchor - 1, anchor - 2]
        rng.shuffle(cue_slots)
        slots = iter(cue_slots)
        taken = set()
        for cue in attached:
            pos = next(slots)
            forms[pos] = cue.form
            heads[pos] = anchor
            taken.add(pos)
        # everything else before the anchor chains rightward into it
        chain = [p for p in range(anchor) if p not in taken]
        heads[chain[-1]] = anchor
        for pos, nxt in zip(chain, chain[1:]):
            heads[pos] = nxt
        for cue in distractors:
            forms[chain[0]] = cue.form  # farthest end of the chain

    tokens = [Token(index=i, form=forms[i], head=heads[i]) for i in range(n)]
    return SynthSentence(sid=sid, tokens=tokens, anchor_index=anchor,
                         gold=gold, split=split)


def generate(spec: SynthSpec) -> SynthCorpus:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    plan = ([("train", i) for i in range(spec.n_train)]
            + [("dev", i) for i in range(spec.n_dev)]
            + [("test", i) for i in range(spec.n_test)])
    sentences = []
    for number, (split, _) in enumerate(plan, start=1):
        sid = f"syn-{number:04d}"
        sentences.append(_build_sentence(spec, rng, sid, split))

    conllu_lines = []
    ann_lines = []
    man_lines = []
    vocab = set()
    for s in sentences:
        conllu_lines.append(f"# sent_id = {s.sid}")
        for tok in s.tokens:
            head1 = 0 if tok.head is None else tok.head + 1
            conllu_lines.append(f"{tok.index + 1}\t{tok.form}\t{tok.form}\t_\t_\t_"
                                f"\t{head1}\t{tok.deprel}\t_\t_")
            vocab.add(tok.form)
        conllu_lines.append("")
        ann_lines.append(f"{s.sid}\t{s.anchor_index}\t{s.gold:g}")
        man_lines.append(f"{s.sid}\t{s.split}")

    emb_lines = []
    scale = 1.0 / np.sqrt(spec.embed_dim)
    for form in sorted(vocab):
        vec = rng.normal(size=spec.embed_dim) * scale
        emb_lines.append(form + " " + " ".join(f"{v:.8f}" for v in vec))

    return SynthCorpus(sentences=sentences,
                       conllu="\n".join(conllu_lines) + "\n",
                       annotations="\n".join(ann_lines) + "\n",
                       manifest="\n".join(man_lines) + "\n",
                       embeddings="\n".join(emb_lines) + "\n")
