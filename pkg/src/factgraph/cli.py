"""Command-line surface: train, evaluate, predict, gradcheck, synth, selfcheck.

Exit codes: 0 success, 1 verification/threshold failure, 2 input or
configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import corpus, fixtures, synth, tensor as T
from .checkpoint import load_checkpoint, restore_model_params, save_checkpoint
from .config import TrainConfig, builtin_config, config_to_dict, load_config
from .errors import FactGraphError
from .model import Model, ModelParams
from .trainer import evaluate, train

GRADCHECK_THRESHOLD = 1e-4
_GRADCHECK_DIMS = dict(hidden_size=4, projection_size=6, gcn_maps=5,
                       attention_size=6, regressor_size=4)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_corpus(args) -> tuple[corpus.DatasetSplit, corpus.EmbeddingTable]:
    parses = []
    for path in args.conllu:
        parses.extend(corpus.parse_conllu(_read(path)))
    annotations = []
    for path in args.annotations:
        annotations.extend(corpus.parse_annotations(_read(path)))
    manifest: dict[str, str] = {}
    for path in args.manifest:
        manifest.update(corpus.parse_manifest(_read(path)))
    split = corpus.join_and_split(parses, annotations, manifest)
    with open(args.embeddings, encoding="utf-8") as fh:
        table = corpus.load_embeddings(fh)
    return split, table


def _resolve_config(args) -> TrainConfig:
    if args.config and os.path.exists(args.config):
        cfg = load_config(args.config)
    elif args.config:
        cfg = builtin_config(args.config)
    else:
        cfg = builtin_config("desk")
    overrides = {}
    if getattr(args, "lam", None) is not None:
        overrides["lam"] = args.lam
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "epochs", None) is not None:
        overrides["epochs"] = args.epochs
    if getattr(args, "no_structure", False):
        overrides["no_structure"] = True
    if getattr(args, "no_attention", False):
        overrides["no_attention"] = True
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate()


def _write_prediction_dump(path: str, model: Model,
                           instances: list[corpus.SentenceInstance]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            pred = model.predict(inst)
            alphas = ",".join(f"{a:.6f}" for a in pred.attention)
            fh.write(f"{inst.sentence_id}\t{inst.anchor_index}\t"
                     f"{inst.gold_score:g}\t{pred.score:.6f}\t{alphas}\n")


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    split, table = _load_corpus(args)
    os.makedirs(args.out, exist_ok=True)
    model = Model.build(cfg, table)
    result = train(model, split.train, split.dev,
                   test_set=split.test or None)
    for line in result.log_lines:
        print(line)
    with open(os.path.join(args.out, "train.log"), "w", encoding="utf-8") as fh:
        fh.write(result.log_text())
    save_checkpoint(os.path.join(args.out, "checkpoint.bin"), model.params, cfg)
    if split.test:
        _write_prediction_dump(os.path.join(args.out, "test_predictions.tsv"),
                               model, split.test)
    return 0


def _load_model(args) -> Model:
    cfg, embed_dim, arrays = load_checkpoint(args.checkpoint)
    if args.config:
        requested = _resolve_config(args)
        stored, given = config_to_dict(cfg), config_to_dict(requested)
        conflicts = {k for k in stored if stored[k] != given[k]}
        if conflicts:
            raise FactGraphError(
                "config disagrees with checkpoint on: "
                + ", ".join(f"{k} ({given[k]} vs stored {stored[k]})"
                            for k in sorted(conflicts)))
    params = restore_model_params(cfg, embed_dim, arrays)
    with open(args.embeddings, encoding="utf-8") as fh:
        table = corpus.load_embeddings(fh)
    if table.dim != embed_dim:
        raise FactGraphError(
            f"embedding dimension {table.dim} does not match checkpoint "
            f"embed_dim {embed_dim}")
    return Model(cfg, params, table)


def cmd_evaluate(args) -> int:
    model = _load_model(args)
    split, _ = _load_corpus(args)
    instances = split.part(args.split)
    if not instances:
        raise FactGraphError(f"split {args.split!r} is empty")
    report = evaluate(model, instances)
    r = "NA" if report.pearson_r is None else f"{report.pearson_r:.6f}"
    print(f"{report.mae:.6f}\t{r}")
    os.makedirs(args.out, exist_ok=True)
    _write_prediction_dump(os.path.join(args.out, "predictions.tsv"),
                           model, instances)
    return 0


def cmd_predict(args) -> int:
    model = _load_model(args)
    split, _ = _load_corpus(args)
    instances = split.part(args.split)
    if not instances:
        raise FactGraphError(f"split {args.split!r} is empty")
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "predictions.tsv")
    _write_prediction_dump(path, model, instances)
    print(path)
    return 0


def cmd_gradcheck(args) -> int:
    base = _resolve_config(args)
    cfg = dataclasses.replace(base, **_GRADCHECK_DIMS).validate()
    instance = fixtures.gradcheck_fixture()
    rng = np.random.default_rng(cfg.seed)
    table = corpus.EmbeddingTable(
        5, {tok.form: rng.normal(size=5) for tok in instance.tokens})
    model = Model(cfg, ModelParams.init(cfg, 5, rng), table)

    undo = None
    if args.corrupt:  # negative control: a wrong gradient must be detected
        real = T.sigmoid

        def corrupted(a):
            out = real(a)
            inner = out._backward
            if inner is not None:
                out._backward = lambda g: inner(g * 2.0)
            return out

        T.sigmoid = corrupted
        undo = real
    try:
        worst = 0.0
        for name, param in model.params.named():
            err = T.grad_check(lambda: model.loss(instance), [param])
            grad_peak = float(np.max(np.abs(param.grad)))
            print(f"{name}\tgrad_max={grad_peak:.3e}\trel_err={err:.3e}")
            worst = max(worst, err)
    finally:
        if undo is not None:
            T.sigmoid = undo
    print(f"max_relative_error\t{worst:.6e}\tthreshold\t{GRADCHECK_THRESHOLD:g}")
    return 0 if worst < GRADCHECK_THRESHOLD else 1


def cmd_synth(args) -> int:
    spec = synth.spec_from_json(_read(args.spec)) if args.spec else synth.SynthSpec()
    if args.seed is not None:
        spec.seed = args.seed
    spec.validate()
    generated = synth.generate(spec)
    os.makedirs(args.out, exist_ok=True)
    outputs = {"corpus.conllu": generated.conllu,
               "annotations.tsv": generated.annotations,
               "split.tsv": generated.manifest,
               "embeddings.txt": generated.embeddings}
    for filename, text in outputs.items():
        with open(os.path.join(args.out, filename), "w", encoding="utf-8") as fh:
            fh.write(text)
    print(f"wrote {len(generated.sentences)} sentences to {args.out}")
    return 0


def cmd_selfcheck(args) -> int:
    failures = 0
    for name, ok, message in fixtures.fixture_selfcheck():
        print(f"{name}\t{'PASS' if ok else 'FAIL'}\t{message}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else 1


def _add_corpus_args(p: argparse.ArgumentParser, with_checkpoint: bool) -> None:
    p.add_argument("--conllu", action="append", required=True,
                   help="CoNLL-U file (repeatable; datasets are unioned)")
    p.add_argument("--annotations", action="append", required=True,
                   help="annotation TSV (repeatable)")
    p.add_argument("--manifest", action="append", required=True,
                   help="split manifest TSV (repeatable)")
    p.add_argument("--embeddings", required=True, help="embedding text file")
    if with_checkpoint:
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--split", default="test",
                       choices=("train", "dev", "test"))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file path or builtin profile name")
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factgraph",
        description="Event factuality regression over blended "
                    "semantic/syntactic sentence graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    _add_common(p)
    _add_corpus_args(p, with_checkpoint=False)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="semantic/syntactic trade-off override")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--no-structure", action="store_true")
    p.add_argument("--no-attention", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a split")
    _add_common(p)
    _add_corpus_args(p, with_checkpoint=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="write per-instance predictions")
    _add_common(p)
    _add_corpus_args(p, with_checkpoint=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of the full pipeline")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth", help="generate a synthetic cue corpus")
    p.add_argument("--spec", help="JSON spec file (defaults ship in the package)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("selfcheck", help="re-validate the shipped fixtures")
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FactGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
