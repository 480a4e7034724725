"""Training loop: Adam with bias correction, dev-based model selection.

Each epoch shuffles the training instances with the run's generator, sums
gradients over each batch (one backward per instance, no zeroing in
between), takes an Adam step, then scores the dev split. The checkpoint
with the lowest dev MAE wins; training stops early after `patience` epochs
without improvement. Everything is driven by one seeded generator, so a
(seed, data, config) triple fixes the whole trajectory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .config import TrainConfig
from .corpus import SentenceInstance
from .errors import ConfigError, ContractError
from .metrics import EvalReport, mae, pearson
from .model import Model


class AdamState:
    """First/second moment buffers keyed by parameter name."""

    def __init__(self, named_params: list[tuple[str, T.Tensor]],
                 lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in named_params}
        self.v = {name: np.zeros_like(p.data) for name, p in named_params}


def adam_step(named_params: list[tuple[str, T.Tensor]], state: AdamState) -> None:
    """In-place Adam update from accumulated gradients; zeroes grads after."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1 ** state.t
    bias2 = 1.0 - b2 ** state.t
    for name, p in named_params:
        if p.grad is None:
            raise ContractError(f"parameter {name!r} has no gradient buffer")
        g = p.grad
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p.data -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        p.zero_grad()


def evaluate(model: Model, instances: list[SentenceInstance]) -> EvalReport:
    """MAE and Pearson r over instances, with per-instance predictions."""
    if not instances:
        raise ContractError("evaluate needs at least one instance")
    per_instance = []
    preds, golds = [], []
    for inst in instances:
        pred = model.predict(inst).score
        per_instance.append((inst.sentence_id, inst.gold_score, pred))
        preds.append(pred)
        golds.append(inst.gold_score)
    return EvalReport(mae=mae(preds, golds), pearson_r=pearson(preds, golds),
                      n=len(instances), per_instance=per_instance)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_mae: float
    dev_r: float | None


@dataclass
class TrainResult:
    best_epoch: int
    best_dev_mae: float
    history: list[EpochRecord] = field(default_factory=list)
    log_lines: list[str] = field(default_factory=list)
    test_report: EvalReport | None = None

    def log_text(self) -> str:
        return "\n".join(self.log_lines) + "\n"


def _fmt(x: float | None) -> str:
    return "NA" if x is None else f"{x:.6f}"


def train(model: Model, train_set: list[SentenceInstance],
          dev_set: list[SentenceInstance],
          test_set: list[SentenceInstance] | None = None) -> TrainResult:
    """Optimize in place; leaves the best-dev parameters in the model."""
    cfg = model.config
    if not train_set:
        raise ConfigError("training split is empty")
    if not dev_set:
        raise ConfigError("dev split is empty")

    named = model.params.named()
    state = AdamState(named, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    result = TrainResult(best_epoch=0, best_dev_mae=float("inf"))
    best_arrays = model.params.snapshot()
    stale = 0

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_set))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            model.params.zero_grad()
            for idx in order[start:start + cfg.batch_size]:
                loss = model.loss(train_set[int(idx)])
                T.backward(loss)
                epoch_loss += loss.item()
            adam_step(named, state)
        train_loss = epoch_loss / len(train_set)

        dev = evaluate(model, dev_set)
        record = EpochRecord(epoch=epoch, train_loss=train_loss,
                             dev_mae=dev.mae, dev_r=dev.pearson_r)
        result.history.append(record)
        result.log_lines.append(
            f"{epoch}\t{train_loss:.6f}\t{dev.mae:.6f}\t{_fmt(dev.pearson_r)}")

        if dev.mae < result.best_dev_mae:
            result.best_dev_mae = dev.mae
            result.best_epoch = epoch
            best_arrays = model.params.snapshot()
            stale = 0
        else:
            stale += 1
            if stale > cfg.patience:
                break

    model.params.restore(best_arrays)
    summary = {"best_epoch": result.best_epoch,
               "best_dev_mae": round(result.best_dev_mae, 6),
               "epochs_run": len(result.history)}
    if test_set:
        result.test_report = evaluate(model, test_set)
        summary["test_mae"] = round(result.test_report.mae, 6)
        r = result.test_report.pearson_r
        summary["test_r"] = None if r is None else round(r, 6)
    result.log_lines.append(json.dumps(summary, sort_keys=True))
    return result
