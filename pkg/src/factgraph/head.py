"""Prediction head: anchor-query attention pooling and a two-layer regressor.

The anchor's node vector is the attention query; scores are bilinear in two
learned maps, the pooled feature is a weighted sum of a third map, and a
small feed-forward network emits the unclamped factuality score. Training
uses the Huber loss (delta = 1) so the regression gradient is bounded.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import tensor as T
from .errors import ContractError
from .tensor import Tensor


@dataclass
class HeadParams:
    # attention maps [T x F] with [T] biases; None when attention is ablated
    w_a1: Tensor | None
    b_a1: Tensor | None
    w_a2: Tensor | None
    b_a2: Tensor | None
    w_a3: Tensor | None
    b_a3: Tensor | None
    # regressor [R x in] + [R], then [1 x R] + [1]
    w_r1: Tensor
    b_r1: Tensor
    w_r2: Tensor
    b_r2: Tensor

    def named(self, prefix: str = "head") -> list[tuple[str, Tensor]]:
        out = []
        for name in ("w_a1", "b_a1", "w_a2", "b_a2", "w_a3", "b_a3",
                     "w_r1", "b_r1", "w_r2", "b_r2"):
            t = getattr(self, name)
            if t is not None:
                out.append((f"{prefix}.{name}", t))
        return out


@dataclass
class Prediction:
    score: float
    attention: list[float]  # sums to 1; degenerate one-hot when attention is off


def attention_pool(hg: Tensor, k: int, params: HeadParams) -> tuple[Tensor, Tensor]:
    """Pool node vectors with the anchor as query; returns (V, alpha')."""
    n = hg.shape[0]
    if not 0 <= k < n:
        raise ContractError(f"anchor index {k} out of bounds for {n} tokens")
    anchor = T.row(hg, k)
    query = T.add(T.matvec(params.w_a1, anchor), params.b_a1)          # [T]
    keys = T.add_rowvec(T.matmul(hg, T.transpose(params.w_a2)), params.b_a2)
    alpha = T.softmax(T.matvec(keys, query))                           # [n]
    values = T.add_rowvec(T.matmul(hg, T.transpose(params.w_a3)), params.b_a3)
    pooled = T.vecmat(alpha, values)                                   # [T]
    return pooled, alpha


def regress(v: Tensor, params: HeadParams, activation: str = "relu") -> Tensor:
    """Two feed-forward layers mapping the pooled feature to a score [1]."""
    act = {"relu": T.relu, "tanh": T.tanh}[activation]
    hidden = act(T.add(T.matvec(params.w_r1, v), params.b_r1))
    return T.add(T.matvec(params.w_r2, hidden), params.b_r2)


def huber_loss(pred: Tensor, gold: float, delta: float = 1.0) -> Tensor:
    return T.huber(pred, gold, delta)
