"""Two-layer bidirectional LSTM over token embeddings.

Per direction and layer the gate weights are packed into one [4H x in]
matrix with a [4H x H] recurrent matrix and a [4H] bias, gate order
input / forget / candidate / output. Layer 1 consumes the embedding
dimension, layer 2 consumes the 2H concatenated outputs of layer 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import DimensionError, DomainError
from .tensor import Tensor


@dataclass
class LstmDirectionParams:
    w_x: Tensor  # [4H x in]
    w_h: Tensor  # [4H x H]
    b: Tensor    # [4H]


@dataclass
class LstmParams:
    hidden_size: int
    # one (forward, backward) pair per layer, bottom first
    layers: list[tuple[LstmDirectionParams, LstmDirectionParams]]

    def named(self, prefix: str = "encoder") -> list[tuple[str, Tensor]]:
        out = []
        for li, (fwd, bwd) in enumerate(self.layers):
            for tag, p in (("fwd", fwd), ("bwd", bwd)):
                out.append((f"{prefix}.l{li}.{tag}.w_x", p.w_x))
                out.append((f"{prefix}.l{li}.{tag}.w_h", p.w_h))
                out.append((f"{prefix}.l{li}.{tag}.b", p.b))
        return out


def lstm_cell(x_t: Tensor, h_prev: Tensor, c_prev: Tensor,
              params: LstmDirectionParams) -> tuple[Tensor, Tensor]:
    """One LSTM step: returns (h_t, c_t)."""
    hidden = h_prev.shape[0]
    if params.w_x.shape[0] != 4 * hidden:
        raise DimensionError(
            f"gate stack {params.w_x.shape} inconsistent with hidden size {hidden}")
    pre = T.add(T.add(T.matvec(params.w_x, x_t), T.matvec(params.w_h, h_prev)),
                params.b)
    i = T.sigmoid(T.slice1d(pre, 0, hidden))
    f = T.sigmoid(T.slice1d(pre, hidden, 2 * hidden))
    g = T.tanh(T.slice1d(pre, 2 * hidden, 3 * hidden))
    o = T.sigmoid(T.slice1d(pre, 3 * hidden, 4 * hidden))
    c_t = T.add(T.mul(f, c_prev), T.mul(i, g))
    h_t = T.mul(o, T.tanh(c_t))
    return h_t, c_t


def _run_direction(inputs: list[Tensor], params: LstmDirectionParams,
                   hidden: int) -> list[Tensor]:
    h = Tensor(np.zeros(hidden))
    c = Tensor(np.zeros(hidden))
    states = []
    for x_t in inputs:
        h, c = lstm_cell(x_t, h, c, params)
        states.append(h)
    return states


def bilstm_layer(inputs: list[Tensor], fwd: LstmDirectionParams,
                 bwd: LstmDirectionParams, hidden: int) -> list[Tensor]:
    """Run both directions and concatenate their states per position."""
    if not inputs:
        raise DomainError("bilstm_layer needs at least one input vector")
    forward = _run_direction(inputs, fwd, hidden)
    backward = _run_direction(list(reversed(inputs)), bwd, hidden)
    backward.reverse()
    return [T.concat(fh, bh) for fh, bh in zip(forward, backward)]


def encode(embeddings: Tensor, params: LstmParams) -> Tensor:
    """Map an [n x D] embedding matrix to the [n x 2H] top-layer states."""
    n = embeddings.shape[0]
    xs = [T.row(embeddings, t) for t in range(n)]
    for fwd, bwd in params.layers:
        xs = bilstm_layer(xs, fwd, bwd, params.hidden_size)
    return T.stack_rows(xs)
