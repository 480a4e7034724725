"""Graph convolution over the blended affinity matrix.

Propagation rule per layer: act(A @ H @ W + b). The affinity matrix is used
exactly as blended, with no degree normalization (row normalization is an
opt-in flag upstream). Two layers by default; more only for ablation
tooling.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import tensor as T
from .errors import ConfigError
from .tensor import Tensor

ACTIVATIONS = {"relu": T.relu, "tanh": T.tanh}


@dataclass
class GcnParams:
    # (weight, bias) per layer; layer 0 is [2H x F], later layers [F x F]
    layers: list[tuple[Tensor, Tensor]]

    def named(self, prefix: str = "gcn") -> list[tuple[str, Tensor]]:
        out = []
        for i, (w, b) in enumerate(self.layers):
            out.append((f"{prefix}.w{i}", w))
            out.append((f"{prefix}.b{i}", b))
        return out


def gcn_layer(a: Tensor, h: Tensor, w: Tensor, bias: Tensor,
              activation: str = "relu") -> Tensor:
    try:
        act = ACTIVATIONS[activation]
    except KeyError:
        raise ConfigError(f"unknown GCN activation {activation!r}") from None
    return act(T.add_rowvec(T.matmul(a, T.matmul(h, w)), bias))


def gcn_stack(a: Tensor, h0: Tensor, params: GcnParams,
              activation: str = "relu") -> Tensor:
    h = h0
    for w, bias in params.layers:
        h = gcn_layer(a, h, w, bias, activation)
    return h
