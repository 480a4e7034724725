"""Induce the graph the GCN propagates over.

Two n x n matrices per sentence: a learned semantic affinity (pairwise
sigmoid scores over projected LSTM states, asymmetric by construction) and
a constant syntactic adjacency (dependency edges plus self-loops and
reverse edges). They are blended entrywise with a fixed trade-off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as T
from .corpus import Token
from .errors import ConfigError, TreeStructureError
from .tensor import Tensor


@dataclass
class StructureParams:
    w1: Tensor  # [P x 2H] projection
    b1: Tensor  # [P]
    w2: Tensor  # [1 x 2P] scorer over concatenated projected pairs
    b2: Tensor  # scalar

    def named(self, prefix: str = "structure") -> list[tuple[str, Tensor]]:
        return [(f"{prefix}.w1", self.w1), (f"{prefix}.b1", self.b1),
                (f"{prefix}.w2", self.w2), (f"{prefix}.b2", self.b2)]


@dataclass
class AffinityMatrices:
    a_sem: Tensor      # entries strictly in (0, 1)
    a_syn: Tensor      # binary, symmetric, unit diagonal; constant
    blended: Tensor    # lam * a_sem + (1 - lam) * a_syn
    lam: float


def semantic_affinity(h0: Tensor, params: StructureParams) -> Tensor:
    """Pairwise scores: entry [i, j] is how much word i should send to j.

    Computed as sigmoid(w2 . [h'_i, h'_j] + b2) with h' = tanh(W1 h + b1).
    The concatenated form splits into w2a . h'_i + w2b . h'_j, which is what
    the vectorized code evaluates; the two are numerically identical.
    """
    projected = T.tanh(T.add_rowvec(T.matmul(h0, T.transpose(params.w1)),
                                    params.b1))           # [n x P]
    p = params.w1.shape[0]
    scorer = T.row(params.w2, 0)                           # [2P]
    left = T.matvec(projected, T.slice1d(scorer, 0, p))    # [n], w2a . h'_i
    right = T.matvec(projected, T.slice1d(scorer, p, 2 * p))
    return T.sigmoid(T.add(T.pairwise_sum(left, right), params.b2))


def syntactic_adjacency(tokens: Sequence[Token]) -> Tensor:
    """Binary adjacency from the dependency tree, augmented with
    self-connections and reverse edges. Constant (no gradient)."""
    n = len(tokens)
    roots = sum(1 for t in tokens if t.head is None)
    if roots != 1:
        raise TreeStructureError(f"expected exactly one root, found {roots}")
    a = np.eye(n, dtype=np.float64)
    for t in tokens:
        if t.head is None:
            continue
        if not 0 <= t.head < n:
            raise TreeStructureError(f"head {t.head} out of range for length {n}")
        a[t.index, t.head] = 1.0
        a[t.head, t.index] = 1.0
    return Tensor(a)


def blend(a_sem: Tensor, a_syn: Tensor, lam: float) -> Tensor:
    """Entrywise lam * A_sem + (1 - lam) * A_syn; gradient reaches A_sem only."""
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"lambda must lie in [0, 1], got {lam}")
    return T.add(T.mul(a_sem, lam), T.mul(a_syn, 1.0 - lam))


def induce(h0: Tensor, tokens: Sequence[Token], params: StructureParams,
           lam: float, normalize_rows: bool = False) -> AffinityMatrices:
    a_sem = semantic_affinity(h0, params)
    a_syn = syntactic_adjacency(tokens)
    blended = blend(a_sem, a_syn, lam)
    if normalize_rows:
        blended = T.row_normalize(blended)
    return AffinityMatrices(a_sem=a_sem, a_syn=a_syn, blended=blended, lam=lam)


def affinity_tsv(matrix: np.ndarray) -> str:
    """Header-less TSV dump of an n x n matrix for inspection tooling."""
    return "\n".join("\t".join(f"{v:.10g}" for v in row) for row in matrix) + "\n"
