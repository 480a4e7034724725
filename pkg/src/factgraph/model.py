"""Full model assembly: parameters, forward pass, per-instance loss.

The pipeline per sentence: embed tokens (static vectors, frozen), encode
with the two-layer biLSTM, induce the blended affinity matrix, run the GCN
stack, pool with anchor-query attention, regress. The ablation flags cut
the pipeline exactly where the corresponding parameters disappear:
no_structure removes affinity + GCN (the head reads LSTM states, so its
input width becomes 2H), no_attention removes the pooling maps (the
regressor reads the anchor's node vector).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gcn, head, structure, tensor as T
from .config import TrainConfig
from .corpus import EmbeddingTable, SentenceInstance
from .encoder import LstmDirectionParams, LstmParams, encode
from .errors import DimensionError
from .structure import AffinityMatrices, induce
from .tensor import Tensor


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def _zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def _init_lstm(rng: np.random.Generator, input_dim: int, hidden: int,
               num_layers: int = 2) -> LstmParams:
    layers = []
    in_dim = input_dim
    for _ in range(num_layers):
        pair = []
        for _direction in range(2):
            b = np.zeros(4 * hidden)
            b[hidden:2 * hidden] = 1.0  # forget gate starts open
            pair.append(LstmDirectionParams(
                w_x=_uniform(rng, (4 * hidden, in_dim), in_dim),
                w_h=_uniform(rng, (4 * hidden, hidden), hidden),
                b=Tensor(b, requires_grad=True)))
        layers.append((pair[0], pair[1]))
        in_dim = 2 * hidden
    return LstmParams(hidden_size=hidden, layers=layers)


class ModelParams:
    """All trainable tensors, addressable by stable dotted names."""

    def __init__(self, encoder: LstmParams,
                 structure_params: structure.StructureParams | None,
                 gcn_params: gcn.GcnParams | None,
                 head_params: head.HeadParams,
                 embed_dim: int):
        self.encoder = encoder
        self.structure = structure_params
        self.gcn = gcn_params
        self.head = head_params
        self.embed_dim = embed_dim

    @staticmethod
    def init(config: TrainConfig, embed_dim: int,
             rng: np.random.Generator) -> "ModelParams":
        h2 = 2 * config.hidden_size
        enc = _init_lstm(rng, embed_dim, config.hidden_size)
        if config.no_structure:
            struct = None
            gcn_params = None
            feat = h2
        else:
            p = config.projection_size
            struct = structure.StructureParams(
                w1=_uniform(rng, (p, h2), h2),
                b1=_zeros(p),
                w2=_uniform(rng, (1, 2 * p), 2 * p),
                b2=_zeros(()))
            layers = []
            in_dim = h2
            for _ in range(config.gcn_layers):
                layers.append((_uniform(rng, (in_dim, config.gcn_maps), in_dim),
                               _zeros(config.gcn_maps)))
                in_dim = config.gcn_maps
            gcn_params = gcn.GcnParams(layers=layers)
            feat = config.gcn_maps
        t, r = config.attention_size, config.regressor_size
        if config.no_attention:
            head_params = head.HeadParams(
                w_a1=None, b_a1=None, w_a2=None, b_a2=None, w_a3=None, b_a3=None,
                w_r1=_uniform(rng, (r, feat), feat), b_r1=_zeros(r),
                w_r2=_uniform(rng, (1, r), r), b_r2=_zeros(1))
        else:
            head_params = head.HeadParams(
                w_a1=_uniform(rng, (t, feat), feat), b_a1=_zeros(t),
                w_a2=_uniform(rng, (t, feat), feat), b_a2=_zeros(t),
                w_a3=_uniform(rng, (t, feat), feat), b_a3=_zeros(t),
                w_r1=_uniform(rng, (r, t), t), b_r1=_zeros(r),
                w_r2=_uniform(rng, (1, r), r), b_r2=_zeros(1))
        return ModelParams(enc, struct, gcn_params, head_params, embed_dim)

    def named(self) -> list[tuple[str, Tensor]]:
        out = self.encoder.named()
        if self.structure is not None:
            out.extend(self.structure.named())
        if self.gcn is not None:
            out.extend(self.gcn.named())
        out.extend(self.head.named())
        return out

    def tensors(self) -> list[Tensor]:
        return [t for _, t in self.named()]

    def zero_grad(self) -> None:
        for t in self.tensors():
            t.zero_grad()

    def count(self) -> int:
        return sum(t.size for t in self.tensors())

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named()}

    def restore(self, arrays: dict[str, np.ndarray]) -> None:
        for name, t in self.named():
            src = arrays.get(name)
            if src is None:
                raise DimensionError(f"snapshot missing parameter {name!r}")
            if src.shape != t.data.shape:
                raise DimensionError(
                    f"parameter {name!r}: stored shape {src.shape} does not "
                    f"match model shape {t.data.shape}")
            t.data[...] = src


@dataclass
class ForwardResult:
    score: Tensor               # shape [1]
    alpha: Tensor | None        # [n] attention weights, None when ablated
    h0: Tensor                  # [n x 2H] encoder states
    hg: Tensor                  # node vectors the head consumed
    affinity: AffinityMatrices | None


def embed_instance(instance: SentenceInstance, table: EmbeddingTable,
                   requires_grad: bool = False) -> Tensor:
    rows = np.stack([table.lookup(tok.form) for tok in instance.tokens])
    return Tensor(rows, requires_grad=requires_grad)


class Model:
    """Config + parameters + embedding table, runnable on instances."""

    def __init__(self, config: TrainConfig, params: ModelParams,
                 table: EmbeddingTable):
        if table.dim != params.embed_dim:
            raise DimensionError(
                f"embedding table dim {table.dim} does not match model "
                f"embed_dim {params.embed_dim}")
        self.config = config
        self.params = params
        self.table = table

    @staticmethod
    def build(config: TrainConfig, table: EmbeddingTable,
              seed: int | None = None) -> "Model":
        rng = np.random.default_rng(config.seed if seed is None else seed)
        params = ModelParams.init(config, table.dim, rng)
        return Model(config, params, table)

    def forward(self, instance: SentenceInstance,
                embeddings: Tensor | None = None) -> ForwardResult:
        cfg = self.config
        if embeddings is None:
            embeddings = embed_instance(instance, self.table)
        h0 = encode(embeddings, self.params.encoder)
        affinity = None
        if cfg.no_structure:
            hg = h0
        else:
            affinity = induce(h0, instance.tokens, self.params.structure,
                              cfg.lam, normalize_rows=cfg.row_normalize_a)
            hg = gcn.gcn_stack(affinity.blended, h0, self.params.gcn,
                               activation=cfg.gcn_activation)
        if cfg.no_attention:
            pooled = T.row(hg, instance.anchor_index)
            alpha = None
        else:
            pooled, alpha = head.attention_pool(hg, instance.anchor_index,
                                                self.params.head)
        score = head.regress(pooled, self.params.head,
                             activation=cfg.ffn_activation)
        return ForwardResult(score=score, alpha=alpha, h0=h0, hg=hg,
                             affinity=affinity)

    def predict(self, instance: SentenceInstance,
                clip: bool | None = None) -> head.Prediction:
        result = self.forward(instance)
        score = result.score.item()
        if clip if clip is not None else self.config.clip_predictions:
            score = float(np.clip(score, -3.0, 3.0))
        if result.alpha is None:
            alpha = [0.0] * len(instance.tokens)
            alpha[instance.anchor_index] = 1.0
        else:
            alpha = [float(a) for a in result.alpha.data]
        return head.Prediction(score=score, attention=alpha)

    def loss(self, instance: SentenceInstance) -> Tensor:
        result = self.forward(instance)
        return head.huber_loss(result.score, instance.gold_score,
                               delta=self.config.huber_delta)
