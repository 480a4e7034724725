"""Event factuality regression over blended semantic/syntactic graphs.

A sentence is encoded with a two-layer biLSTM, a learned pairwise affinity
matrix is blended with the dependency tree's adjacency, a two-layer GCN
propagates over the result, and an anchor-query attention head regresses
the factuality score in [-3, +3].
"""

from .config import TrainConfig, builtin_config, load_config
from .corpus import (DatasetSplit, EmbeddingTable, SentenceInstance, Token,
                     join_and_split, load_embeddings, parse_annotations,
                     parse_conllu, parse_manifest)
from .metrics import EvalReport, mae, pearson
from .model import Model, ModelParams
from .tensor import Tensor, backward, grad_check
from .trainer import evaluate, train

__version__ = "0.1.0"

__all__ = [
    "DatasetSplit", "EmbeddingTable", "EvalReport", "Model", "ModelParams",
    "SentenceInstance", "Tensor", "Token", "TrainConfig", "backward",
    "builtin_config", "evaluate", "grad_check", "join_and_split",
    "load_config", "load_embeddings", "mae", "parse_annotations",
    "parse_conllu", "parse_manifest", "pearson", "train", "__version__",
]
