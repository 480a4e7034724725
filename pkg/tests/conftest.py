"""Shared builders for tiny instances, tables, and configs."""

import numpy as np
import pytest

from factgraph.config import TrainConfig
from factgraph.corpus import EmbeddingTable, SentenceInstance, Token


def make_tokens(heads, forms=None):
    forms = forms or [f"w{i}" for i in range(len(heads))]
    return tuple(Token(index=i, form=forms[i], head=heads[i])
                 for i in range(len(heads)))


def make_instance(heads, anchor=0, gold=1.0, forms=None, sid="t0"):
    return SentenceInstance(sentence_id=sid, tokens=make_tokens(heads, forms),
                            anchor_index=anchor, gold_score=gold)


def random_table(rng, forms, dim):
    return EmbeddingTable(dim, {f: rng.normal(size=dim) for f in set(forms)})


def random_tree_heads(rng, n):
    """Random labelled tree: attach each node to an earlier one, then relabel."""
    perm = rng.permutation(n)
    heads = [None] * n
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        heads[perm[i]] = int(perm[parent])
    return heads


@pytest.fixture
def tiny_config():
    return TrainConfig(hidden_size=3, projection_size=4, gcn_maps=3,
                       attention_size=4, regressor_size=3, seed=0).validate()
