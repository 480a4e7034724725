"""Evaluation measures: mean absolute error and Pearson correlation.

Pearson uses single-pass Welford-style co-moment accumulation so long
vectors do not lose precision to catastrophic cancellation; the test suite
pins it against a two-pass textbook implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ContractError

_VARIANCE_FLOOR = 1e-12


@dataclass
class EvalReport:
    mae: float
    pearson_r: float | None  # None when either side has no variance
    n: int
    per_instance: list[tuple[str, float, float]]  # (sentence_id, gold, pred)


def _check_pair(preds: Sequence[float], golds: Sequence[float]) -> int:
    if len(preds) != len(golds):
        raise ContractError(f"length mismatch: {len(preds)} predictions "
                            f"vs {len(golds)} golds")
    if len(preds) == 0:
        raise ContractError("metrics need at least one pair")
    return len(preds)


def mae(preds: Sequence[float], golds: Sequence[float]) -> float:
    n = _check_pair(preds, golds)
    return sum(abs(p - g) for p, g in zip(preds, golds)) / n


def pearson(preds: Sequence[float], golds: Sequence[float]) -> float | None:
    n = _check_pair(preds, golds)
    mean_p = mean_g = 0.0
    m_pp = m_gg = m_pg = 0.0
    for i, (p, g) in enumerate(zip(preds, golds), start=1):
        dp = p - mean_p
        dg = g - mean_g
        mean_p += dp / i
        mean_g += dg / i
        # co-moments against the updated means
        m_pp += dp * (p - mean_p)
        m_gg += dg * (g - mean_g)
        m_pg += dp * (g - mean_g)
    sd_p = math.sqrt(m_pp / n)
    sd_g = math.sqrt(m_gg / n)
    if sd_p < _VARIANCE_FLOOR or sd_g < _VARIANCE_FLOOR:
        return None
    return m_pg / math.sqrt(m_pp * m_gg)
