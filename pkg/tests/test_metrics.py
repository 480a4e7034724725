"""Metrics: MAE and Pearson r against independent two-pass oracles."""

import math

import numpy as np
import pytest

from factgraph.errors import ContractError
from factgraph.metrics import mae, pearson


def two_pass_pearson(xs, ys):
    """Textbook formula: covariance over the product of standard deviations."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
    sx = math.sqrt(sum((x - mx) ** 2 for x in xs) / n)
    sy = math.sqrt(sum((y - my) ** 2 for y in ys) / n)
    if sx == 0.0 or sy == 0.0:
        return None
    return cov / (sx * sy)


class TestMae:
    def test_zero_on_identical(self):
        assert mae([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_single_pair(self):
        assert mae([0.0], [-3.0]) == 3.0

    def test_anti_correlated(self):
        assert mae([-1.0, 0.0, 1.0], [1.0, 0.0, -1.0]) == pytest.approx(4.0 / 3.0)

    def test_translation(self):
        rng = np.random.default_rng(0)
        x = list(rng.normal(size=20))
        assert mae([v + 0.7 for v in x], x) == pytest.approx(0.7)

    def test_contract_errors(self):
        with pytest.raises(ContractError):
            mae([1.0], [1.0, 2.0])
        with pytest.raises(ContractError):
            mae([], [])


class TestPearson:
    def test_affine_of_golds_is_one(self):
        golds = [1.0, 2.0, 3.0]
        assert pearson([2 * g + 1 for g in golds], golds) == pytest.approx(1.0)

    def test_negated_is_minus_one(self):
        golds = [1.0, 2.0, 3.0]
        assert pearson([-g for g in golds], golds) == pytest.approx(-1.0)

    def test_constant_input_is_none(self):
        assert pearson([5.0, 5.0, 5.0], [1.0, 2.0, 3.0]) is None

    def test_matches_two_pass_oracle_on_random_vectors(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(2, 200))
            xs = list(rng.normal(loc=rng.uniform(-5, 5), scale=rng.uniform(0.1, 3),
                                 size=n))
            ys = list(rng.normal(size=n) + rng.uniform(-1, 1) * np.array(xs))
            expected = two_pass_pearson(xs, ys)
            got = pearson(xs, ys)
            assert got == pytest.approx(expected, abs=1e-10)
            assert -1.0 <= got <= 1.0 + 1e-15

    def test_affine_invariance_property(self):
        rng = np.random.default_rng(2)
        x = list(rng.normal(size=30))
        for a in (0.5, 2.0, 10.0):
            assert pearson([a * v + 3 for v in x], x) == pytest.approx(1.0)
            assert pearson([-a * v + 3 for v in x], x) == pytest.approx(-1.0)

    def test_joint_permutation_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=25)
        y = rng.normal(size=25)
        perm = rng.permutation(25)
        assert pearson(list(x[perm]), list(y[perm])) == \
            pytest.approx(pearson(list(x), list(y)), abs=1e-12)
        assert mae(list(x[perm]), list(y[perm])) == \
            pytest.approx(mae(list(x), list(y)), abs=1e-12)
