"""Tensor core: values, gradients vs central finite differences, graph rules."""

import numpy as np
import pytest

from factgraph import tensor as T
from factgraph.errors import ConfigError, ContractError, DimensionError, DomainError


def fd_check(build, params, eps=1e-5, tol=1e-6):
    """Assert analytic gradients match central differences on every coordinate."""
    err = T.grad_check(build, params, epsilon=eps)
    assert err < tol, f"max relative gradient error {err}"


def rand_param(rng, *shape):
    return T.Tensor(rng.uniform(-1.0, 1.0, size=shape), requires_grad=True)


class TestMatmul:
    def test_identity(self):
        a = T.Tensor(np.eye(2))
        b = T.Tensor([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(T.matmul(a, b).data, [[1.0, 2.0], [3.0, 4.0]])

    def test_selector_row(self):
        sel = T.Tensor([[1.0, 0.0], [0.0, 0.0]])
        v = T.Tensor([[5.0], [7.0]])
        assert np.array_equal(T.matmul(sel, v).data, [[5.0], [0.0]])

    def test_gradients_vs_finite_differences(self):
        rng = np.random.default_rng(0)
        a = rand_param(rng, 3, 4)
        b = rand_param(rng, 4, 2)
        fd_check(lambda: T.sum_all(T.matmul(a, b)), [a, b])

    def test_shape_mismatch_names_both_shapes(self):
        a = T.Tensor(np.zeros((2, 3)))
        b = T.Tensor(np.zeros((2, 3)))
        with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
            T.matmul(a, b)


class TestElementwise:
    def test_sigmoid_at_zero(self):
        assert T.sigmoid(T.Tensor(0.0)).item() == 0.5

    def test_tanh_at_zero(self):
        assert T.tanh(T.Tensor(0.0)).item() == 0.0

    def test_sigmoid_gradient_at_zero(self):
        x = T.Tensor(np.zeros(1), requires_grad=True)
        T.backward(T.sum_all(T.sigmoid(x)))
        assert abs(x.grad[0] - 0.25) < 1e-12
        fd_check(lambda: T.sum_all(T.sigmoid(x)), [x])

    def test_sigmoid_range_and_stability(self):
        y = T.sigmoid(T.Tensor([-1000.0, -5.0, 0.0, 5.0, 1000.0])).data
        assert np.all(y >= 0.0) and np.all(y <= 1.0)
        assert y[0] < 1e-12 and y[-1] > 1.0 - 1e-12

    def test_scalar_broadcast(self):
        x = T.Tensor([1.0, 2.0], requires_grad=True)
        y = T.mul(x, 3.0)
        assert np.array_equal(y.data, [3.0, 6.0])
        s = T.Tensor(2.0, requires_grad=True)
        T.backward(T.sum_all(T.mul(x, s)))
        assert s.grad.reshape(()) == pytest.approx(3.0)

    def test_incompatible_shapes(self):
        with pytest.raises(DimensionError):
            T.add(T.Tensor([1.0, 2.0]), T.Tensor([1.0, 2.0, 3.0]))

    @pytest.mark.parametrize("op", [T.add, T.sub, T.mul])
    def test_binary_op_gradients(self, op):
        rng = np.random.default_rng(7)
        a = rand_param(rng, 3, 2)
        b = rand_param(rng, 3, 2)
        fd_check(lambda: T.sum_all(op(a, b)), [a, b])

    @pytest.mark.parametrize("op", [T.tanh, T.sigmoid, T.relu])
    def test_unary_op_gradients(self, op):
        rng = np.random.default_rng(8)
        x = T.Tensor(rng.uniform(0.1, 1.0, size=(4,)) * np.array([1, -1, 1, -1]),
                     requires_grad=True)
        fd_check(lambda: T.sum_all(op(x)), [x])


class TestSoftmax:
    def test_uniform_on_equal_inputs(self):
        y = T.softmax(T.Tensor([0.0, 0.0, 0.0])).data
        assert np.allclose(y, 1.0 / 3.0, atol=1e-15)

    def test_no_overflow_on_large_inputs(self):
        y = T.softmax(T.Tensor([1000.0, 0.0])).data
        assert np.isfinite(y).all()
        assert y[0] > 1.0 - 1e-12 and y[1] < 1e-12

    def test_sums_to_one_and_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            y = T.softmax(T.Tensor(rng.normal(size=rng.integers(1, 9)))).data
            assert abs(y.sum() - 1.0) < 1e-9
            assert np.all(y > 0.0)

    def test_jacobian_vs_finite_differences(self):
        rng = np.random.default_rng(4)
        x = T.Tensor(rng.normal(size=5), requires_grad=True)
        w = T.Tensor(rng.normal(size=5))  # random probe so every row is exercised
        fd_check(lambda: T.sum_all(T.mul(T.softmax(x), w)), [x], tol=1e-5)

    def test_empty_input_rejected(self):
        with pytest.raises(DomainError):
            T.softmax(T.Tensor(np.zeros(0)))


class TestConcat:
    def test_values(self):
        out = T.concat(T.Tensor([1.0, 2.0]), T.Tensor([3.0]))
        assert np.array_equal(out.data, [1.0, 2.0, 3.0])

    def test_gradient_of_sum_is_ones(self):
        a = T.Tensor([1.0, 2.0], requires_grad=True)
        b = T.Tensor([3.0], requires_grad=True)
        T.backward(T.sum_all(T.concat(a, b)))
        assert np.array_equal(a.grad, [1.0, 1.0])
        assert np.array_equal(b.grad, [1.0])

    def test_gradients_vs_finite_differences(self):
        rng = np.random.default_rng(5)
        a = rand_param(rng, 2, 3)
        b = rand_param(rng, 2, 2)
        w = T.Tensor(rng.normal(size=(2, 5)))
        fd_check(lambda: T.sum_all(T.mul(T.concat(a, b), w)), [a, b])

    def test_leading_shape_mismatch(self):
        with pytest.raises(DimensionError):
            T.concat(T.Tensor(np.zeros((2, 3))), T.Tensor(np.zeros((3, 2))))


class TestBackward:
    def test_sum_gradient_is_ones(self):
        w = T.Tensor([1.0, 5.0, -2.0], requires_grad=True)
        T.backward(T.sum_all(w))
        assert np.array_equal(w.grad, [1.0, 1.0, 1.0])

    def test_quadratic_gradient(self):
        w = T.Tensor([1.0, 2.0], requires_grad=True)
        T.backward(T.sum_all(T.mul(w, w)))
        assert np.array_equal(w.grad, [2.0, 4.0])

    def test_fanout_accumulates(self):
        x = T.Tensor([3.0], requires_grad=True)
        T.backward(T.sum_all(T.add(x, x)))
        assert np.array_equal(x.grad, [2.0])

    def test_accumulation_across_calls(self):
        w = T.Tensor([1.0, 2.0], requires_grad=True)
        T.backward(T.sum_all(w))
        T.backward(T.sum_all(w))
        assert np.array_equal(w.grad, [2.0, 2.0])

    def test_repeated_backward_same_graph(self):
        w = T.Tensor([1.0, 2.0], requires_grad=True)
        loss = T.sum_all(T.mul(w, w))
        T.backward(loss)
        T.backward(loss)
        assert np.array_equal(w.grad, [4.0, 8.0])

    def test_unreachable_param_grad_stays_zero(self):
        w = T.Tensor([1.0], requires_grad=True)
        other = T.Tensor([1.0], requires_grad=True)
        T.backward(T.sum_all(w))
        assert np.array_equal(other.grad, [0.0])

    def test_non_scalar_loss_rejected(self):
        w = T.Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ContractError):
            T.backward(T.add(w, w))

    def test_topological_order(self):
        a = T.Tensor([1.0], requires_grad=True)
        b = T.add(a, a)
        c = T.mul(b, a)
        order = T.topo_order(c)
        pos = {id(t): i for i, t in enumerate(order)}
        for node in order:
            for parent in node.parents:
                assert pos[id(parent)] < pos[id(node)]


class TestShapeSurgery:
    def test_row_and_slice_gradients(self):
        rng = np.random.default_rng(6)
        m = rand_param(rng, 3, 4)
        fd_check(lambda: T.sum_all(T.mul(T.row(m, 1), T.row(m, 1))), [m])
        x = rand_param(rng, 6)
        fd_check(lambda: T.sum_all(T.mul(T.slice1d(x, 1, 4), 2.0)), [x])

    def test_row_bounds(self):
        with pytest.raises(ContractError):
            T.row(T.Tensor(np.zeros((2, 2))), 2)

    def test_stack_rows_roundtrip(self):
        vs = [T.Tensor([1.0, 2.0], requires_grad=True),
              T.Tensor([3.0, 4.0], requires_grad=True)]
        m = T.stack_rows(vs)
        assert np.array_equal(m.data, [[1.0, 2.0], [3.0, 4.0]])
        T.backward(T.sum_all(T.mul(m, m)))
        assert np.array_equal(vs[0].grad, [2.0, 4.0])

    def test_pairwise_sum(self):
        u = T.Tensor([1.0, 2.0], requires_grad=True)
        v = T.Tensor([10.0, 20.0, 30.0], requires_grad=True)
        out = T.pairwise_sum(u, v)
        assert np.array_equal(out.data, [[11.0, 21.0, 31.0], [12.0, 22.0, 32.0]])
        w = T.Tensor(np.arange(6.0).reshape(2, 3))
        fd_check(lambda: T.sum_all(T.mul(T.pairwise_sum(u, v), w)), [u, v])

    def test_matvec_vecmat_dot_transpose_add_rowvec_gradients(self):
        rng = np.random.default_rng(9)
        w = rand_param(rng, 3, 4)
        x = rand_param(rng, 4)
        y = rand_param(rng, 3)
        b = rand_param(rng, 4)
        fd_check(lambda: T.sum_all(T.matvec(w, x)), [w, x])
        fd_check(lambda: T.sum_all(T.vecmat(y, w)), [y, w])
        fd_check(lambda: T.dot(x, b), [x, b])
        fd_check(lambda: T.sum_all(T.mul(T.transpose(w), T.transpose(w))), [w])
        fd_check(lambda: T.sum_all(T.add_rowvec(w, b)), [w, b])

    def test_row_normalize(self):
        rng = np.random.default_rng(10)
        a = T.Tensor(rng.uniform(0.1, 1.0, size=(3, 4)), requires_grad=True)
        out = T.row_normalize(a)
        assert np.allclose(out.data.sum(axis=1), 1.0, atol=1e-12)
        w = T.Tensor(rng.normal(size=(3, 4)))
        fd_check(lambda: T.sum_all(T.mul(T.row_normalize(a), w)), [a], tol=1e-5)


class TestGradCheck:
    def test_quadratic_is_exact(self):
        w = T.Tensor([0.3, -0.7, 1.1], requires_grad=True)
        err = T.grad_check(lambda: T.mul(T.sum_all(T.mul(w, w)), 0.5), [w])
        assert err < 1e-8

    def test_sigmoid_chain(self):
        w = T.Tensor([0.25, -0.5], requires_grad=True)
        err = T.grad_check(lambda: T.sum_all(T.sigmoid(w)), [w])
        assert err < 1e-6

    def test_bad_epsilon_rejected(self):
        w = T.Tensor([1.0], requires_grad=True)
        with pytest.raises(ContractError):
            T.grad_check(lambda: T.sum_all(w), [w], epsilon=0.0)

    def test_detects_wrong_gradient(self):
        # negative control: a deliberately corrupted backward must be caught
        w = T.Tensor([0.4, -0.2], requires_grad=True)

        def broken():
            x = T.tanh(w)
            out = T.sum_all(x)
            real = out._backward

            def corrupt(g):
                real(g * 1.5)

            out._backward = corrupt
            return out

        assert T.grad_check(broken, [w]) > 1e-2


class TestRandomShapeProperties:
    def test_gradients_match_fd_over_random_shapes(self):
        # property sweep: every differentiable op, random shapes up to 8
        rng = np.random.default_rng(11)
        for trial in range(10):
            n = int(rng.integers(1, 9))
            m = int(rng.integers(1, 9))
            k = int(rng.integers(1, 9))
            a = rand_param(rng, n, k)
            b = rand_param(rng, k, m)
            v = rand_param(rng, k)
            probe = T.Tensor(rng.normal(size=(n, m)))
            fd_check(lambda: T.sum_all(T.mul(T.matmul(a, b), probe)), [a, b], tol=1e-4)
            fd_check(lambda: T.sum_all(T.tanh(T.matvec(a, v))), [a, v], tol=1e-4)

    def test_determinism(self):
        def run():
            rng = np.random.default_rng(42)
            a = rand_param(rng, 4, 4)
            b = rand_param(rng, 4, 4)
            loss = T.sum_all(T.sigmoid(T.matmul(a, b)))
            T.backward(loss)
            return loss.item(), a.grad.copy()

        l1, g1 = run()
        l2, g2 = run()
        assert l1 == l2
        assert np.array_equal(g1, g2)


class TestHuber:
    def test_zero_at_match(self):
        assert T.huber(T.Tensor([2.0]), 2.0).item() == 0.0

    def test_quadratic_branch(self):
        assert T.huber(T.Tensor([0.5]), 0.0, delta=1.0).item() == pytest.approx(0.125)

    def test_linear_branch(self):
        assert T.huber(T.Tensor([3.0]), 0.0, delta=1.0).item() == pytest.approx(2.5)

    def test_gradient_clipped_to_delta(self):
        p = T.Tensor([5.0], requires_grad=True)
        T.backward(T.huber(p, 0.0, delta=1.0))
        assert p.grad[0] == pytest.approx(1.0)
        p2 = T.Tensor([-5.0], requires_grad=True)
        T.backward(T.huber(p2, 0.0, delta=1.0))
        assert p2.grad[0] == pytest.approx(-1.0)

    def test_bad_delta(self):
        with pytest.raises(ConfigError):
            T.huber(T.Tensor([1.0]), 0.0, delta=0.0)
