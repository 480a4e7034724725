"""Dense float64 tensors with reverse-mode automatic differentiation.

Every value the model computes lives in a Tensor: a numpy float64 array plus
the bookkeeping needed to replay the computation backwards. Operations are
module-level functions that record their inputs and a backward closure; a
graph is rebuilt from scratch for every forward pass (sentence lengths vary),
and backward() walks it exactly once in reverse topological order.

Broadcasting is deliberately restricted: elementwise ops accept equal shapes
or a 0-d scalar on either side, nothing else. The handful of row/pair
broadcast patterns the model needs are explicit ops (add_rowvec,
pairwise_sum) with hand-written gradients.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, DomainError

Array = np.ndarray


class Tensor:
    """One node of the computation graph.

    data          float64 ndarray (row-major), immutable after creation by ops
    requires_grad whether backward() should deposit a gradient here
    grad          same-shape buffer, allocated iff requires_grad
    op            short name of the producing operation ("leaf" for inputs)
    parents       input nodes, in the order the op consumed them
    """

    __slots__ = ("data", "requires_grad", "grad", "op", "parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        op: str = "leaf",
        parents: tuple["Tensor", ...] = (),
        backward: Callable[[Array], None] | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Array | None = np.zeros_like(self.data) if self.requires_grad else None
        self.op = op
        self.parents = parents
        self._backward = backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Tensor(op={self.op!r}, shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    """Wrap plain numbers/arrays as constant tensors; pass Tensors through."""
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


def _node(data: Array, parents: tuple[Tensor, ...], op: str,
          backward: Callable[[Array], None]) -> Tensor:
    req = any(p.requires_grad for p in parents)
    return Tensor(data, requires_grad=req, op=op, parents=parents,
                  backward=backward if req else None)


def _accum(t: Tensor, g: Array) -> None:
    if t.requires_grad:
        t.grad += g


# ---------------------------------------------------------------------------
# elementwise arithmetic (equal shapes or 0-d scalar on one side)
# ---------------------------------------------------------------------------

def _check_elementwise(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape or a.data.ndim == 0 or b.data.ndim == 0:
        return
    raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} are not "
                         "equal and neither is a scalar")


def _reduce_to(g: Array, shape: tuple[int, ...]) -> Array:
    # Undo scalar broadcasting: a 0-d operand receives the summed gradient.
    if shape == g.shape:
        return g
    return np.asarray(g.sum(), dtype=np.float64).reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "add")
    out_data = a.data + b.data

    def bw(g: Array) -> None:
        _accum(a, _reduce_to(g, a.shape))
        _accum(b, _reduce_to(g, b.shape))

    return _node(out_data, (a, b), "add", bw)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "sub")
    out_data = a.data - b.data

    def bw(g: Array) -> None:
        _accum(a, _reduce_to(g, a.shape))
        _accum(b, _reduce_to(-g, b.shape))

    return _node(out_data, (a, b), "sub", bw)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "mul")
    out_data = a.data * b.data

    def bw(g: Array) -> None:
        _accum(a, _reduce_to(g * b.data, a.shape))
        _accum(b, _reduce_to(g * a.data, b.shape))

    return _node(out_data, (a, b), "mul", bw)


# ---------------------------------------------------------------------------
# nonlinearities
# ---------------------------------------------------------------------------

def _sigmoid(x: Array) -> Array:
    # Piecewise form avoids exp overflow warnings for large |x|.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def bw(g: Array) -> None:
        _accum(a, g * (1.0 - out_data * out_data))

    return _node(out_data, (a,), "tanh", bw)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out_data = _sigmoid(a.data)

    def bw(g: Array) -> None:
        _accum(a, g * out_data * (1.0 - out_data))

    return _node(out_data, (a,), "sigmoid", bw)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.maximum(a.data, 0.0)

    def bw(g: Array) -> None:
        _accum(a, g * (a.data > 0.0))

    return _node(out_data, (a,), "relu", bw)


def softmax(a) -> Tensor:
    """Stable softmax of a 1-D tensor."""
    a = as_tensor(a)
    if a.data.ndim != 1:
        raise ContractError(f"softmax expects a 1-D tensor, got shape {a.shape}")
    if a.data.size == 0:
        raise DomainError("softmax of an empty vector is undefined")
    shifted = a.data - a.data.max()
    e = np.exp(shifted)
    out_data = e / e.sum()

    def bw(g: Array) -> None:
        # dx_j = y_j * (g_j - sum_i g_i y_i)
        _accum(a, out_data * (g - np.dot(g, out_data)))

    return _node(out_data, (a,), "softmax", bw)


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise DimensionError(f"matmul expects two matrices, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: inner dimensions differ, {a.shape} vs {b.shape}")
    out_data = a.data @ b.data

    def bw(g: Array) -> None:
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)

    return _node(out_data, (a, b), "matmul", bw)


def matvec(w, x) -> Tensor:
    """Matrix-vector product: [m x k] @ [k] -> [m]."""
    w, x = as_tensor(w), as_tensor(x)
    if w.data.ndim != 2 or x.data.ndim != 1:
        raise DimensionError(f"matvec expects matrix and vector, got {w.shape} and {x.shape}")
    if w.shape[1] != x.shape[0]:
        raise DimensionError(f"matvec: inner dimensions differ, {w.shape} vs {x.shape}")
    out_data = w.data @ x.data

    def bw(g: Array) -> None:
        _accum(w, np.outer(g, x.data))
        _accum(x, w.data.T @ g)

    return _node(out_data, (w, x), "matvec", bw)


def vecmat(x, w) -> Tensor:
    """Row-vector-matrix product: [n] @ [n x m] -> [m]."""
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 1 or w.data.ndim != 2:
        raise DimensionError(f"vecmat expects vector and matrix, got {x.shape} and {w.shape}")
    if x.shape[0] != w.shape[0]:
        raise DimensionError(f"vecmat: inner dimensions differ, {x.shape} vs {w.shape}")
    out_data = x.data @ w.data

    def bw(g: Array) -> None:
        _accum(x, w.data @ g)
        _accum(w, np.outer(x.data, g))

    return _node(out_data, (x, w), "vecmat", bw)


def dot(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 1 or b.data.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"dot expects equal-length vectors, got {a.shape} and {b.shape}")
    out_data = np.asarray(np.dot(a.data, b.data))

    def bw(g: Array) -> None:
        _accum(a, g * b.data)
        _accum(b, g * a.data)

    return _node(out_data, (a, b), "dot", bw)


def transpose(a) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got shape {a.shape}")
    out_data = a.data.T.copy()

    def bw(g: Array) -> None:
        _accum(a, g.T)

    return _node(out_data, (a,), "transpose", bw)


def add_rowvec(m, v) -> Tensor:
    """Add a length-d vector to every row of an [n x d] matrix."""
    m, v = as_tensor(m), as_tensor(v)
    if m.data.ndim != 2 or v.data.ndim != 1 or m.shape[1] != v.shape[0]:
        raise DimensionError(f"add_rowvec: incompatible shapes {m.shape} and {v.shape}")
    out_data = m.data + v.data

    def bw(g: Array) -> None:
        _accum(m, g)
        _accum(v, g.sum(axis=0))

    return _node(out_data, (m, v), "add_rowvec", bw)


def pairwise_sum(u, v) -> Tensor:
    """out[i, j] = u[i] + v[j] for vectors u [n], v [m]."""
    u, v = as_tensor(u), as_tensor(v)
    if u.data.ndim != 1 or v.data.ndim != 1:
        raise DimensionError(f"pairwise_sum expects two vectors, got {u.shape} and {v.shape}")
    out_data = u.data[:, None] + v.data[None, :]

    def bw(g: Array) -> None:
        _accum(u, g.sum(axis=1))
        _accum(v, g.sum(axis=0))

    return _node(out_data, (u, v), "pairwise_sum", bw)


def row_normalize(a) -> Tensor:
    """Divide each row of a nonnegative matrix by its (strictly positive) sum."""
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise DimensionError(f"row_normalize expects a matrix, got shape {a.shape}")
    s = a.data.sum(axis=1, keepdims=True)
    if np.any(s <= 0.0):
        raise DomainError("row_normalize requires every row sum to be positive")
    out_data = a.data / s

    def bw(g: Array) -> None:
        # d/da[i,j] of a[i,j]/s[i]: g/s - rowsum(g*out)/s
        _accum(a, g / s - (g * out_data).sum(axis=1, keepdims=True) / s)

    return _node(out_data, (a,), "row_normalize", bw)


# ---------------------------------------------------------------------------
# shape surgery
# ---------------------------------------------------------------------------

def concat(a, b) -> Tensor:
    """Concatenate along the last axis; all leading dimensions must agree."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != b.data.ndim or a.data.ndim == 0:
        raise DimensionError(f"concat: ranks differ or are zero, {a.shape} vs {b.shape}")
    if a.shape[:-1] != b.shape[:-1]:
        raise DimensionError(f"concat: leading shapes differ, {a.shape} vs {b.shape}")
    split = a.shape[-1]
    out_data = np.concatenate([a.data, b.data], axis=-1)

    def bw(g: Array) -> None:
        _accum(a, g[..., :split])
        _accum(b, g[..., split:])

    return _node(out_data, (a, b), "concat", bw)


def row(m, i: int) -> Tensor:
    """Extract row i of a matrix as a vector."""
    m = as_tensor(m)
    if m.data.ndim != 2:
        raise DimensionError(f"row expects a matrix, got shape {m.shape}")
    if not 0 <= i < m.shape[0]:
        raise ContractError(f"row index {i} out of bounds for shape {m.shape}")
    out_data = m.data[i].copy()

    def bw(g: Array) -> None:
        if m.requires_grad:
            m.grad[i] += g

    return _node(out_data, (m,), "row", bw)


def stack_rows(vectors: Sequence[Tensor]) -> Tensor:
    """Stack equal-length 1-D tensors into an [n x d] matrix."""
    vs = [as_tensor(v) for v in vectors]
    if not vs:
        raise DomainError("stack_rows of an empty sequence")
    d = vs[0].shape
    for v in vs:
        if v.data.ndim != 1 or v.shape != d:
            raise DimensionError(f"stack_rows: row shapes differ, {d} vs {v.shape}")
    out_data = np.stack([v.data for v in vs], axis=0)

    def bw(g: Array) -> None:
        for i, v in enumerate(vs):
            _accum(v, g[i])

    return _node(out_data, tuple(vs), "stack_rows", bw)


def slice1d(x, start: int, stop: int) -> Tensor:
    """Contiguous slice [start:stop] of a vector."""
    x = as_tensor(x)
    if x.data.ndim != 1:
        raise DimensionError(f"slice1d expects a vector, got shape {x.shape}")
    if not 0 <= start <= stop <= x.shape[0]:
        raise ContractError(f"slice1d bounds [{start}, {stop}) invalid for shape {x.shape}")
    out_data = x.data[start:stop].copy()

    def bw(g: Array) -> None:
        if x.requires_grad:
            x.grad[start:stop] += g

    return _node(out_data, (x,), "slice1d", bw)


# ---------------------------------------------------------------------------
# reductions and losses
# ---------------------------------------------------------------------------

def sum_all(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.asarray(a.data.sum())

    def bw(g: Array) -> None:
        _accum(a, np.full_like(a.data, float(g)))

    return _node(out_data, (a,), "sum_all", bw)


def huber(pred, gold: float, delta: float = 1.0) -> Tensor:
    """Huber loss between a single-element prediction and a constant target.

    Quadratic for |e| <= delta, linear beyond; the gradient w.r.t. the
    prediction is e clipped to [-delta, +delta].
    """
    from .errors import ConfigError

    if delta <= 0.0:
        raise ConfigError(f"huber delta must be positive, got {delta}")
    pred = as_tensor(pred)
    if pred.data.size != 1:
        raise ContractError(f"huber expects a scalar prediction, got shape {pred.shape}")
    e = float(pred.data.reshape(())) - float(gold)
    if abs(e) <= delta:
        value = 0.5 * e * e
    else:
        value = delta * (abs(e) - 0.5 * delta)

    def bw(g: Array) -> None:
        de = float(np.clip(e, -delta, delta))
        _accum(pred, (float(g) * de) * np.ones_like(pred.data))

    return _node(np.asarray(value), (pred,), "huber", bw)


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------

def topo_order(root: Tensor) -> list[Tensor]:
    """All nodes reachable from root, inputs before consumers."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate grad with d(loss)/d(tensor) for every reachable tensor.

    Gradients on leaves accumulate across calls (zero them between steps);
    interior-node buffers are reset here so re-running backward on the same
    graph stays correct.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order = topo_order(loss)
    for node in order:
        if node.parents and node.grad is not None:
            node.grad[...] = 0.0
    loss.grad[...] = 1.0
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node.grad)


# ---------------------------------------------------------------------------
# finite-difference verification
# ---------------------------------------------------------------------------

def grad_check(f: Callable[[], Tensor], params: Iterable[Tensor],
               epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    f rebuilds the forward graph and returns the scalar loss; it must be
    deterministic. Error per coordinate is
    |analytic - numeric| / max(1, |numeric|).
    """
    if epsilon <= 0.0:
        raise ContractError(f"epsilon must be positive, got {epsilon}")
    params = list(params)
    for p in params:
        p.zero_grad()
    backward(f())
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, an in zip(params, analytic):
        flat = p.data.reshape(-1)
        an_flat = an.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = f().item()
            flat[i] = orig - epsilon
            down = f().item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            err = abs(an_flat[i] - numeric) / max(1.0, abs(numeric))
            if err > worst:
                worst = err
    return worst
