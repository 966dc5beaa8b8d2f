"""Reverse-mode differentiation over numpy arrays.

A :class:`Tape` records every primitive in execution order. Each node keeps
its forward function so the whole tape can be replayed from the leaves, and a
vector-Jacobian product used by :func:`backward`. Gradients accumulate in tape
order, which keeps them bitwise reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import NonFiniteLogit, NotScalar, ShapeError


@dataclass(eq=False)
class Node:
    id: int
    op: str
    value: np.ndarray
    parents: tuple[int, ...] = ()
    forward: Callable[..., np.ndarray] | None = None
    vjp: Callable[..., tuple] | None = None
    name: str | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


_ACTIVATIONS = {"identity", "relu", "tanh", "leaky_relu", "abs", "sigmoid", "elu"}


def _activation_forward(kind: str, slope: float) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "identity":
        return lambda x: x.copy()
    if kind == "relu":
        return lambda x: np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh
    if kind == "leaky_relu":
        return lambda x: np.where(x > 0, x, slope * x)
    if kind == "abs":
        return np.abs
    if kind == "sigmoid":
        return lambda x: 0.5 * (1.0 + np.tanh(0.5 * x))
    if kind == "elu":
        return lambda x: np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))
    raise ShapeError(f"unknown nonlinearity {kind!r}")


def _activation_derivative(kind: str, slope: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind == "identity":
        return np.ones_like(x)
    if kind == "relu":
        return (x > 0).astype(np.float64)
    if kind == "tanh":
        return 1.0 - y * y
    if kind == "leaky_relu":
        return np.where(x > 0, 1.0, slope)
    if kind == "abs":
        return np.sign(x)
    if kind == "sigmoid":
        return y * (1.0 - y)
    return np.where(x > 0, 1.0, y + 1.0)


def _segment_max(values: np.ndarray, rows: np.ndarray, n: int) -> np.ndarray:
    out = np.full(n, -np.inf)
    np.maximum.at(out, rows, values)
    return out


def _segment_sum(values: np.ndarray, rows: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    np.add.at(out, rows, values)
    return out


class Tape:
    """Append-only record of primitive operations.

    Parameters enter through :meth:`param` under a unique name; constants
    through :meth:`const`. Every other method records one primitive and
    returns its output :class:`Node`.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self.params: dict[str, int] = {}

    def _record(self, op: str, parents: Sequence[Node], forward, vjp) -> Node:
        value = forward(*(p.value for p in parents))
        node = Node(
            id=len(self.nodes),
            op=op,
            value=np.asarray(value, dtype=np.float64),
            parents=tuple(p.id for p in parents),
            forward=forward,
            vjp=vjp,
        )
        self.nodes.append(node)
        return node

    def param(self, name: str, value: np.ndarray) -> Node:
        if name in self.params:
            return self.nodes[self.params[name]]
        node = Node(id=len(self.nodes), op="param", value=np.array(value, dtype=np.float64), name=name)
        self.nodes.append(node)
        self.params[name] = node.id
        return node

    def const(self, value: np.ndarray) -> Node:
        node = Node(id=len(self.nodes), op="const", value=np.array(value, dtype=np.float64))
        self.nodes.append(node)
        return node

    # -- linear algebra -------------------------------------------------

    def matmul(self, a: Node, b: Node) -> Node:
        if a.value.shape[-1] != b.value.shape[0]:
            raise ShapeError(f"matmul of {a.shape} and {b.shape}")
        return self._record(
            "matmul", (a, b),
            lambda x, y: x @ y,
            lambda g, x, y, out: (g @ y.T, x.T @ g),
        )

    def sparse_apply(self, matrix: sp.spmatrix, x: Node) -> Node:
        """Constant sparse matrix times a dense node."""
        m = sp.csr_matrix(matrix)
        if m.shape[1] != x.shape[0]:
            raise ShapeError(f"sparse apply of {m.shape} to {x.shape}")
        mt = m.T.tocsr()
        return self._record(
            "sparse_apply", (x,),
            lambda v: np.asarray(m @ v),
            lambda g, v, out: (np.asarray(mt @ g),),
        )

    def edge_apply(self, values: Node, x: Node, rows: np.ndarray, cols: np.ndarray, n_rows: int) -> Node:
        """Sparse matrix with variable entries ``values`` on a fixed pattern, times ``x``."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if values.value.shape != rows.shape:
            raise ShapeError(f"{values.value.shape[0]} edge values for {rows.size} pattern entries")
        n_cols = x.shape[0]

        def forward(w, v):
            a = sp.csr_matrix((w, (rows, cols)), shape=(n_rows, n_cols))
            return np.asarray(a @ v)

        def vjp(g, w, v, out):
            a_t = sp.csr_matrix((w, (cols, rows)), shape=(n_cols, n_rows))
            g_w = np.einsum("ef,ef->e", g[rows], v[cols]) if rows.size else np.zeros(0)
            return g_w, np.asarray(a_t @ g)

        return self._record("edge_apply", (values, x), forward, vjp)

    # -- elementwise ----------------------------------------------------

    def add(self, *nodes: Node) -> Node:
        if len(nodes) == 1:
            return nodes[0]
        shapes = [n.shape for n in nodes]
        return self._record(
            "add", nodes,
            lambda *vs: sum(vs[1:], vs[0].copy()),
            lambda g, *args: tuple(_unbroadcast(g, s) for s in shapes),
        )

    def scale(self, a: Node, c: float) -> Node:
        c = float(c)
        return self._record("scale", (a,), lambda x: c * x, lambda g, x, out: (c * g,))

    def mul_const(self, a: Node, c: np.ndarray) -> Node:
        c = np.asarray(c, dtype=np.float64)
        return self._record(
            "mul_const", (a,),
            lambda x: x * c,
            lambda g, x, out: (_unbroadcast(g * c, x.shape),),
        )

    def activation(self, a: Node, kind: str, slope: float = 0.2) -> Node:
        if kind not in _ACTIVATIONS:
            raise ShapeError(f"unknown nonlinearity {kind!r}")
        fwd = _activation_forward(kind, slope)
        return self._record(
            f"act:{kind}", (a,),
            fwd,
            lambda g, x, out: (g * _activation_derivative(kind, slope, x, out),),
        )

    # -- structure ------------------------------------------------------

    def concat(self, nodes: Sequence[Node], axis: int = 1) -> Node:
        sizes = [n.shape[axis] for n in nodes]
        cuts = np.cumsum(sizes)[:-1]
        return self._record(
            "concat", tuple(nodes),
            lambda *vs: np.concatenate(vs, axis=axis),
            lambda g, *args: tuple(np.split(g, cuts, axis=axis)[: len(sizes)]),
        )

    def gather(self, a: Node, index: np.ndarray) -> Node:
        """Rows ``a[index]``."""
        index = np.asarray(index, dtype=np.int64)

        def vjp(g, x, out):
            gx = np.zeros_like(x)
            np.add.at(gx, index, g)
            return (gx,)

        return self._record("gather", (a,), lambda x: x[index], vjp)

    def reduce_mean(self, a: Node, axis: int | None = 0) -> Node:
        def forward(x):
            return x.mean(axis=axis, keepdims=True) if axis is not None else np.asarray(x.mean())

        def vjp(g, x, out):
            n = x.shape[axis] if axis is not None else max(x.size, 1)
            return (np.broadcast_to(g, x.shape) / max(n, 1),)

        return self._record("reduce_mean", (a,), forward, vjp)

    def slice(self, a: Node, start: int, stop: int) -> Node:
        """``a[start:stop]`` along the first axis."""

        def vjp(g, x, out):
            gx = np.zeros_like(x)
            gx[start:stop] = g
            return (gx,)

        return self._record("slice", (a,), lambda x: x[start:stop], vjp)

    def reshape(self, a: Node, shape: tuple[int, ...]) -> Node:
        return self._record(
            "reshape", (a,),
            lambda x: x.reshape(shape),
            lambda g, x, out: (g.reshape(x.shape),),
        )

    # -- attention ------------------------------------------------------

    def segment_softmax(self, logits: Node, rows: np.ndarray, n_rows: int) -> Node:
        """Softmax of edge logits within each row segment (max-subtracted)."""
        rows = np.asarray(rows, dtype=np.int64)

        def forward(z):
            if not np.all(np.isfinite(z)):
                raise NonFiniteLogit("attention logits are not finite")
            if z.size == 0:
                return z.copy()
            shifted = z - _segment_max(z, rows, n_rows)[rows]
            e = np.exp(shifted)
            return e / _segment_sum(e, rows, n_rows)[rows]

        def vjp(g, z, alpha):
            if z.size == 0:
                return (np.zeros(0),)
            dot = _segment_sum(alpha * g, rows, n_rows)
            return (alpha * (g - dot[rows]),)

        return self._record("segment_softmax", (logits,), forward, vjp)

    def log_softmax(self, a: Node) -> Node:
        def forward(x):
            shifted = x - x.max(axis=1, keepdims=True)
            return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

        def vjp(g, x, out):
            return (g - np.exp(out) * g.sum(axis=1, keepdims=True),)

        return self._record("log_softmax", (a,), forward, vjp)

    def custom(self, op: str, parents: Sequence[Node], forward, vjp) -> Node:
        """Record a primitive defined elsewhere (losses)."""
        return self._record(op, parents, forward, vjp)

    # -- replay ---------------------------------------------------------

    def replay(self) -> list[np.ndarray]:
        """Recompute every node from the recorded leaves."""
        values: list[np.ndarray] = []
        for node in self.nodes:
            if node.forward is None:
                values.append(node.value)
            else:
                values.append(np.asarray(node.forward(*(values[p] for p in node.parents)), dtype=np.float64))
        return values


def backward(tape: Tape, loss: Node) -> dict[str, np.ndarray]:
    """Gradients of a scalar ``loss`` for every parameter on ``tape``.

    Parameters the loss does not reach get zero gradients.
    """
    if loss.value.size != 1:
        raise NotScalar(f"loss has shape {loss.value.shape}")
    grads: dict[int, np.ndarray] = {loss.id: np.ones_like(loss.value)}
    for node in reversed(tape.nodes[: loss.id + 1]):
        g = grads.get(node.id)
        if g is None or node.vjp is None:
            continue
        parent_values = [tape.nodes[p].value for p in node.parents]
        parent_grads = node.vjp(g, *parent_values, node.value)
        for pid, pg in zip(node.parents, parent_grads):
            pg = np.asarray(pg, dtype=np.float64).reshape(tape.nodes[pid].value.shape)
            if pid in grads:
                grads[pid] = grads[pid] + pg
            else:
                grads[pid] = pg
    return {
        name: grads.get(nid, np.zeros_like(tape.nodes[nid].value))
        for name, nid in tape.params.items()
    }
