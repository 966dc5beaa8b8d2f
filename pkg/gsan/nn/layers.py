"""GSCCN, GSAN and GSAN-joint layers on a tape.

Per order k, a separate-stack head (GSCCN/GSAN) sums, for each available
adjacency side,

* even terms  sum_p A1^p  Z_k W_{2p}            p = 1..floor(J/2)
* odd terms   sum_p A2^p (B Z_other) W_{2p+1}    p = 0..ceil(J/2)-1

plus the harmonic branch Q_k Z_k W_h. A is the fixed lower/upper Laplacian
(GSCCN) or the attentional Laplacian learned on that side (GSAN). The weight
stack of a side follows the incidence that drives it: B_b with b odd uses the
lower stack, b even the upper stack. The joint head uses one stack, the full
Laplacian for even terms and no harmonic branch.

Powers are evaluated Horner style, one sparse application per power.
"""
from __future__ import annotations

import logging
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ..autodiff import Node, Tape
from ..complex import SimplicialComplex
from ..config import LayerConfig
from ..errors import ShapeError
from ..filters import CochainBundle, branch_of, check_bundle
from ..operators import ComplexOperators, as_operators
from .attention import AttentionalLaplacian, attention_values
from .multihead import combine_head_nodes
from .params import active_set, attention_name

_log = logging.getLogger(__name__)

FAMILIES = ("gsan", "gsccn", "gsan-joint")

Propagator = Callable[[Node], Node]


def _param(P: Mapping[str, Node], name: str) -> Node:
    if name not in P:
        raise ShapeError(f"missing layer parameter {name!r}")
    return P[name]


def _stacked(tape: Tape, nodes: Sequence[Node], n: int) -> Node:
    if not nodes:
        return tape.const(np.zeros((n, 0)))
    return tape.concat(nodes, axis=1)


def _even_sum(tape: Tape, apply: Propagator, ys: Sequence[Node]) -> Node:
    """sum_{p=1..P} A^p y_p."""
    acc = None
    for y in reversed(ys):
        acc = apply(y if acc is None else tape.add(y, acc))
    return acc


def _odd_sum(tape: Tape, apply: Propagator, cs: Sequence[Node]) -> Node:
    """sum_{p=0..P-1} A^p c_p."""
    acc = None
    for c in reversed(cs):
        acc = c if acc is None else tape.add(c, apply(acc))
    return acc


class _HeadContext:
    """What one head needs besides its parameters."""

    def __init__(
        self,
        tape: Tape,
        ops: ComplexOperators,
        cfg: LayerConfig,
        active: tuple[int, ...],
        attentional: bool,
        record: dict | None,
        tag: tuple,
    ) -> None:
        self.tape = tape
        self.ops = ops
        self.cfg = cfg
        self.active = active
        self.attentional = attentional
        self.record = record
        self.tag = tag

    def propagator(self, P: Mapping[str, Node], k: int, side: str, c: int, h: Node) -> Propagator:
        tape = self.tape
        if not self.attentional:
            L = self.ops.laplacian(k, side).matrix
            return lambda x: tape.sparse_apply(L, x)
        support = self.ops.support(k, side)
        phi = attention_values(
            tape, h, _param(P, attention_name((k, side, c))), support,
            self.cfg.attention_slope, self.cfg.signed_masking,
        )
        if self.record is not None:
            self.record[self.tag + (k, side, c)] = AttentionalLaplacian(
                k=k, variant=(side, c), support=support, values=phi.value
            )
        return lambda x: tape.edge_apply(phi, x, support.rows, support.cols, support.n)

    def cross_input(self, Z: Sequence[Node], k: int, side: str) -> Node | None:
        """B_k^T Z_{k-1} (lower side) or B_{k+1} Z_{k+1} (upper side); None if that order is inactive."""
        other = k - 1 if side == "d" else k + 1
        if other not in self.active:
            return None
        if side == "d":
            return self.tape.sparse_apply(self.ops.boundary(k).matrix.T, Z[other])
        return self.tape.sparse_apply(self.ops.boundary(k + 1).matrix, Z[other])

    def sides(self, k: int) -> list[str]:
        out = []
        if k >= 1:
            out.append("d")
        if k < self.ops.max_order:
            out.append("u")
        return out


def _separate_head(ctx: _HeadContext, P: Mapping[str, Node], Z: Sequence[Node]) -> dict[int, Node]:
    tape, J = ctx.tape, ctx.cfg.J
    out: dict[int, Node] = {}
    for k in ctx.active:
        n_k = ctx.ops.sizes[k]
        terms = []
        for side in ctx.sides(k):
            stack = "W_" + branch_of(k if side == "d" else k + 1)
            same = [tape.matmul(Z[k], _param(P, f"{stack}.{2 * p}")) for p in range(1, J // 2 + 1)]
            apply1 = ctx.propagator(P, k, side, 1, _stacked(tape, same, n_k))
            if same:
                terms.append(_even_sum(tape, apply1, same))
            mapped = ctx.cross_input(Z, k, side)
            if mapped is None:
                continue
            cross = [tape.matmul(mapped, _param(P, f"{stack}.{2 * p + 1}")) for p in range((J + 1) // 2)]
            apply2 = ctx.propagator(P, k, side, 2, _stacked(tape, cross, n_k))
            terms.append(_odd_sum(tape, apply2, cross))
        if ctx.cfg.use_harmonic:
            Q = ctx.ops.projector(k, ctx.cfg.projector_steps, ctx.cfg.eps_for(k))
            base = tape.sparse_apply(Q.matrix, Z[k])
        else:
            base = Z[k]
        terms.append(tape.matmul(base, _param(P, "W_h")))
        out[k] = tape.add(*terms)
    return out


def _joint_head(ctx: _HeadContext, P: Mapping[str, Node], Z: Sequence[Node]) -> dict[int, Node]:
    tape, J = ctx.tape, ctx.cfg.J
    out: dict[int, Node] = {}
    for k in ctx.active:
        n_k = ctx.ops.sizes[k]
        terms = []
        same = [tape.matmul(Z[k], _param(P, f"W.{2 * p}")) for p in range(1, J // 2 + 1)]
        apply_full = ctx.propagator(P, k, "full", 1, _stacked(tape, same, n_k))
        if same:
            terms.append(_even_sum(tape, apply_full, same))
        for side in ctx.sides(k):
            mapped = ctx.cross_input(Z, k, side)
            if mapped is None:
                continue
            cross = [tape.matmul(mapped, _param(P, f"W.{2 * p + 1}")) for p in range((J + 1) // 2)]
            apply2 = ctx.propagator(P, k, side, 2, _stacked(tape, cross, n_k))
            terms.append(_odd_sum(tape, apply2, cross))
        if not terms:
            terms.append(tape.const(np.zeros((n_k, ctx.cfg.F_out))))
        out[k] = tape.add(*terms)
    return out


def layer_nodes(
    tape: Tape,
    ops: ComplexOperators,
    cfg: LayerConfig,
    family: str,
    heads: Sequence[Mapping[str, Node]],
    Z: Sequence[Node],
    active_orders: Iterable[int] | None = None,
    attention: bool = True,
    record: dict | None = None,
    layer: int = 0,
) -> list[Node]:
    """One layer on the tape; returns a block per order (zeros for inactive orders)."""
    if family not in FAMILIES:
        raise ShapeError(f"unknown layer family {family!r}")
    if len(Z) != ops.max_order + 1:
        raise ShapeError(f"{len(Z)} input blocks for a complex of order {ops.max_order}")
    for k, z in enumerate(Z):
        if z.shape[0] != ops.sizes[k] or (cfg.F_in is not None and z.shape[1] != cfg.F_in):
            raise ShapeError(f"order {k} input of shape {z.shape}, expected ({ops.sizes[k]}, {cfg.F_in})")
    if len(heads) != cfg.heads:
        raise ShapeError(f"{len(heads)} parameter sets for {cfg.heads} heads")
    active = active_set(ops.max_order, active_orders)
    attentional = attention and family != "gsccn"
    _log.debug("layer=%d family=%s heads=%d active=%s attention=%s", layer, family, len(heads), active, attentional)
    head_fn = _joint_head if family == "gsan-joint" else _separate_head
    pre = []
    for h, P in enumerate(heads):
        ctx = _HeadContext(tape, ops, cfg, active, attentional, record, (layer, h))
        pre.append(head_fn(ctx, P, Z))
    return combine_head_nodes(
        tape, pre, cfg.head_combine, cfg.nonlinearity, ops.sizes, cfg.width_out
    )


def _numeric_forward(
    X: SimplicialComplex | ComplexOperators,
    config: LayerConfig,
    family: str,
    params: Mapping[str, np.ndarray] | Sequence[Mapping[str, np.ndarray]],
    Z: CochainBundle,
    attention: bool,
    active_orders: Iterable[int] | None,
    record: dict | None,
) -> CochainBundle:
    ops = as_operators(X)
    check_bundle(ops, Z, config.F_in)
    heads = [params] if isinstance(params, Mapping) else list(params)
    tape = Tape()
    nodes = [
        {name: tape.param(f"head{h}.{name}", value) for name, value in P.items()}
        for h, P in enumerate(heads)
    ]
    inputs = [tape.const(block) for block in Z.blocks]
    out = layer_nodes(tape, ops, config, family, nodes, inputs, active_orders, attention, record)
    return CochainBundle(tuple(node.value for node in out))


def gsccn_layer_forward(
    X: SimplicialComplex | ComplexOperators,
    config: LayerConfig,
    params: Mapping[str, np.ndarray] | Sequence[Mapping[str, np.ndarray]],
    Z: CochainBundle,
    active_orders: Iterable[int] | None = None,
) -> CochainBundle:
    return _numeric_forward(X, config, "gsccn", params, Z, False, active_orders, None)


def gsan_layer_forward(
    X: SimplicialComplex | ComplexOperators,
    config: LayerConfig,
    params: Mapping[str, np.ndarray] | Sequence[Mapping[str, np.ndarray]],
    Z: CochainBundle,
    active_orders: Iterable[int] | None = None,
    record: dict | None = None,
) -> CochainBundle:
    """GSAN layer; pass a dict as ``record`` to collect the attentional Laplacians by (layer, head, k, side, c)."""
    return _numeric_forward(X, config, "gsan", params, Z, True, active_orders, record)


def gsan_joint_layer_forward(
    X: SimplicialComplex | ComplexOperators,
    config: LayerConfig,
    params_joint: Mapping[str, np.ndarray] | Sequence[Mapping[str, np.ndarray]],
    Z: CochainBundle,
    attention: bool | None = None,
    active_orders: Iterable[int] | None = None,
    record: dict | None = None,
) -> CochainBundle:
    """Joint layer. ``attention=None`` turns attention on iff the parameters carry attention vectors."""
    if attention is None:
        sets = [params_joint] if isinstance(params_joint, Mapping) else list(params_joint)
        attention = any(name.startswith("a.") for P in sets for name in P)
    return _numeric_forward(X, config, "gsan-joint", params_joint, Z, attention, active_orders, record)
