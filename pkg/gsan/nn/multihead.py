from __future__ import annotations

from typing import Sequence

import numpy as np

from ..autodiff import Node, Tape
from ..errors import ShapeError
from ..filters import CochainBundle

HEAD_COMBINE_MODES = ("concat", "average")


def combine_head_nodes(
    tape: Tape,
    heads: Sequence[dict[int, Node]],
    mode: str,
    nonlinearity: str,
    sizes: Sequence[int],
    width_out: int,
    slope: float = 0.2,
) -> list[Node]:
    """Merge per-head pre-activations order by order.

    ``concat`` applies the nonlinearity to each head and stacks the heads
    column-wise; ``average`` takes the mean first and applies it once.
    Orders no head computed come back as zero blocks.
    """
    if mode not in HEAD_COMBINE_MODES:
        raise ShapeError(f"unknown head combination {mode!r}")
    if not heads:
        raise ShapeError("at least one head is required")
    out = []
    for k, n in enumerate(sizes):
        blocks = [h[k] for h in heads if k in h]
        if not blocks:
            out.append(tape.const(np.zeros((n, width_out))))
            continue
        if len(blocks) != len(heads):
            raise ShapeError(f"order {k} computed by {len(blocks)} of {len(heads)} heads")
        if len({b.shape for b in blocks}) > 1:
            raise ShapeError(f"heads disagree on the shape of order {k}: {sorted({b.shape for b in blocks})}")
        if mode == "concat":
            out.append(tape.concat([tape.activation(b, nonlinearity, slope) for b in blocks], axis=1))
        else:
            mean = tape.scale(tape.add(*blocks), 1.0 / len(blocks))
            out.append(tape.activation(mean, nonlinearity, slope))
    return out


def multi_head_combine(
    head_outputs: Sequence[CochainBundle],
    mode: str = "concat",
    nonlinearity: str = "identity",
) -> CochainBundle:
    if not head_outputs:
        raise ShapeError("at least one head is required")
    first = head_outputs[0]
    for bundle in head_outputs[1:]:
        if bundle.sizes != first.sizes or bundle.width != first.width:
            raise ShapeError("head outputs have different shapes")
    tape = Tape()
    heads = [{k: tape.const(block) for k, block in enumerate(b.blocks)} for b in head_outputs]
    width = first.width * len(head_outputs) if mode == "concat" else first.width
    nodes = combine_head_nodes(tape, heads, mode, nonlinearity, first.sizes, width)
    return CochainBundle(tuple(n.value for n in nodes))
