from __future__ import annotations

import numpy as np

from ..errors import EmptyMask, ShapeError
from .tape import Node, Tape

LOSS_KINDS = ("cross_entropy", "mse", "masked_mse")


def cross_entropy(tape: Tape, logits: Node, labels: np.ndarray) -> Node:
    """Mean negative log-likelihood of integer ``labels`` under row-wise softmax of ``logits``."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if logits.value.ndim != 2 or logits.value.shape[0] != labels.size:
        raise ShapeError(f"logits {logits.shape} do not match {labels.size} labels")
    logp = tape.log_softmax(logits)
    rows = np.arange(labels.size)
    n = max(labels.size, 1)

    def forward(lp):
        return np.asarray(-lp[rows, labels].sum() / n)

    def vjp(g, lp, out):
        gl = np.zeros_like(lp)
        gl[rows, labels] = -float(g) / n
        return (gl,)

    return tape.custom("cross_entropy", (logp,), forward, vjp)


def mse(tape: Tape, pred: Node, target: np.ndarray) -> Node:
    target = np.asarray(target, dtype=np.float64).reshape(pred.value.shape)
    n = max(target.size, 1)
    return tape.custom(
        "mse", (pred,),
        lambda p: np.asarray(((p - target) ** 2).sum() / n),
        lambda g, p, out: (2.0 * float(g) * (p - target) / n,),
    )


def masked_mse(tape: Tape, pred: Node, target: np.ndarray, mask: np.ndarray) -> Node:
    """Mean squared error over the entries where ``mask`` is true."""
    target = np.asarray(target, dtype=np.float64).reshape(pred.value.shape)
    mask = np.asarray(mask, dtype=bool).reshape(pred.value.shape)
    n = int(mask.sum())
    if n == 0:
        raise EmptyMask("mask selects no entries")
    w = mask.astype(np.float64)
    return tape.custom(
        "masked_mse", (pred,),
        lambda p: np.asarray((w * (p - target) ** 2).sum() / n),
        lambda g, p, out: (2.0 * float(g) * w * (p - target) / n,),
    )


def losses(pred, target, kind: str, mask=None, tape: Tape | None = None):
    """Loss of ``kind``; records on ``tape`` when ``pred`` is a node, else returns a float."""
    if kind not in LOSS_KINDS:
        raise ShapeError(f"unknown loss {kind!r}")
    standalone = not isinstance(pred, Node)
    if standalone:
        tape = Tape()
        pred = tape.const(np.asarray(pred, dtype=np.float64))
    elif tape is None:
        raise ShapeError("a tape is required when pred is a node")
    if kind == "cross_entropy":
        if pred.value.ndim == 1:
            pred = tape.reshape(pred, (1, -1))
        node = cross_entropy(tape, pred, target)
    elif kind == "mse":
        node = mse(tape, pred, target)
    else:
        if mask is None:
            raise EmptyMask("masked_mse needs a mask")
        node = masked_mse(tape, pred, target, mask)
    return float(node.value) if standalone else node
