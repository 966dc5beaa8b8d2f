"""Prediction heads on top of the last layer's bundle.

* ``simplex``: an affine map of the target order's features (``readout.W``, ``readout.b``);
* ``complex``: mean pooling per order, concatenation, then a two-layer MLP;
* ``candidate``: the k+1 face features of each candidate simplex, concatenated
  in sorted-face order, then a two-layer MLP to two logits.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..autodiff import Node, Tape
from ..complex import SimplicialComplex
from ..config import ReadoutConfig
from ..errors import ShapeError
from ..filters import CochainBundle
from .params import _glorot


def candidate_faces(X: SimplicialComplex, candidates: Sequence[Sequence[int]]) -> np.ndarray:
    """Face ids (sorted-face order) of each candidate simplex; MissingFace if one is absent."""
    rows = [X.faces_of(tuple(c)) for c in candidates]
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def readout_input_width(cfg: ReadoutConfig, width: int, n_orders: int) -> int:
    if cfg.kind == "simplex":
        return width
    if cfg.kind == "complex":
        return width * n_orders
    return width * (cfg.target_order + 1)


def readout_output_width(cfg: ReadoutConfig) -> int:
    return 2 if cfg.kind == "candidate" else cfg.n_classes


def init_readout_params(cfg: ReadoutConfig, width: int, n_orders: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    fan_in = readout_input_width(cfg, width, n_orders)
    fan_out = readout_output_width(cfg)
    if cfg.kind == "simplex":
        return {
            "readout.W": _glorot(rng, fan_in, fan_out, (fan_in, fan_out)),
            "readout.b": np.zeros(fan_out),
        }
    return {
        "readout.W1": _glorot(rng, fan_in, cfg.hidden, (fan_in, cfg.hidden)),
        "readout.b1": np.zeros(cfg.hidden),
        "readout.W2": _glorot(rng, cfg.hidden, fan_out, (cfg.hidden, fan_out)),
        "readout.b2": np.zeros(fan_out),
    }


def _mlp(tape: Tape, P: Mapping[str, Node], x: Node) -> Node:
    hidden = tape.activation(tape.add(tape.matmul(x, P["readout.W1"]), P["readout.b1"]), "relu")
    return tape.add(tape.matmul(hidden, P["readout.W2"]), P["readout.b2"])


def _pool(tape: Tape, block: Node) -> Node:
    if block.shape[0] == 0:
        return tape.const(np.zeros((1, block.shape[1])))
    return tape.reduce_mean(block, axis=0)


def readout_nodes(
    tape: Tape,
    cfg: ReadoutConfig,
    P: Mapping[str, Node],
    blocks: Sequence[Node],
    faces: np.ndarray | None = None,
    orientation: Sequence[np.ndarray] | None = None,
) -> Node:
    """Logits (or regression outputs) of the configured head.

    ``orientation`` holds per-order sign vectors; with ``unflip_orientation``
    the blocks are multiplied by them before pooling so that a relabelled
    orientation reads the same as the reference one.
    """
    if cfg.kind == "simplex":
        if not 0 <= cfg.target_order < len(blocks):
            raise ShapeError(f"target order {cfg.target_order} outside the bundle")
        return tape.add(tape.matmul(blocks[cfg.target_order], P["readout.W"]), P["readout.b"])

    if cfg.kind == "complex":
        pooled = []
        for k, block in enumerate(blocks):
            if cfg.unflip_orientation and orientation is not None:
                block = tape.mul_const(block, np.asarray(orientation[k], dtype=np.float64).reshape(-1, 1))
            pooled.append(_pool(tape, block))
        return _mlp(tape, P, tape.concat(pooled, axis=1))

    if faces is None:
        raise ShapeError("candidate readout needs face ids")
    faces = np.asarray(faces, dtype=np.int64)
    face_order = cfg.target_order - 1
    if faces.ndim != 2 or faces.shape[1] != cfg.target_order + 1:
        raise ShapeError(f"face ids of shape {faces.shape} for order-{cfg.target_order} candidates")
    source = blocks[face_order]
    gathered = [tape.gather(source, faces[:, j]) for j in range(faces.shape[1])]
    return _mlp(tape, P, tape.concat(gathered, axis=1))


def candidate_scores(logits: np.ndarray) -> np.ndarray:
    """Positive-class score l1 - l0 per candidate."""
    logits = np.asarray(logits, dtype=np.float64)
    return logits[:, 1] - logits[:, 0]


def readout(
    bundle: CochainBundle,
    params: Mapping[str, np.ndarray],
    cfg: ReadoutConfig,
    X: SimplicialComplex | None = None,
    candidates: Sequence[Sequence[int]] | None = None,
    orientation: Sequence[np.ndarray] | None = None,
) -> np.ndarray:
    faces = None
    if cfg.kind == "candidate":
        if X is None or candidates is None:
            raise ShapeError("candidate readout needs the complex and the candidate simplices")
        faces = candidate_faces(X, candidates)
    tape = Tape()
    P = {name: tape.param(name, value) for name, value in params.items()}
    blocks = [tape.const(b) for b in bundle.blocks]
    return readout_nodes(tape, cfg, P, blocks, faces, orientation).value
