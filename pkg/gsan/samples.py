"""Turning a TaskDataset split into forward-pass examples."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Node, Tape, losses
from .datasets import TaskDataset
from .errors import ShapeError
from .filters import CochainBundle
from .nn.readout import candidate_faces
from .operators import ComplexOperators, complex_operators

PRIMARY_METRIC = {
    "synthetic_flow": "accuracy",
    "cyclic_flow": "accuracy",
    "mdi": "split_accuracy",
    "simplex_prediction": "auc",
}


@dataclass(frozen=True, eq=False)
class Example:
    """One forward pass worth of inputs and its target."""

    ops: ComplexOperators
    bundle: CochainBundle
    target: np.ndarray
    loss: str
    faces: np.ndarray | None = None
    orientation: tuple[np.ndarray, ...] | None = None
    mask: np.ndarray | None = None


def _needs_reorienting(signs: tuple[np.ndarray, ...] | None) -> bool:
    return signs is not None and any(np.any(s < 0) for s in signs)


def task_examples(dataset: TaskDataset, split: str, ops: ComplexOperators | None = None) -> list[Example]:
    """Examples for one split; flow tasks give one per sample, the others one per split."""
    ops = ops or complex_operators(dataset.complex)
    idx = np.asarray(dataset.split[split], dtype=np.int64)
    if dataset.task in ("synthetic_flow", "cyclic_flow"):
        out = []
        for i in idx.tolist():
            signs = dataset.orientation_of(i)
            sample_ops = ops.reoriented(signs) if _needs_reorienting(signs) else ops
            out.append(Example(sample_ops, dataset.inputs[i], dataset.labels[i:i + 1], "cross_entropy", orientation=signs))
        return out
    if dataset.task == "mdi":
        if idx.size == 0:
            return []
        scale = float(dataset.meta.get("target_scale", 1.0))
        mask = np.zeros(dataset.labels.size, dtype=bool)
        mask[idx] = True
        target = (dataset.labels / scale).reshape(-1, 1)
        return [Example(ops, dataset.inputs[0], target, "masked_mse", mask=mask.reshape(-1, 1))]
    if dataset.task == "simplex_prediction":
        if idx.size == 0:
            return []
        faces = candidate_faces(dataset.complex, dataset.candidates[idx])
        return [Example(ops, dataset.inputs[0], dataset.labels[idx], "cross_entropy", faces=faces)]
    raise ShapeError(f"unknown task {dataset.task!r}")


def example_loss(tape: Tape, output: Node, example: Example) -> Node:
    return losses(output, example.target, example.loss, mask=example.mask, tape=tape)
