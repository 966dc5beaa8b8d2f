from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import accuracy_score, roc_auc_score
from sklearn.neural_network import MLPClassifier

from .autodiff import Tape
from .datasets import TaskDataset
from .datasets.mdi import mean_imputation, within_tolerance
from .errors import EmptyMask, ShapeError
from .models import SimplicialModel
from .nn.readout import candidate_faces, candidate_scores
from .operators import ComplexOperators, complex_operators
from .samples import Example, task_examples

_log = logging.getLogger(__name__)

HISTOGRAM_BINS = 20


def classification_accuracy(labels: np.ndarray, logits: np.ndarray) -> float:
    return float(accuracy_score(np.asarray(labels).ravel(), np.argmax(logits, axis=1)))


def ranking_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """ROC AUC; 0.5 when only one class is present."""
    labels = np.asarray(labels).ravel()
    if np.unique(labels).size < 2:
        return 0.5
    return float(roc_auc_score(labels, np.asarray(scores).ravel()))


def _mdi_scores(dataset: TaskDataset, split: str, prediction: np.ndarray) -> dict[str, float]:
    idx = np.asarray(dataset.split[split], dtype=np.int64)
    if idx.size == 0:
        raise EmptyMask(f"imputation split {split!r} selects no entries")
    truth = dataset.labels
    baseline = mean_imputation(dataset)
    hit = within_tolerance(prediction, truth)
    base_hit = within_tolerance(baseline, truth)
    return {
        "accuracy": float(hit.mean()),
        "split_accuracy": float(hit[idx].mean()),
        "baseline_accuracy": float(base_hit.mean()),
        "baseline_split_accuracy": float(base_hit[idx].mean()),
    }


def score_outputs(
    dataset: TaskDataset,
    split: str,
    examples: Sequence[Example],
    outputs: Sequence[np.ndarray],
) -> dict[str, float]:
    """Task metrics for the model outputs of ``task_examples(dataset, split)``."""
    if len(examples) != len(outputs):
        raise ShapeError(f"{len(outputs)} outputs for {len(examples)} examples")
    if dataset.task in ("synthetic_flow", "cyclic_flow"):
        if not examples:
            return {"accuracy": 0.0}
        logits = np.concatenate([np.asarray(o).reshape(1, -1) for o in outputs], axis=0)
        labels = np.concatenate([ex.target for ex in examples])
        return {"accuracy": classification_accuracy(labels, logits)}
    if dataset.task == "mdi":
        scale = float(dataset.meta.get("target_scale", 1.0))
        return _mdi_scores(dataset, split, np.asarray(outputs[0])[:, 0] * scale)
    if dataset.task == "simplex_prediction":
        if not examples:
            return {"auc": 0.5, "accuracy": 0.0}
        labels, logits = examples[0].target, np.asarray(outputs[0])
        return {"auc": ranking_auc(labels, candidate_scores(logits)), "accuracy": classification_accuracy(labels, logits)}
    raise ShapeError(f"unknown task {dataset.task!r}")


def predict_examples(model: SimplicialModel, examples: Sequence[Example]) -> list[np.ndarray]:
    return [model.predict(ex.ops, ex.bundle, ex.faces, ex.orientation) for ex in examples]


def evaluate(
    model: SimplicialModel,
    dataset: TaskDataset,
    split: str = "test",
    ops: ComplexOperators | None = None,
) -> dict[str, float]:
    examples = task_examples(dataset, split, ops)
    metrics = score_outputs(dataset, split, examples, predict_examples(model, examples))
    if dataset.task == "simplex_prediction" and split == "test":
        metrics["baseline_auc"] = raw_feature_baseline_auc(dataset)
    _log.info("evaluated task=%s split=%s metrics=%s", dataset.task, split, metrics)
    return metrics


def _candidate_raw_features(dataset: TaskDataset, idx: np.ndarray) -> np.ndarray:
    order = int(dataset.meta.get("order", dataset.candidates.shape[1] - 1))
    faces = candidate_faces(dataset.complex, dataset.candidates[idx])
    block = dataset.inputs[0][order - 1]
    return np.concatenate([block[faces[:, j]] for j in range(faces.shape[1])], axis=1)


def raw_feature_baseline_auc(dataset: TaskDataset, hidden: int = 32) -> float:
    """AUC of an MLP on the concatenated raw face features, trained on the train split."""
    if dataset.task != "simplex_prediction":
        raise ShapeError("the raw-feature baseline applies to simplex prediction")
    train, test = dataset.split["train"], dataset.split["test"]
    clf = MLPClassifier(hidden_layer_sizes=(hidden,), max_iter=500, random_state=dataset.seed)
    clf.fit(_candidate_raw_features(dataset, train), dataset.labels[train])
    scores = clf.predict_proba(_candidate_raw_features(dataset, test))[:, 1]
    return ranking_auc(dataset.labels[test], scores)


def attention_histograms(
    model: SimplicialModel,
    dataset: TaskDataset,
    split: str = "test",
    bins: int = HISTOGRAM_BINS,
) -> pd.DataFrame:
    """Histogram of the attention coefficients of every attentional Laplacian on the first example of ``split``."""
    columns = ["layer", "head", "order", "side", "kind", "bin_left", "bin_right", "count"]
    examples = task_examples(dataset, split, complex_operators(dataset.complex))
    if not examples:
        return pd.DataFrame(columns=columns)
    ex = examples[0]
    record: dict = {}
    model.forward(Tape(), ex.ops, ex.bundle, ex.faces, ex.orientation, record=record)
    rows = []
    for (layer, head, k, side, c), lap in sorted(record.items()):
        values = np.abs(lap.values)
        if values.size == 0:
            continue
        counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
        for i, count in enumerate(counts):
            rows.append([layer, head, k, side, c, float(edges[i]), float(edges[i + 1]), int(count)])
    return pd.DataFrame(rows, columns=columns)
