from __future__ import annotations

import copy
import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .autodiff import OptimizerState, Tape, backward, optimizer_step
from .config import TrainingConfig
from .datasets import TaskDataset
from .errors import ShapeError
from .evaluation import score_outputs
from .logger import progress
from .models import SimplicialModel
from .operators import complex_operators
from .samples import PRIMARY_METRIC, example_loss, task_examples

_log = logging.getLogger(__name__)


def _mean_gradients(total: dict[str, np.ndarray] | None, n: int) -> dict[str, np.ndarray]:
    return {name: g / n for name, g in (total or {}).items()}


@dataclass
class Trainer:
    """Mini-batch training with one tape per example and early stopping on the monitored metric."""

    model: SimplicialModel
    config: TrainingConfig
    seed: int = 0
    wall_time: float = 0.0

    def _state(self) -> OptimizerState:
        c = self.config
        return OptimizerState(
            algo=c.optimizer, lr=c.lr, betas=tuple(c.betas), momentum=c.momentum, weight_decay=c.weight_decay,
        )

    def fit(self, dataset: TaskDataset) -> pd.DataFrame:
        rng = np.random.default_rng(self.seed)
        ops = complex_operators(dataset.complex)
        train = task_examples(dataset, "train", ops)
        if not train:
            raise ShapeError("training split is empty")
        val = task_examples(dataset, "val", ops)
        metric = PRIMARY_METRIC[dataset.task]
        state = self._state()

        best, best_params, waited = -np.inf, copy.deepcopy(self.model.params), 0
        history = []
        started = time.perf_counter()
        for epoch in progress(range(1, self.config.epochs + 1), desc="epochs", total=self.config.epochs):
            order = rng.permutation(len(train))
            epoch_losses, outputs = [], [None] * len(train)
            for start in range(0, len(order), self.config.batch_size):
                batch = order[start:start + self.config.batch_size].tolist()
                total: dict[str, np.ndarray] | None = None
                for i in batch:
                    ex = train[i]
                    tape = Tape()
                    out = self.model.forward(tape, ex.ops, ex.bundle, ex.faces, ex.orientation)
                    loss = example_loss(tape, out, ex)
                    grads = backward(tape, loss)
                    total = grads if total is None else {k: total[k] + grads[k] for k in total}
                    epoch_losses.append(float(loss.value))
                    outputs[i] = out.value
                self.model.params, state = optimizer_step(self.model.params, _mean_gradients(total, len(batch)), state)

            train_metric = score_outputs(dataset, "train", train, outputs)[metric]
            row = {"epoch": epoch, "loss": float(np.mean(epoch_losses)), f"train_{metric}": train_metric}
            monitored = train_metric
            if val:
                val_outputs = [self.model.predict(ex.ops, ex.bundle, ex.faces, ex.orientation) for ex in val]
                monitored = score_outputs(dataset, "val", val, val_outputs)[metric]
                row[f"val_{metric}"] = monitored
            history.append(row)
            _log.debug("task=%s epoch=%d loss=%.6f monitored=%.4f", dataset.task, epoch, row["loss"], monitored)

            if monitored > best:
                best, best_params, waited = monitored, copy.deepcopy(self.model.params), 0
            else:
                waited += 1
                if waited >= self.config.patience:
                    _log.info("early stopping task=%s epoch=%d best=%.4f", dataset.task, epoch, best)
                    break

        self.model.params = best_params
        self.wall_time = time.perf_counter() - started
        _log.info("training done task=%s epochs=%d best=%.4f seconds=%.1f", dataset.task, len(history), best, self.wall_time)
        return pd.DataFrame(history)
