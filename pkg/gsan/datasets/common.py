from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..complex import SimplicialComplex
from ..errors import ShapeError
from ..filters import CochainBundle

SPLITS = ("train", "val", "test")


@dataclass(frozen=True, eq=False)
class TaskDataset:
    """A generated task.

    ``labels`` holds one class per sample for the flow tasks, one target per
    simplex of the task order for imputation and one class per candidate for
    simplex prediction; ``split`` indexes into whichever of those applies.
    ``orientations`` carries per-sample sign vectors (one array per order)
    for samples whose edges were reoriented.
    """

    task: str
    complex: SimplicialComplex
    inputs: list[CochainBundle]
    labels: np.ndarray
    split: dict[str, np.ndarray]
    seed: int
    params: dict = field(default_factory=dict)
    masks: dict[str, np.ndarray] | None = None
    orientations: list[tuple[np.ndarray, ...] | None] | None = None
    candidates: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for bundle in self.inputs:
            if bundle.sizes != self.complex.sizes:
                raise ShapeError(f"input sizes {bundle.sizes} do not match complex sizes {self.complex.sizes}")
        seen: set[int] = set()
        for name in SPLITS:
            idx = set(np.asarray(self.split.get(name, []), dtype=np.int64).tolist())
            if idx & seen:
                raise ShapeError(f"split {name} overlaps another split")
            seen |= idx

    @property
    def n_samples(self) -> int:
        return len(self.inputs)

    def orientation_of(self, i: int) -> tuple[np.ndarray, ...] | None:
        if self.orientations is None:
            return None
        return self.orientations[i]

    def summary(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "sizes": list(self.complex.sizes),
            "samples": self.n_samples,
            "split": {name: int(len(self.split.get(name, []))) for name in SPLITS},
        }


def split_indices(n: int, rng: np.random.Generator, fractions: Sequence[float] = (0.8, 0.1, 0.1)) -> dict[str, np.ndarray]:
    """Disjoint covering train/val/test index arrays from a seeded shuffle."""
    order = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return {
        "train": np.sort(order[:n_train]),
        "val": np.sort(order[n_train:n_train + n_val]),
        "test": np.sort(order[n_train + n_val:]),
    }


def identity_orientation(X: SimplicialComplex) -> tuple[np.ndarray, ...]:
    return tuple(np.ones(n) for n in X.sizes)


def random_orientation(X: SimplicialComplex, rng: np.random.Generator, orders: Sequence[int] = (1,)) -> tuple[np.ndarray, ...]:
    """Random +-1 signs on the listed orders, +1 elsewhere."""
    return tuple(
        rng.choice(np.array([-1.0, 1.0]), size=n) if k in orders else np.ones(n)
        for k, n in enumerate(X.sizes)
    )
