"""Missing-data imputation on a clique-lifted random complex.

Every vertex draws a log-normal "impact"; the signal on a k-simplex is the
rounded sum of its vertices' impacts, standing in for the citation count of a
collaboration. A fixed fraction of the k-signal is hidden; the input fills
hidden entries with the observed mean and scales everything by it.
"""
from __future__ import annotations

import logging

import numpy as np

from ..errors import OrderOutOfRange
from ..filters import CochainBundle
from .common import TaskDataset
from .lifting import clique_lift, erdos_renyi_edges

_log = logging.getLogger(__name__)

TOLERANCE = 0.05


def simplex_signal(simplices, impact: np.ndarray) -> np.ndarray:
    return np.asarray([max(1.0, float(np.round(impact[list(s)].sum()))) for s in simplices])


def generate_mdi_task(
    n_vertices: int = 40,
    edge_prob: float = 0.2,
    max_order: int = 2,
    order: int = 1,
    miss_fraction: float = 0.1,
    seed: int = 0,
    log_mean: float = 3.0,
    log_sigma: float = 0.4,
) -> TaskDataset:
    if not 0 <= order <= max_order:
        raise OrderOutOfRange(f"imputation order {order} exceeds lifted order {max_order}")
    rng = np.random.default_rng(seed)
    X = clique_lift(erdos_renyi_edges(n_vertices, edge_prob, rng), max_order, vertices=range(n_vertices))
    impact = rng.lognormal(mean=log_mean, sigma=log_sigma, size=X.n_simplices(0))
    truth = simplex_signal(X.simplices[order], impact)

    n = truth.size
    n_missing = int(round(miss_fraction * n))
    missing = np.zeros(n, dtype=bool)
    missing[rng.choice(n, size=n_missing, replace=False)] = True
    observed = ~missing

    scale = float(truth[observed].mean()) if observed.any() else 1.0
    filled = np.where(observed, truth, scale) / scale
    blocks = [np.zeros(X.n_simplices(k)) for k in range(X.max_order + 1)]
    blocks[order] = filled

    _log.info(
        "mdi generated sizes=%s order=%d missing=%d/%d seed=%d", list(X.sizes), order, n_missing, n, seed,
    )
    return TaskDataset(
        task="mdi",
        complex=X,
        inputs=[CochainBundle(tuple(blocks))],
        labels=truth,
        split={
            "train": np.flatnonzero(observed),
            "val": np.zeros(0, dtype=np.int64),
            "test": np.flatnonzero(missing),
        },
        seed=seed,
        params={
            "n_vertices": n_vertices, "edge_prob": edge_prob, "max_order": max_order, "order": order,
            "miss_fraction": miss_fraction, "log_mean": log_mean, "log_sigma": log_sigma,
        },
        masks={"observed": observed, "missing": missing},
        meta={"order": order, "target_scale": scale},
    )


def within_tolerance(pred: np.ndarray, truth: np.ndarray, tol: float = TOLERANCE) -> np.ndarray:
    """Entries whose imputation lies within +-tol of the true value."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    return np.abs(pred - truth) <= tol * np.abs(truth)


def mean_imputation(dataset: TaskDataset) -> np.ndarray:
    """Observed entries kept, missing entries replaced by the observed mean."""
    observed = dataset.masks["observed"]
    mean = float(dataset.labels[observed].mean()) if observed.any() else 0.0
    return np.where(observed, dataset.labels, mean)
