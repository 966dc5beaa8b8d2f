"""Closed vs open k-simplex classification.

Vertices carry noisy cluster features. Among all (k+1)-cliques of a random
graph, those whose vertices agree most are filled; the model sees the complex
up to order k-1 with node features lifted to every order and must tell filled
candidates from open ones through their faces.
"""
from __future__ import annotations

import logging
from itertools import combinations

import networkx as nx
import numpy as np
from sklearn.model_selection import train_test_split

from ..complex import SimplicialComplex
from ..errors import InsufficientCandidates, OrderOutOfRange
from .common import TaskDataset
from .lifting import clique_lift, erdos_renyi_edges, lift_node_features

_log = logging.getLogger(__name__)

MIN_PER_CLASS = 10
N_CLUSTERS = 4
FEATURE_NOISE = 0.5


def enumerate_candidates(X: SimplicialComplex, k: int) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Closed k-simplices of ``X`` and open ones (all k-faces present, simplex absent)."""
    if not 1 <= k <= X.max_order + 1:
        raise OrderOutOfRange(f"candidate order {k} outside [1, {X.max_order + 1}]")
    G = nx.Graph()
    G.add_nodes_from(range(X.n_simplices(0)))
    if X.max_order >= 1:
        G.add_edges_from(X.simplices[1])
    closed = set(X.simplices[k]) if k <= X.max_order else set()
    faces = X.index[k - 1]
    positives, negatives = [], []
    for clique in nx.enumerate_all_cliques(G):
        if len(clique) < k + 1:
            continue
        if len(clique) > k + 1:
            break
        simplex = tuple(sorted(clique))
        if simplex in closed:
            positives.append(simplex)
        elif all(f in faces for f in combinations(simplex, k)):
            negatives.append(simplex)
    return sorted(positives), sorted(negatives)


def _vertex_features(n: int, dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    clusters = rng.integers(N_CLUSTERS, size=n)
    centers = np.eye(N_CLUSTERS, dim)
    return clusters, centers[clusters] + FEATURE_NOISE * rng.standard_normal((n, dim))


def generate_simplex_prediction_task(
    n_vertices: int = 60,
    edge_prob: float = 0.2,
    order: int = 2,
    seed: int = 0,
    fill_fraction: float = 0.5,
    signal_boost: float = 1.0,
) -> TaskDataset:
    if order not in (2, 3):
        raise OrderOutOfRange(f"simplex prediction order must be 2 or 3, got {order}")
    rng = np.random.default_rng(seed)
    edges = erdos_renyi_edges(n_vertices, edge_prob, rng)
    full = clique_lift(edges, order, vertices=range(n_vertices))
    clusters, features = _vertex_features(n_vertices, N_CLUSTERS, rng)

    cliques = list(full.simplices[order])
    agreement = np.asarray([
        float(np.bincount(clusters[list(s)], minlength=N_CLUSTERS).max()) for s in cliques
    ])
    score = signal_boost * agreement + rng.gumbel(size=len(cliques))
    n_filled = int(round(fill_fraction * len(cliques)))
    filled = set(np.argsort(-score, kind="stable")[:n_filled].tolist())
    positives = [s for i, s in enumerate(cliques) if i in filled]
    negatives = [s for i, s in enumerate(cliques) if i not in filled]

    per_class = min(len(positives), len(negatives))
    if per_class < MIN_PER_CLASS:
        raise InsufficientCandidates(
            f"{len(positives)} closed and {len(negatives)} open order-{order} candidates; need {MIN_PER_CLASS} each"
        )
    pos_idx = np.sort(rng.choice(len(positives), size=per_class, replace=False))
    neg_idx = np.sort(rng.choice(len(negatives), size=per_class, replace=False))
    candidates = np.asarray([positives[i] for i in pos_idx] + [negatives[i] for i in neg_idx], dtype=np.int64)
    labels = np.concatenate([np.ones(per_class), np.zeros(per_class)]).astype(np.int64)

    idx = np.arange(labels.size)
    train, rest = train_test_split(idx, test_size=0.2, stratify=labels, random_state=seed)
    val, test = train_test_split(rest, test_size=0.5, stratify=labels[rest], random_state=seed)

    X = clique_lift(edges, order - 1, vertices=range(n_vertices))
    bundle = lift_node_features(X, features)

    _log.info(
        "simplex prediction generated sizes=%s order=%d candidates=%d seed=%d", list(X.sizes), order, labels.size, seed,
    )
    return TaskDataset(
        task="simplex_prediction",
        complex=X,
        inputs=[bundle],
        labels=labels,
        split={"train": np.sort(train), "val": np.sort(val), "test": np.sort(test)},
        seed=seed,
        params={
            "n_vertices": n_vertices, "edge_prob": edge_prob, "order": order,
            "fill_fraction": fill_fraction, "signal_boost": signal_boost,
        },
        candidates=candidates,
        meta={"order": order, "closed_total": len(positives), "open_total": len(negatives)},
    )
