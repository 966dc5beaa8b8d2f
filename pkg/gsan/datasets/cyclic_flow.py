"""Clockwise vs counter-clockwise circulation around an annulus.

Test samples are shown under random edge orientations: each carries a sign
vector that the operators and the input are conjugated with.
"""
from __future__ import annotations

import logging

import numpy as np

from ..complex import SimplicialComplex, build_complex
from ..filters import CochainBundle
from .common import TaskDataset, identity_orientation, random_orientation, split_indices
from .synthetic_flow import walk_flow

_log = logging.getLogger(__name__)

CLOCKWISE, COUNTER_CLOCKWISE = 0, 1


def annulus_complex(n_rings: int, ring_size: int) -> SimplicialComplex:
    """``n_rings`` bands of triangles between ``n_rings + 1`` concentric circles of ``ring_size`` vertices."""
    m = ring_size
    triangles = []
    for r in range(n_rings):
        for i in range(m):
            a, b = r * m + i, r * m + (i + 1) % m
            c, d = (r + 1) * m + i, (r + 1) * m + (i + 1) % m
            triangles.append((a, b, c))
            triangles.append((b, d, c))
    return build_complex(triangles, 2)


def loop_flow(X: SimplicialComplex, circle: int, ring_size: int, direction: int) -> np.ndarray:
    """Unit circulation along one circle; counter-clockwise follows increasing angle."""
    walk = [circle * ring_size + i for i in range(ring_size)] + [circle * ring_size]
    flow = walk_flow(X, walk)
    return flow if direction == COUNTER_CLOCKWISE else -flow


def generate_cyclic_flow(
    n_rings: int = 2,
    n_traj: int = 400,
    seed: int = 0,
    ring_size: int = 12,
    noise: float = 0.2,
) -> TaskDataset:
    rng = np.random.default_rng(seed)
    X = annulus_complex(n_rings, ring_size)
    n_edges = X.n_simplices(1)

    labels = rng.integers(2, size=n_traj).astype(np.int64)
    circles = rng.integers(n_rings + 1, size=n_traj)
    flows = [
        loop_flow(X, int(c), ring_size, int(y)) + noise * rng.standard_normal(n_edges)
        for c, y in zip(circles, labels)
    ]
    split = split_indices(n_traj, rng)

    test = set(split["test"].tolist())
    inputs, orientations = [], []
    for i, flow in enumerate(flows):
        signs = random_orientation(X, rng) if i in test else identity_orientation(X)
        inputs.append(CochainBundle((np.zeros(X.n_simplices(0)), signs[1] * flow, np.zeros(X.n_simplices(2)))))
        orientations.append(signs)

    _log.info("cyclic flow generated sizes=%s samples=%d reoriented=%d seed=%d", list(X.sizes), n_traj, len(test), seed)
    return TaskDataset(
        task="cyclic_flow",
        complex=X,
        inputs=inputs,
        labels=labels,
        split=split,
        seed=seed,
        params={"n_rings": n_rings, "ring_size": ring_size, "n_traj": n_traj, "noise": noise},
        orientations=orientations,
        meta={"circles": circles.tolist()},
    )
