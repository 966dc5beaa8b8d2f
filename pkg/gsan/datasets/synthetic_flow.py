"""Trajectory classification on a Delaunay complex with two holes.

Points are sampled in the unit square and triangulated. Sample points inside
either disc are dropped before triangulating, and every triangle whose
circumcenter lies inside a disc is removed afterwards; edges survive only as
faces of kept triangles. Each trajectory walks from the vertex nearest (0, 1)
to the vertex nearest (1, 0) through a waypoint next to one of the holes; the
label is that hole.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.spatial import Delaunay, QhullError

from ..complex import SimplicialComplex, build_complex
from ..errors import DegenerateGeometry
from ..filters import CochainBundle
from ..logger import progress
from ..operators import betti_number
from .common import TaskDataset, split_indices

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hole:
    center: tuple[float, float]
    radius: float

    def contains(self, p: np.ndarray) -> bool:
        return bool(np.linalg.norm(np.asarray(p) - np.asarray(self.center)) < self.radius)


HOLES = (Hole((0.25, 0.25), 0.1), Hole((0.75, 0.75), 0.1))
START = (0.0, 1.0)
END = (1.0, 0.0)
WAYPOINT_BAND = 2.0
MAX_ATTEMPTS = 5
CARVE_ATTEMPTS = 10


def circumcenter(tri: np.ndarray) -> np.ndarray:
    """Center of the circle through the three corners of a 2D triangle."""
    a, b, c = (np.asarray(p, dtype=float) for p in tri)
    ab, ac = b - a, c - a
    d = 2.0 * (ab[0] * ac[1] - ab[1] * ac[0])
    if abs(d) < 1e-300:
        # collinear corners; the circle is at infinity
        return np.full(2, np.inf)
    ab2, ac2 = ab @ ab, ac @ ac
    return a + np.array([ac[1] * ab2 - ab[1] * ac2, ab[0] * ac2 - ac[0] * ab2]) / d


def carved(tri: np.ndarray) -> bool:
    center = circumcenter(tri)
    return any(hole.contains(center) for hole in HOLES)


def _triangulate(points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    for attempt in range(MAX_ATTEMPTS):
        try:
            return Delaunay(points).simplices
        except QhullError:
            _log.warning("triangulation failed attempt=%d; jittering points", attempt + 1)
            points = points + 1e-9 * rng.standard_normal(points.shape)
    raise DegenerateGeometry(f"Delaunay triangulation failed after {MAX_ATTEMPTS} attempts")


def holed_complex(n_points: int, rng: np.random.Generator) -> tuple[SimplicialComplex, np.ndarray]:
    """Triangulated unit square with the two discs carved out; returns the complex and vertex coordinates."""
    for attempt in range(CARVE_ATTEMPTS):
        points = rng.random((n_points, 2))
        points = points[np.array([not any(hole.contains(p) for hole in HOLES) for p in points], dtype=bool)]
        triangles = _triangulate(points, rng)
        kept = [tuple(int(v) for v in tri) for tri in triangles if not carved(points[tri])]
        X = build_complex(kept, 2)
        coords = points[np.asarray(X.vertex_ids)]
        holes = betti_number(X, 1)
        if holes == len(HOLES):
            return X, coords
        _log.info("hole carving produced betti_1=%d attempt=%d; resampling", holes, attempt + 1)
    raise DegenerateGeometry(f"could not carve {len(HOLES)} holes in {CARVE_ATTEMPTS} attempts")


def _nearest(coords: np.ndarray, target: tuple[float, float]) -> int:
    return int(np.argmin(np.linalg.norm(coords - np.asarray(target), axis=1)))


def walk_flow(X: SimplicialComplex, walk: list[int]) -> np.ndarray:
    """Edge flow of a vertex walk: +1 along the reference orientation, -1 against it."""
    x = np.zeros(X.n_simplices(1))
    index = X.index[1]
    for u, v in zip(walk[:-1], walk[1:]):
        x[index[(min(u, v), max(u, v))]] += 1.0 if u < v else -1.0
    return x


def generate_synthetic_flow(n_points: int = 200, n_holes: int = 2, n_traj: int = 1000, seed: int = 0) -> TaskDataset:
    if n_holes != len(HOLES):
        raise DegenerateGeometry(f"the carving places exactly {len(HOLES)} holes, asked for {n_holes}")
    rng = np.random.default_rng(seed)
    X, coords = holed_complex(n_points, rng)

    G = nx.Graph()
    for u, v in X.simplices[1]:
        G.add_edge(u, v, weight=float(np.linalg.norm(coords[u] - coords[v])))
    start, end = _nearest(coords, START), _nearest(coords, END)
    from_start = nx.single_source_dijkstra_path(G, start)
    from_end = nx.single_source_dijkstra_path(G, end)

    waypoints = []
    for hole in HOLES:
        dist = np.linalg.norm(coords - np.asarray(hole.center), axis=1)
        near = [v for v in np.flatnonzero(dist < WAYPOINT_BAND * hole.radius).tolist() if v in from_start and v in from_end]
        if not near:
            raise DegenerateGeometry(f"no reachable vertex next to the hole at {hole.center}")
        waypoints.append(near)

    inputs, labels = [], np.zeros(n_traj, dtype=np.int64)
    for i in progress(range(n_traj), desc="trajectories", total=n_traj):
        label = int(rng.integers(len(HOLES)))
        w = waypoints[label][int(rng.integers(len(waypoints[label])))]
        walk = from_start[w] + list(reversed(from_end[w]))[1:]
        flow = walk_flow(X, walk)
        inputs.append(CochainBundle((np.zeros(X.n_simplices(0)), flow, np.zeros(X.n_simplices(2)))))
        labels[i] = label

    _log.info("synthetic flow generated sizes=%s trajectories=%d seed=%d", list(X.sizes), n_traj, seed)
    return TaskDataset(
        task="synthetic_flow",
        complex=X,
        inputs=inputs,
        labels=labels,
        split=split_indices(n_traj, rng),
        seed=seed,
        params={"n_points": n_points, "n_holes": n_holes, "n_traj": n_traj},
        meta={
            "coords": coords.tolist(),
            "start": start,
            "end": end,
            "holes": [{"center": list(h.center), "radius": h.radius} for h in HOLES],
        },
    )
