from __future__ import annotations

from itertools import combinations
from typing import Iterable

import networkx as nx
import numpy as np

from ..complex import SimplicialComplex, build_complex
from ..errors import DegenerateGeometry, ShapeError
from ..filters import CochainBundle


def clique_lift(graph_edges: Iterable[tuple[int, int]], K: int, vertices: Iterable[int] = ()) -> SimplicialComplex:
    """Fill every (j+1)-clique of the graph as a j-simplex, j <= K."""
    G = nx.Graph()
    G.add_nodes_from(vertices)
    G.add_edges_from((int(u), int(v)) for u, v in graph_edges if u != v)
    tops = []
    for clique in nx.enumerate_all_cliques(G):
        if len(clique) > K + 1:
            break
        tops.append(tuple(sorted(clique)))
    return build_complex(tops, K)


def erdos_renyi_edges(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """G(n, p) edge list drawn from a numpy generator (one uniform per vertex pair, in lexicographic order)."""
    pairs = list(combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return [pair for pair, kept in zip(pairs, keep) if kept]


def lift_node_features(X: SimplicialComplex, x0: np.ndarray) -> CochainBundle:
    """Bundle from node features: each k-simplex averages its (k-1)-faces."""
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim == 1:
        x0 = x0.reshape(-1, 1)
    if x0.shape[0] != X.n_simplices(0):
        raise ShapeError(f"{x0.shape[0]} node rows for {X.n_simplices(0)} vertices")
    blocks = [x0]
    for k in range(1, X.max_order + 1):
        if X.n_simplices(k) == 0:
            blocks.append(np.zeros((0, x0.shape[1])))
            continue
        incidence = abs(X.boundary(k).matrix).T.tocsr()
        blocks.append(np.asarray(incidence @ blocks[-1]) / (k + 1))
    return CochainBundle(tuple(blocks))


def random_clique_complex(
    rng: np.random.Generator,
    n_vertices: tuple[int, int] = (4, 8),
    edge_prob: float = 0.6,
    max_order: int = 2,
    max_total: int = 40,
    min_top: int = 0,
    attempts: int = 200,
) -> SimplicialComplex:
    """Small random clique complex for property checks.

    Redraws until the complex has at least one edge, at most ``max_total``
    simplices and at least ``min_top`` simplices of ``max_order``.
    """
    lo, hi = n_vertices
    for _ in range(attempts):
        n = int(rng.integers(lo, hi))
        X = clique_lift(erdos_renyi_edges(n, edge_prob, rng), max_order, vertices=range(n))
        if X.n_simplices(1) > 0 and X.total_size <= max_total and X.n_simplices(max_order) >= min_top:
            return X
    raise DegenerateGeometry(f"no random complex within {max_total} simplices after {attempts} draws")
