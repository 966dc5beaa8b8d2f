from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import scipy.sparse as sp

from .errors import ArchiveError, EmptyOrder, InvalidSimplex, MissingFace, OrderExceeded, OrderOutOfRange
from .sparse import SparseOperator


_log = logging.getLogger(__name__)

Simplex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Oriented simplicial complex of orders ``0..max_order``.

    Simplices are strictly increasing tuples of dense vertex ids (``0..N_0-1``)
    listed lexicographically within each order; the sorted tuple is the
    reference orientation. ``vertex_ids[v]`` is the caller's original id for
    dense vertex ``v``. An order may be empty (a hollow triangle built with
    ``max_order=2`` has no 2-simplices).
    """

    max_order: int
    simplices: tuple[tuple[Simplex, ...], ...]
    vertex_ids: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.vertex_ids:
            object.__setattr__(self, "vertex_ids", tuple(s[0] for s in self.simplices[0]))

    @cached_property
    def index(self) -> tuple[dict[Simplex, int], ...]:
        return tuple({s: i for i, s in enumerate(order)} for order in self.simplices)

    def n_simplices(self, k: int) -> int:
        self._check_order(k, 0)
        return len(self.simplices[k])

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.simplices)

    @property
    def total_size(self) -> int:
        return sum(self.sizes)

    def _check_order(self, k: int, low: int) -> None:
        if not low <= k <= self.max_order:
            raise OrderOutOfRange(f"order {k} outside [{low}, {self.max_order}]")

    def boundary(self, k: int) -> SparseOperator:
        """B_k as an N_{k-1} x N_k signed incidence, allowing empty orders."""
        self._check_order(k, 1)
        return self._boundaries[k - 1]

    @cached_property
    def _boundaries(self) -> tuple[SparseOperator, ...]:
        out = []
        for k in range(1, self.max_order + 1):
            faces = self.index[k - 1]
            triplets = []
            for col, simplex in enumerate(self.simplices[k]):
                for j in range(k + 1):
                    face = simplex[:j] + simplex[j + 1:]
                    triplets.append((faces[face], col, -1.0 if j % 2 else 1.0))
            out.append(
                SparseOperator.from_triplets(len(self.simplices[k - 1]), len(self.simplices[k]), triplets, exact=True)
            )
        return tuple(out)

    def faces_of(self, simplex: Sequence[int]) -> list[int]:
        """Row ids of the codimension-one faces of ``simplex``, in sorted-face order."""
        simplex = tuple(sorted(simplex))
        k = len(simplex) - 1
        self._check_order(k - 1, 0)
        faces = [simplex[:j] + simplex[j + 1:] for j in range(k + 1)]
        missing = [f for f in faces if f not in self.index[k - 1]]
        if missing:
            raise MissingFace(f"faces {missing} of {simplex} are not in the complex")
        return [self.index[k - 1][f] for f in sorted(faces)]

    def to_json(self) -> dict:
        return {
            "max_order": self.max_order,
            "simplices": {
                str(k): [[self.vertex_ids[v] for v in s] for s in order]
                for k, order in enumerate(self.simplices)
            },
        }

    def summary(self) -> dict:
        return {"max_order": self.max_order, "sizes": list(self.sizes)}


def _validate_tuple(raw: Iterable[int]) -> Simplex:
    try:
        simplex = tuple(int(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise InvalidSimplex(f"simplex {raw!r} is not a tuple of integers") from exc
    if not simplex:
        raise InvalidSimplex("empty simplex")
    if any(v < 0 for v in simplex):
        raise InvalidSimplex(f"simplex {simplex} has a negative vertex id")
    if len(set(simplex)) != len(simplex):
        raise InvalidSimplex(f"simplex {simplex} repeats a vertex")
    return simplex


def build_complex(top_simplices: Iterable[Iterable[int]], max_order: int) -> SimplicialComplex:
    """Downward closure of ``top_simplices`` up to ``max_order``."""
    if max_order < 0:
        raise OrderOutOfRange(f"max_order must be >= 0, got {max_order}")

    closure: list[set[Simplex]] = [set() for _ in range(max_order + 1)]
    for raw in top_simplices:
        simplex = tuple(sorted(_validate_tuple(raw)))
        if len(simplex) > max_order + 1:
            raise OrderExceeded(f"simplex {simplex} has order {len(simplex) - 1} > max_order {max_order}")
        for size in range(1, len(simplex) + 1):
            closure[size - 1].update(combinations(simplex, size))

    vertex_ids = sorted(v for (v,) in closure[0])
    dense = {v: i for i, v in enumerate(vertex_ids)}
    simplices = tuple(
        tuple(sorted(tuple(dense[v] for v in s) for s in order))
        for order in closure
    )
    X = SimplicialComplex(max_order=max_order, simplices=simplices, vertex_ids=tuple(vertex_ids))
    if not boundary_identity_holds(X):
        raise InvalidSimplex(f"boundary of a boundary is not zero for sizes {list(X.sizes)}")
    return X


def incidence_matrix(X: SimplicialComplex, k: int) -> SparseOperator:
    """Signed incidence B_k; the face dropping vertex j carries (-1)^j."""
    if not 1 <= k <= X.max_order:
        raise OrderOutOfRange(f"incidence order {k} outside [1, {X.max_order}]")
    if X.n_simplices(k) == 0 or X.n_simplices(k - 1) == 0:
        raise EmptyOrder(f"order {k} has no simplices")
    return X.boundary(k)


def _support_lists(m: sp.csr_matrix, n: int) -> list[list[int]]:
    out = []
    for i in range(n):
        row = set(m.indices[m.indptr[i]:m.indptr[i + 1]].tolist())
        row.add(i)
        out.append(sorted(row))
    return out


def neighborhoods(X: SimplicialComplex, k: int) -> tuple[list[list[int]], list[list[int]]]:
    """Lower and upper neighbor lists of every k-simplex, each including the simplex itself."""
    X._check_order(k, 0)
    n = X.n_simplices(k)
    if k >= 1:
        b = X.boundary(k).matrix
        lower = _support_lists((b.T @ b).tocsr(), n)
    else:
        lower = [[i] for i in range(n)]
    if k < X.max_order:
        b = X.boundary(k + 1).matrix
        upper = _support_lists((b @ b.T).tocsr(), n)
    else:
        upper = [[i] for i in range(n)]
    return lower, upper


def complex_from_json(data: dict) -> SimplicialComplex:
    """Load the ``{"max_order", "simplices"}`` document, rejecting unsorted tuples and open closures."""
    try:
        max_order = int(data["max_order"])
        raw = data["simplices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveError(f"complex document is missing a field: {exc}") from exc

    listed: list[set[Simplex]] = [set() for _ in range(max_order + 1)]
    for key, order in raw.items():
        k = int(key)
        if not 0 <= k <= max_order:
            raise OrderExceeded(f"order {k} listed but max_order is {max_order}")
        for item in order:
            simplex = _validate_tuple(item)
            if list(simplex) != sorted(simplex):
                raise InvalidSimplex(f"simplex {simplex} is not strictly increasing")
            if len(simplex) != k + 1:
                raise InvalidSimplex(f"simplex {simplex} listed under order {k}")
            listed[k].add(simplex)

    for k in range(1, max_order + 1):
        for simplex in listed[k]:
            for face in combinations(simplex, k):
                if face not in listed[k - 1]:
                    raise InvalidSimplex(f"face {face} of {simplex} is missing")

    tops = [s for order in listed for s in order]
    return build_complex(tops, max_order)


def load_complex(path: str | Path) -> SimplicialComplex:
    X = complex_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    _log.info("complex loaded path=%s sizes=%s", path, list(X.sizes))
    return X


def save_complex(X: SimplicialComplex, path: str | Path) -> None:
    Path(path).write_text(json.dumps(X.to_json(), indent=2), encoding="utf-8")


def boundary_identity_holds(X: SimplicialComplex | Sequence[SparseOperator]) -> bool:
    """True when B_k B_{k+1} = 0 for all k, given a complex or its boundary list ``[B_1, B_2, ...]``."""
    boundaries = [X.boundary(k) for k in range(1, X.max_order + 1)] if isinstance(X, SimplicialComplex) else list(X)
    for low, high in zip(boundaries, boundaries[1:]):
        prod = (low.matrix @ high.matrix).tocsr()
        prod.eliminate_zeros()
        if prod.nnz:
            return False
    return True
