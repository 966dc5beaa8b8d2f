from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ArchiveError, NotSymmetric, ShapeError


def _canonical(matrix) -> sp.csr_matrix:
    m = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Immutable sparse matrix used for incidences, Laplacians, Dirac blocks and projectors.

    The wrapped CSR matrix is canonical: duplicates summed, explicit zeros
    dropped, column indices sorted inside each row. ``exact`` marks matrices
    whose entries are integers (incidences and combinatorial Laplacians).
    """

    matrix: sp.csr_matrix
    exact: bool = False

    def __post_init__(self) -> None:
        m = _canonical(self.matrix)
        object.__setattr__(self, "matrix", m)
        if self.exact and m.nnz and not np.all(m.data == np.round(m.data)):
            object.__setattr__(self, "exact", False)

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets, exact: bool = False) -> "SparseOperator":
        triplets = list(triplets)
        if triplets:
            i, j, v = (np.asarray(a) for a in zip(*triplets))
        else:
            i = j = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        if i.size and (i.min() < 0 or j.min() < 0 or i.max() >= rows or j.max() >= cols):
            raise ShapeError(f"triplet index out of bounds for shape ({rows}, {cols})")
        m = sp.coo_matrix((v.astype(np.float64), (i, j)), shape=(rows, cols))
        return cls(m, exact=exact)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseOperator":
        return cls(sp.csr_matrix((rows, cols)), exact=True)

    @classmethod
    def identity(cls, n: int) -> "SparseOperator":
        return cls(sp.identity(n, format="csr"), exact=True)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    @property
    def T(self) -> "SparseOperator":
        return SparseOperator(self.matrix.T, exact=self.exact)

    def triplets(self) -> list[tuple[int, int, float]]:
        """Row-major list of ``(i, j, value)``."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[t]), int(coo.col[t]), float(coo.data[t])) for t in order]

    def pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices of the stored entries, row-major."""
        m = self.matrix
        rows = np.repeat(np.arange(m.shape[0]), np.diff(m.indptr))
        return rows, m.indices.copy()

    def todense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.cols:
            raise ShapeError(f"operator has {self.cols} columns, input has {x.shape[0]} rows")
        return np.asarray(self.matrix @ x)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            if self.cols != other.rows:
                raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
            return SparseOperator(self.matrix @ other.matrix, exact=self.exact and other.exact)
        return self.apply(other)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return SparseOperator(self.matrix + other.matrix, exact=self.exact and other.exact)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {other.shape} from {self.shape}")
        return SparseOperator(self.matrix - other.matrix, exact=self.exact and other.exact)

    def scaled(self, alpha: float) -> "SparseOperator":
        exact = self.exact and float(alpha).is_integer()
        return SparseOperator(self.matrix * float(alpha), exact=exact)

    def conjugated(self, left: np.ndarray, right: np.ndarray | None = None) -> "SparseOperator":
        """``diag(left) @ M @ diag(right)``, used for orientation flips."""
        right = left if right is None else right
        m = sp.diags(np.asarray(left, dtype=np.float64)) @ self.matrix @ sp.diags(np.asarray(right, dtype=np.float64))
        return SparseOperator(m, exact=self.exact)

    def permuted(self, row_perm: np.ndarray, col_perm: np.ndarray) -> "SparseOperator":
        """Entry (i, j) moves to (row_perm[i], col_perm[j])."""
        coo = self.matrix.tocoo()
        m = sp.coo_matrix(
            (coo.data, (np.asarray(row_perm)[coo.row], np.asarray(col_perm)[coo.col])),
            shape=self.shape,
        )
        return SparseOperator(m, exact=self.exact)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        if self.rows != self.cols:
            return False
        diff = self.matrix - self.matrix.T
        if diff.nnz == 0:
            return True
        return float(np.max(np.abs(diff.data))) <= tol

    def require_symmetric(self, tol: float = 0.0) -> None:
        if not self.is_symmetric(tol):
            raise NotSymmetric(f"operator of shape {self.shape} is not symmetric")

    def equals(self, other: "SparseOperator", tol: float = 0.0) -> bool:
        if self.shape != other.shape:
            return False
        diff = (self.matrix - other.matrix).tocsr()
        diff.eliminate_zeros()
        if diff.nnz == 0:
            return True
        return float(np.max(np.abs(diff.data))) <= tol

    def to_coordinate_text(self) -> str:
        """Plain ``rows cols nnz`` header followed by one ``i j value`` line per entry."""
        lines = [f"{self.rows} {self.cols} {self.nnz}"]
        for i, j, v in self.triplets():
            value = str(int(v)) if self.exact else repr(v)
            lines.append(f"{i} {j} {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coordinate_text(cls, text: str) -> "SparseOperator":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ArchiveError("empty coordinate file")
        try:
            rows, cols, nnz = (int(t) for t in lines[0].split())
            triplets = []
            for ln in lines[1:]:
                i, j, v = ln.split()
                triplets.append((int(i), int(j), float(v)))
        except ValueError as exc:
            raise ArchiveError(f"malformed coordinate file: {exc}") from exc
        if len(triplets) != nnz:
            raise ArchiveError(f"header declares {nnz} entries, found {len(triplets)}")
        exact = all(float(v).is_integer() for _, _, v in triplets)
        return cls.from_triplets(rows, cols, triplets, exact=exact)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_coordinate_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SparseOperator":
        return cls.from_coordinate_text(Path(path).read_text(encoding="utf-8"))
