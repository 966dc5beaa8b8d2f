from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complex import SimplicialComplex
from .errors import EmptyOrder, InvalidStepSize, OrderOutOfRange, ShapeError
from .sparse import SparseOperator


_log = logging.getLogger(__name__)

DENSE_SPECTRUM_LIMIT = 1024
LANCZOS_MAXITER = 5000
LANCZOS_SEED = 0
KERNEL_THRESHOLD = 1e-8
_BOUND_MARGIN = 1e-3


@dataclass(frozen=True, eq=False)
class LaplacianSet:
    full: tuple[SparseOperator, ...]
    down: tuple[SparseOperator | None, ...]
    up: tuple[SparseOperator | None, ...]

    @property
    def max_order(self) -> int:
        return len(self.full) - 1


@dataclass(frozen=True, eq=False)
class DiracSet:
    D: SparseOperator
    D_down: SparseOperator
    D_up: SparseOperator
    offsets: tuple[int, ...]

    def block(self, x: np.ndarray, k: int) -> np.ndarray:
        return x[self.offsets[k]:self.offsets[k + 1]]


@dataclass(frozen=True, eq=False)
class HarmonicProjector:
    k: int
    J: int
    eps: float
    Q_hat: SparseOperator
    Q_exact: np.ndarray | None = None

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.Q_hat.apply(x)


def _laplacians_from_boundaries(sizes: Sequence[int], boundaries: Sequence[SparseOperator]) -> LaplacianSet:
    K = len(sizes) - 1
    full, down, up = [], [], []
    for k in range(K + 1):
        lo = boundaries[k - 1].T @ boundaries[k - 1] if k >= 1 else None
        hi = boundaries[k] @ boundaries[k].T if k < K else None
        down.append(lo)
        up.append(hi)
        if lo is not None and hi is not None:
            full.append(lo + hi)
        else:
            full.append(lo if lo is not None else hi if hi is not None else SparseOperator.zeros(sizes[k], sizes[k]))
    return LaplacianSet(full=tuple(full), down=tuple(down), up=tuple(up))


def hodge_laplacians(X: SimplicialComplex) -> LaplacianSet:
    """L_0 = B_1 B_1^T, L_k = B_k^T B_k + B_{k+1} B_{k+1}^T, L_K = B_K^T B_K."""
    return _laplacians_from_boundaries(X.sizes, [X.boundary(k) for k in range(1, X.max_order + 1)])


def _dirac_from_boundaries(sizes: Sequence[int], boundaries: Sequence[SparseOperator]) -> DiracSet:
    K = len(sizes) - 1
    offsets = tuple(int(v) for v in np.concatenate([[0], np.cumsum(sizes)]))
    total = offsets[-1]

    def assemble(keep) -> sp.csr_matrix:
        blocks: list[list] = [[None] * (K + 1) for _ in range(K + 1)]
        for k in range(K + 1):
            blocks[k][k] = sp.csr_matrix((sizes[k], sizes[k]))
        for k in range(1, K + 1):
            if keep(k):
                blocks[k - 1][k] = boundaries[k - 1].matrix
                blocks[k][k - 1] = boundaries[k - 1].matrix.T
        return sp.bmat(blocks, format="csr") if total else sp.csr_matrix((0, 0))

    # odd-indexed incidences form the joint gradient part, even-indexed the joint curl part
    D_down = SparseOperator(assemble(lambda k: k % 2 == 1), exact=True)
    D_up = SparseOperator(assemble(lambda k: k % 2 == 0), exact=True)
    D = SparseOperator(assemble(lambda k: True), exact=True)
    return DiracSet(D=D, D_down=D_down, D_up=D_up, offsets=offsets)


def dirac_operator(X: SimplicialComplex) -> DiracSet:
    if X.max_order < 1:
        raise OrderOutOfRange("the Dirac operator needs max_order >= 1")
    return _dirac_from_boundaries(X.sizes, [X.boundary(k) for k in range(1, X.max_order + 1)])


def _gershgorin(m: sp.csr_matrix) -> float:
    if m.shape[0] == 0 or m.nnz == 0:
        return 0.0
    return float(np.max(np.asarray(abs(m).sum(axis=1)).ravel()))


def spectral_upper_bound(M: SparseOperator) -> float:
    """Upper bound on the largest eigenvalue magnitude of a symmetric operator.

    The eigenvalue is resolved to rounding error (dense up to
    DENSE_SPECTRUM_LIMIT rows, seeded Lanczos above), so relabeled or
    reoriented copies of an operator get the same bound. The result is
    capped by the Gershgorin row bound, which is also returned when Lanczos
    does not converge.
    """
    M.require_symmetric(tol=1e-12)
    m = M.matrix
    n = m.shape[0]
    gersh = _gershgorin(m)
    if n == 0 or gersh == 0.0:
        return 0.0

    lam = _largest_magnitude(m)
    if lam is None:
        _log.debug("Lanczos did not converge n=%d; using Gershgorin", n)
        return gersh
    return min(lam * (1.0 + _BOUND_MARGIN), gersh)


def _largest_magnitude(m: sp.csr_matrix) -> float | None:
    n = m.shape[0]
    if n <= DENSE_SPECTRUM_LIMIT:
        return float(np.max(np.abs(scipy.linalg.eigvalsh(m.toarray()))))
    v0 = np.random.default_rng(LANCZOS_SEED).normal(size=n)
    try:
        vals = spla.eigsh(m, k=1, which="LM", v0=v0, tol=1e-13, maxiter=LANCZOS_MAXITER, return_eigenvectors=False)
    except spla.ArpackNoConvergence:
        return None
    return float(abs(vals[0]))


def sparse_matrix_power(base: SparseOperator, J: int) -> SparseOperator:
    """base^J by repeated sparse products."""
    out = SparseOperator.identity(base.rows)
    for _ in range(J):
        out = out @ base
    return out


def harmonic_projector(
    X: SimplicialComplex | "ComplexOperators",
    k: int,
    J: int,
    eps: float | str = "auto",
) -> HarmonicProjector:
    """Sparse approximation (I - eps L_k)^J of the projector onto ker(L_k)."""
    ops = X if isinstance(X, ComplexOperators) else complex_operators(X)
    if not 0 <= k <= ops.max_order:
        raise OrderOutOfRange(f"order {k} outside [0, {ops.max_order}]")
    if J < 1:
        raise InvalidStepSize(f"projector steps J must be >= 1, got {J}")
    L = ops.laplacians.full[k]
    bound = spectral_upper_bound(L)
    if eps == "auto":
        if bound <= 0.0:
            raise InvalidStepSize(f"L_{k} has no positive spectrum; step size cannot be chosen")
        eps = 1.0 / bound
    eps = float(eps)
    if not eps > 0.0 or (bound > 0.0 and eps * bound >= 2.0 * (1.0 + _BOUND_MARGIN)):
        raise InvalidStepSize(f"eps={eps} outside (0, 2/lambda_max) for L_{k} (bound {bound:.6g})")
    step = SparseOperator.identity(L.rows) - L.scaled(eps)
    return HarmonicProjector(k=k, J=J, eps=eps, Q_hat=sparse_matrix_power(step, J))


def _range_projection(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    if A.size == 0:
        return np.zeros_like(x)
    coef, *_ = scipy.linalg.lstsq(A, x)
    return A @ coef


def hodge_decompose(X: SimplicialComplex, k: int, x_k: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a k-signal into gradient, curl and harmonic parts by least squares."""
    if not 0 <= k <= X.max_order:
        raise OrderOutOfRange(f"order {k} outside [0, {X.max_order}]")
    x = np.asarray(x_k, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != X.n_simplices(k):
        raise ShapeError(f"signal of shape {x.shape} does not match N_{k}={X.n_simplices(k)}")

    grad_basis = X.boundary(k).todense().T if k >= 1 else np.zeros((x.size, 0))
    curl_basis = X.boundary(k + 1).todense() if k < X.max_order else np.zeros((x.size, 0))
    irrotational = _range_projection(grad_basis, x)
    solenoidal = _range_projection(curl_basis, x)
    harmonic = x - irrotational - solenoidal
    return irrotational, solenoidal, harmonic


def betti_number(X: SimplicialComplex, k: int) -> int:
    """dim ker(L_k) from a dense eigendecomposition; small complexes only."""
    if not 0 <= k <= X.max_order:
        raise OrderOutOfRange(f"order {k} outside [0, {X.max_order}]")
    if X.n_simplices(k) == 0:
        raise EmptyOrder(f"order {k} has no simplices")
    w = np.linalg.eigvalsh(hodge_laplacians(X).full[k].todense())
    return int(np.sum(np.abs(w) < KERNEL_THRESHOLD))


@dataclass(frozen=True, eq=False)
class Support:
    """Row-major sparsity pattern of an adjacency, diagonal included.

    ``signs`` holds the relative-orientation sign read off the Laplacian entry
    (+1 on the diagonal).
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    signs: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.rows.size)

    def neighbor_lists(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in zip(self.rows.tolist(), self.cols.tolist()):
            out[i].append(j)
        return out


def _support_of(L: SparseOperator) -> Support:
    n = L.rows
    pattern = (abs(L.matrix) + sp.identity(n, format="csr")).tocsr()
    pattern.sort_indices()
    rows = np.repeat(np.arange(n), np.diff(pattern.indptr))
    cols = pattern.indices.astype(np.int64)
    values = np.asarray(L.matrix[rows, cols]).ravel() if rows.size else np.zeros(0)
    signs = np.where(values < 0, -1.0, 1.0)
    return Support(n=n, rows=rows.astype(np.int64), cols=cols, signs=signs)


@dataclass(frozen=True, eq=False)
class ComplexOperators:
    """Everything a layer needs from a complex: incidences, Laplacians and adjacency supports.

    Built once per complex. Permuting or reorienting returns a new bundle with
    conjugated incidences, which is how equivariance checks feed relabeled
    complexes to the layers.
    """

    sizes: tuple[int, ...]
    boundaries: tuple[SparseOperator, ...]
    laplacians: LaplacianSet
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_boundaries(cls, sizes: Sequence[int], boundaries: Sequence[SparseOperator]) -> "ComplexOperators":
        sizes = tuple(int(s) for s in sizes)
        if len(boundaries) != len(sizes) - 1:
            raise ShapeError(f"{len(sizes)} orders need {len(sizes) - 1} incidences, got {len(boundaries)}")
        for k, b in enumerate(boundaries, start=1):
            if b.shape != (sizes[k - 1], sizes[k]):
                raise ShapeError(f"B_{k} has shape {b.shape}, expected {(sizes[k - 1], sizes[k])}")
        return cls(sizes=sizes, boundaries=tuple(boundaries), laplacians=_laplacians_from_boundaries(sizes, boundaries))

    @property
    def max_order(self) -> int:
        return len(self.sizes) - 1

    def boundary(self, k: int) -> SparseOperator:
        return self.boundaries[k - 1]

    def laplacian(self, k: int, side: str) -> SparseOperator | None:
        if side == "d":
            return self.laplacians.down[k]
        if side == "u":
            return self.laplacians.up[k]
        return self.laplacians.full[k]

    def support(self, k: int, side: str) -> Support:
        key = ("support", k, side)
        if key not in self._cache:
            L = self.laplacian(k, side)
            if L is None:
                L = SparseOperator.zeros(self.sizes[k], self.sizes[k])
            self._cache[key] = _support_of(L)
        return self._cache[key]

    def dirac(self) -> DiracSet:
        if "dirac" not in self._cache:
            self._cache["dirac"] = _dirac_from_boundaries(self.sizes, self.boundaries)
        return self._cache["dirac"]

    def projector(self, k: int, J: int, eps: float | str = "auto") -> SparseOperator:
        """Q_hat_k, falling back to the identity when L_k vanishes (everything is harmonic)."""
        key = ("projector", k, J, eps)
        if key not in self._cache:
            try:
                Q = harmonic_projector(self, k, J, eps).Q_hat
            except InvalidStepSize:
                if spectral_upper_bound(self.laplacians.full[k]) > 0.0:
                    raise
                _log.warning("order=%d Laplacian is zero; harmonic projector is the identity", k)
                Q = SparseOperator.identity(self.sizes[k])
            self._cache[key] = Q
        return self._cache[key]

    def permuted(self, perms: Sequence[np.ndarray]) -> "ComplexOperators":
        """Relabel simplices: old index i of order k moves to ``perms[k][i]``."""
        boundaries = [
            b.permuted(perms[k - 1], perms[k]) for k, b in enumerate(self.boundaries, start=1)
        ]
        return ComplexOperators.from_boundaries(self.sizes, boundaries)

    def reoriented(self, signs: Sequence[np.ndarray]) -> "ComplexOperators":
        """Flip orientations: B_k becomes diag(s_{k-1}) B_k diag(s_k)."""
        boundaries = [
            b.conjugated(signs[k - 1], signs[k]) for k, b in enumerate(self.boundaries, start=1)
        ]
        return ComplexOperators.from_boundaries(self.sizes, boundaries)


def complex_operators(X: SimplicialComplex) -> ComplexOperators:
    return ComplexOperators.from_boundaries(X.sizes, [X.boundary(k) for k in range(1, X.max_order + 1)])


def as_operators(X: SimplicialComplex | ComplexOperators) -> ComplexOperators:
    return X if isinstance(X, ComplexOperators) else complex_operators(X)
