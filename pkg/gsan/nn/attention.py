"""Masked self-attention over simplicial adjacencies.

An attentional Laplacian keeps the sparsity pattern of a (lower, upper or
full) Hodge Laplacian plus the diagonal and replaces its entries with
softmax-normalized coefficients. Signed masking multiplies each coefficient by
the sign of the underlying Laplacian entry, which keeps relative orientations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..autodiff import Node, Tape
from ..errors import ShapeError, SupportViolation
from ..operators import Support
from ..sparse import SparseOperator

DEFAULT_SLOPE = 0.2


@dataclass(frozen=True, eq=False)
class AttentionalLaplacian:
    k: int
    variant: tuple[str, int]
    support: Support
    values: np.ndarray

    def to_operator(self) -> SparseOperator:
        return SparseOperator.from_triplets(
            self.support.n, self.support.n, zip(self.support.rows, self.support.cols, self.values)
        )

    def row_sums(self) -> np.ndarray:
        out = np.zeros(self.support.n)
        np.add.at(out, self.support.rows, self.values)
        return out


def support_from_neighborhoods(neighborhoods: Sequence[Sequence[int]], signs: np.ndarray | None = None) -> Support:
    """Row-major support from neighbor lists (each list must contain its own index)."""
    rows, cols = [], []
    for i, nbrs in enumerate(neighborhoods):
        ordered = sorted(set(int(j) for j in nbrs))
        if i not in ordered:
            raise SupportViolation(f"neighborhood of {i} does not contain {i}")
        rows.extend([i] * len(ordered))
        cols.extend(ordered)
    rows_arr = np.asarray(rows, dtype=np.int64)
    cols_arr = np.asarray(cols, dtype=np.int64)
    if signs is None:
        signs = np.ones(rows_arr.size)
    return Support(n=len(neighborhoods), rows=rows_arr, cols=cols_arr, signs=np.asarray(signs, dtype=np.float64))


def attention_logits(tape: Tape, h: Node, a: Node, support: Support, slope: float, signed: bool) -> Node:
    """gamma_ij for every support entry.

    ``a`` splits into a source half scoring h_i and a target half scoring h_j.
    In signed mode both halves are wrapped in an absolute value, so the logit
    is even in h_i and in h_j separately.
    """
    width = h.shape[1]
    if a.shape != (2 * width,):
        raise ShapeError(f"attention vector of shape {a.shape} for stacked width {width}")
    if width == 0:
        return tape.const(np.zeros(support.nnz))
    src = tape.matmul(h, tape.reshape(tape.slice(a, 0, width), (width, 1)))
    dst = tape.matmul(h, tape.reshape(tape.slice(a, width, 2 * width), (width, 1)))
    if signed:
        src = tape.activation(src, "abs")
        dst = tape.activation(dst, "abs")
    logits = tape.reshape(tape.add(tape.gather(src, support.rows), tape.gather(dst, support.cols)), (support.nnz,))
    if signed:
        return logits
    return tape.activation(logits, "leaky_relu", slope)


def attention_values(
    tape: Tape,
    h: Node,
    a: Node,
    support: Support,
    slope: float = DEFAULT_SLOPE,
    signed: bool = False,
) -> Node:
    """phi = beta * alpha on the support, as a tape node."""
    alpha = tape.segment_softmax(attention_logits(tape, h, a, support, slope, signed), support.rows, support.n)
    if signed:
        return tape.mul_const(alpha, support.signs)
    return alpha


def attention_coefficients(
    h: np.ndarray,
    a: np.ndarray,
    neighborhoods: Support | Sequence[Sequence[int]],
    slope: float = DEFAULT_SLOPE,
    signed: bool = False,
    variant: tuple[str, int] = ("u", 1),
    k: int = 0,
) -> AttentionalLaplacian:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim == 1:
        h = h.reshape(-1, 1)
    support = neighborhoods if isinstance(neighborhoods, Support) else support_from_neighborhoods(neighborhoods)
    if h.shape[0] != support.n:
        raise ShapeError(f"{h.shape[0]} feature rows for a support over {support.n} simplices")
    tape = Tape()
    phi = attention_values(tape, tape.const(h), tape.const(np.asarray(a, dtype=np.float64).ravel()), support, slope, signed)
    return AttentionalLaplacian(k=k, variant=variant, support=support, values=phi.value)


def assemble_attentional_laplacian(
    support: Support,
    alphas: np.ndarray | Mapping[tuple[int, int], float],
    signed: bool = False,
    orientation_signs: np.ndarray | None = None,
) -> SparseOperator:
    """Place alphas on the support, multiplied by beta (1, or the orientation sign when signed)."""
    if isinstance(alphas, Mapping):
        position = {(i, j): e for e, (i, j) in enumerate(zip(support.rows.tolist(), support.cols.tolist()))}
        values = np.zeros(support.nnz)
        for (i, j), alpha in alphas.items():
            if (int(i), int(j)) not in position:
                raise SupportViolation(f"coefficient at ({i}, {j}) lies outside the support")
            values[position[(int(i), int(j))]] = float(alpha)
    else:
        values = np.asarray(alphas, dtype=np.float64).ravel()
        if values.size != support.nnz:
            raise SupportViolation(f"{values.size} coefficients for a support of {support.nnz} entries")
    if signed:
        signs = support.signs if orientation_signs is None else np.asarray(orientation_signs, dtype=np.float64)
        if signs.shape != values.shape:
            raise ShapeError(f"{signs.size} orientation signs for {values.size} coefficients")
        values = values * signs
    return SparseOperator.from_triplets(support.n, support.n, zip(support.rows, support.cols, values))
