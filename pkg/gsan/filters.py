from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .complex import SimplicialComplex
from .errors import MissingProjector, ShapeError
from .operators import ComplexOperators, HarmonicProjector, as_operators


def branch_of(b: int) -> str:
    """Weight stack driven by incidence B_b: odd incidences share the lower stack."""
    return "d" if b % 2 == 1 else "u"


@dataclass(frozen=True, eq=False)
class CochainBundle:
    """Per-order signal matrices Z_k of shape N_k x F."""

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        blocks = tuple(
            np.asarray(b, dtype=np.float64).reshape(-1, 1) if np.ndim(b) == 1 else np.asarray(b, dtype=np.float64)
            for b in self.blocks
        )
        widths = {b.shape[1] for b in blocks}
        if len(widths) > 1:
            raise ShapeError(f"bundle blocks have different widths {sorted(widths)}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def zeros(cls, sizes: Sequence[int], width: int) -> "CochainBundle":
        return cls(tuple(np.zeros((n, width)) for n in sizes))

    @classmethod
    def from_stacked(cls, x: np.ndarray, sizes: Sequence[int]) -> "CochainBundle":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.shape[0] != sum(sizes):
            raise ShapeError(f"stacked signal has {x.shape[0]} rows, complex has {sum(sizes)}")
        cuts = np.cumsum(sizes)[:-1]
        return cls(tuple(np.split(x, cuts, axis=0)))

    @property
    def width(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    @property
    def max_order(self) -> int:
        return len(self.blocks) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        return self.blocks[k]

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.blocks, axis=0)

    def __add__(self, other: "CochainBundle") -> "CochainBundle":
        if self.sizes != other.sizes or self.width != other.width:
            raise ShapeError("cannot add bundles of different shapes")
        return CochainBundle(tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def scaled(self, alpha: float) -> "CochainBundle":
        return CochainBundle(tuple(alpha * b for b in self.blocks))

    def permuted(self, perms: Sequence[np.ndarray]) -> "CochainBundle":
        out = []
        for block, perm in zip(self.blocks, perms):
            moved = np.empty_like(block)
            moved[np.asarray(perm)] = block
            out.append(moved)
        return CochainBundle(tuple(out))

    def reoriented(self, signs: Sequence[np.ndarray]) -> "CochainBundle":
        return CochainBundle(tuple(np.asarray(s).reshape(-1, 1) * b for b, s in zip(self.blocks, signs)))

    def max_abs_diff(self, other: "CochainBundle") -> float:
        if self.sizes != other.sizes or self.width != other.width:
            raise ShapeError("cannot compare bundles of different shapes")
        diffs = [float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks) if a.size]
        return max(diffs, default=0.0)


def check_bundle(ops: ComplexOperators, x: CochainBundle, width: int | None = None) -> None:
    if x.sizes != ops.sizes:
        raise ShapeError(f"bundle sizes {x.sizes} do not match complex sizes {ops.sizes}")
    if width is not None and x.width != width:
        raise ShapeError(f"bundle width {x.width} does not match expected {width}")


@dataclass(frozen=True)
class ScFilterWeights:
    w_down: np.ndarray
    w_up: np.ndarray
    w_h: float = 0.0

    def __post_init__(self) -> None:
        w_down = np.asarray(self.w_down, dtype=np.float64).ravel()
        w_up = np.asarray(self.w_up, dtype=np.float64).ravel()
        if w_down.size != w_up.size or w_down.size < 1:
            raise ShapeError(f"w_down and w_up need equal length J >= 1, got {w_down.size} and {w_up.size}")
        if not (np.all(np.isfinite(w_down)) and np.all(np.isfinite(w_up)) and np.isfinite(self.w_h)):
            raise ShapeError("filter weights must be finite")
        object.__setattr__(self, "w_down", w_down)
        object.__setattr__(self, "w_up", w_up)
        object.__setattr__(self, "w_h", float(self.w_h))

    @property
    def J(self) -> int:
        return int(self.w_down.size)

    def stack(self, branch: str) -> np.ndarray:
        return self.w_down if branch == "d" else self.w_up


def _side_terms(L, same: np.ndarray, cross: np.ndarray | None, w: np.ndarray) -> np.ndarray:
    """Even powers of L on ``same`` plus odd-slot powers of L on ``cross``, Horner style."""
    J = w.size
    out = np.zeros_like(same)
    t = same
    for p in range(1, J // 2 + 1):
        t = L.apply(t)
        out += w[2 * p - 1] * t
    if cross is not None:
        c = cross
        for p in range((J + 1) // 2):
            out += w[2 * p] * c
            if p + 1 < (J + 1) // 2:
                c = L.apply(c)
    return out


def sc_filter_apply(
    X: SimplicialComplex | ComplexOperators,
    W: ScFilterWeights,
    x: CochainBundle,
    harmonic: Mapping[int, HarmonicProjector] | Sequence[HarmonicProjector] | None,
) -> CochainBundle:
    """Apply H = sum_j w_down_j D_down^j + sum_j w_up_j D_up^j + w_h Q order by order."""
    ops = as_operators(X)
    check_bundle(ops, x)
    K = ops.max_order
    projectors = dict(enumerate(harmonic)) if isinstance(harmonic, Sequence) else dict(harmonic or {})

    out = []
    for k in range(K + 1):
        y = np.zeros_like(x[k])
        if k >= 1:
            cross = ops.boundary(k).T.apply(x[k - 1])
            y += _side_terms(ops.laplacians.down[k], x[k], cross, W.stack(branch_of(k)))
        if k < K:
            cross = ops.boundary(k + 1).apply(x[k + 1])
            y += _side_terms(ops.laplacians.up[k], x[k], cross, W.stack(branch_of(k + 1)))
        if k not in projectors:
            raise MissingProjector(f"no harmonic projector for order {k}")
        y += W.w_h * projectors[k].apply(x[k])
        out.append(y)
    return CochainBundle(tuple(out))


def dirac_polynomial_apply(
    X: SimplicialComplex | ComplexOperators,
    coeffs: Sequence[float],
    x: CochainBundle,
) -> CochainBundle:
    """sum_{j=1..J} coeffs_j D^j x by repeated sparse application."""
    ops = as_operators(X)
    check_bundle(ops, x)
    coeffs = np.asarray(coeffs, dtype=np.float64).ravel()
    D = ops.dirac().D
    t = x.stacked()
    y = np.zeros_like(t)
    for c in coeffs:
        t = D.apply(t)
        y += c * t
    return CochainBundle.from_stacked(y, ops.sizes)
