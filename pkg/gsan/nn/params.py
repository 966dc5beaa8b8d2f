"""Parameter layout for the simplicial layers.

Every layer head owns a flat dict of named arrays:

* ``W_d.{p}`` / ``W_u.{p}`` for p = 1..J (``W.{p}`` for the joint family),
  each ``F_in x F_out``;
* ``W_h`` (harmonic or skip branch), absent for the joint family;
* ``a.{k}.{side}.{c}`` attention vectors, ``side`` in ``d``/``u`` (``full`` for
  the joint family's even terms), ``c = 1`` for same-order terms and ``c = 2``
  for the incidence-mapped cross terms.

Names are prefixed with ``layer{l}.head{h}.`` by the model.
"""
from __future__ import annotations

import re
from typing import Iterable

import numpy as np

from ..config import LayerConfig
from ..errors import ShapeError

_FILTER_NAME = re.compile(r"(^|\.)(W_d|W_u|W)\.\d+$")
_ATTENTION_NAME = re.compile(r"(^|\.)a\.\d+\.(d|u|full)\.[12]$")


def active_set(max_order: int, active_orders: Iterable[int] | None) -> tuple[int, ...]:
    if active_orders is None:
        return tuple(range(max_order + 1))
    orders = tuple(sorted(set(int(k) for k in active_orders)))
    if any(not 0 <= k <= max_order for k in orders):
        raise ShapeError(f"active orders {orders} outside [0, {max_order}]")
    return orders


def attention_width(J: int, F_out: int, c: int) -> int:
    """Width of the stacked transformed features h^(., c); the vector a has twice this length."""
    return (J // 2 if c == 1 else (J + 1) // 2) * F_out


def attention_keys(max_order: int, family: str, active_orders: Iterable[int] | None = None) -> list[tuple[int, str, int]]:
    keys = []
    for k in active_set(max_order, active_orders):
        has_lower, has_upper = k >= 1, k < max_order
        if family == "gsan-joint":
            keys.append((k, "full", 1))
            if has_lower:
                keys.append((k, "d", 2))
            if has_upper:
                keys.append((k, "u", 2))
            continue
        for side, present in (("d", has_lower), ("u", has_upper)):
            if present:
                keys.append((k, side, 1))
                keys.append((k, side, 2))
    return keys


def attention_name(key: tuple[int, str, int]) -> str:
    k, side, c = key
    return f"a.{k}.{side}.{c}"


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / max(fan_in + fan_out, 1))
    return rng.uniform(-limit, limit, size=shape)


def init_head_params(
    cfg: LayerConfig,
    max_order: int,
    family: str,
    rng: np.random.Generator,
    attention: bool = True,
    active_orders: Iterable[int] | None = None,
) -> dict[str, np.ndarray]:
    if cfg.F_in is None:
        raise ShapeError("layer F_in must be resolved before initialization")
    F_in, F_out, J = cfg.F_in, cfg.F_out, cfg.J
    params: dict[str, np.ndarray] = {}
    stacks = ("W",) if family == "gsan-joint" else ("W_d", "W_u")
    for stack in stacks:
        for p in range(1, J + 1):
            params[f"{stack}.{p}"] = _glorot(rng, F_in, F_out, (F_in, F_out))
    if family != "gsan-joint":
        params["W_h"] = _glorot(rng, F_in, F_out, (F_in, F_out))
    if attention and family != "gsccn":
        for key in attention_keys(max_order, family, active_orders):
            width = attention_width(J, F_out, key[2])
            params[attention_name(key)] = _glorot(rng, width, 1, (2 * width,))
    return params


def filter_parameter_size(params: dict[str, np.ndarray]) -> int:
    """Entries in the filter stacks (excluding harmonic and attention parameters)."""
    return int(sum(v.size for name, v in params.items() if _FILTER_NAME.search(name)))


def parameter_count(cfg: LayerConfig) -> int:
    """Published per-layer count 2(7 J F_out + F_in F_out J), times the number of heads."""
    if cfg.F_in is None:
        raise ShapeError("layer F_in must be resolved before counting parameters")
    J, F_in, F_out = cfg.J, cfg.F_in, cfg.F_out
    return cfg.heads * 2 * (7 * J * F_out + F_in * F_out * J)


def parameter_breakdown(
    cfg: LayerConfig,
    max_order: int,
    family: str,
    attention: bool = True,
    active_orders: Iterable[int] | None = None,
) -> dict[str, int]:
    """Closed-form sizes of one head's store, split by parameter kind.

    The published count shares the ``2 J F_in F_out`` filter term with
    ``filters`` of a separate head. Its ``14 J F_out`` remainder is a flat
    attention budget; the materialized attention vectors add up to
    ``2 J F_out`` per attended adjacency (8 J F_out on a full order-2
    complex) and ``W_h`` adds ``F_in F_out`` on top.
    """
    if cfg.F_in is None:
        raise ShapeError("layer F_in must be resolved before counting parameters")
    F_in, F_out, J = cfg.F_in, cfg.F_out, cfg.J
    n_stacks = 1 if family == "gsan-joint" else 2
    attended = attention and family != "gsccn"
    keys = attention_keys(max_order, family, active_orders) if attended else []
    return {
        "filters": n_stacks * J * F_in * F_out,
        "harmonic": 0 if family == "gsan-joint" else F_in * F_out,
        "attention": sum(2 * attention_width(J, F_out, c) for _, _, c in keys),
    }


def materialized_breakdown(params: dict[str, np.ndarray]) -> dict[str, int]:
    """Sizes of a head's store grouped the same way as :func:`parameter_breakdown`."""
    out = {"filters": 0, "harmonic": 0, "attention": 0}
    for name, value in params.items():
        if _FILTER_NAME.search(name):
            out["filters"] += value.size
        elif name.endswith("W_h"):
            out["harmonic"] += value.size
        elif _ATTENTION_NAME.search(name):
            out["attention"] += value.size
    return out


def store_size(params: dict[str, np.ndarray]) -> int:
    return int(sum(v.size for v in params.values()))
