from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import NonFiniteGradient, ShapeError


_log = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    algo: str = "adam"
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    momentum: float = 0.0
    weight_decay: float = 0.0
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.algo not in ("sgd", "adam"):
            raise ShapeError(f"unknown optimizer {self.algo!r}")


def optimizer_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: OptimizerState,
) -> tuple[dict[str, np.ndarray], OptimizerState]:
    """One SGD/Adam update; returns new parameter arrays and the advanced state."""
    for name, g in grads.items():
        if name not in params:
            raise ShapeError(f"gradient for unknown parameter {name!r}")
        if g.shape != params[name].shape:
            raise ShapeError(f"gradient {name!r} has shape {g.shape}, parameter {params[name].shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"gradient of {name!r} is not finite; step refused")

    state.step += 1
    out: dict[str, np.ndarray] = {}
    b1, b2 = state.betas
    for name, p in params.items():
        g = np.asarray(grads.get(name, np.zeros_like(p)), dtype=np.float64)
        if state.weight_decay:
            g = g + state.weight_decay * p
        if state.algo == "sgd":
            if state.momentum:
                buf = state.momentum * state.m.get(name, np.zeros_like(p)) + g
                state.m[name] = buf
                g = buf
            out[name] = p - state.lr * g
            continue
        m = b1 * state.m.get(name, np.zeros_like(p)) + (1.0 - b1) * g
        v = b2 * state.v.get(name, np.zeros_like(p)) + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - b1 ** state.step)
        v_hat = v / (1.0 - b2 ** state.step)
        out[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return out, state
