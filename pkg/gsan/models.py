from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .autodiff import Node, Tape
from .config import LayerConfig, ModelConfig
from .errors import ShapeError
from .filters import CochainBundle
from .nn.layers import layer_nodes
from .nn.params import (
    active_set,
    filter_parameter_size,
    init_head_params,
    parameter_breakdown,
    parameter_count,
    store_size,
)
from .nn.readout import init_readout_params, readout_nodes
from .operators import ComplexOperators

_log = logging.getLogger(__name__)


def _head_prefix(layer: int, head: int) -> str:
    return f"layer{layer}.head{head}."


@dataclass
class SimplicialModel:
    """A stack of simplicial layers of one family followed by a readout head.

    Parameters live in one flat dict keyed ``layer{l}.head{h}.<name>`` and
    ``readout.<name>``; that order is also the checkpoint order.
    """

    config: ModelConfig
    max_order: int
    input_width: int
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.active = active_set(self.max_order, self.config.active_orders)
        readout = self.config.readout
        if readout.kind == "simplex" and readout.target_order not in self.active:
            raise ShapeError(f"readout order {readout.target_order} is not an active order {self.active}")
        if readout.kind == "candidate" and readout.target_order - 1 not in self.active:
            raise ShapeError(f"candidate faces of order {readout.target_order - 1} are not computed")

    @property
    def layers(self) -> list[LayerConfig]:
        return self.config.resolved_layers(self.input_width)

    @property
    def output_width(self) -> int:
        return self.layers[-1].width_out

    def init(self, rng: np.random.Generator) -> "SimplicialModel":
        params: dict[str, np.ndarray] = {}
        for l, cfg in enumerate(self.layers):
            for h in range(cfg.heads):
                head = init_head_params(
                    cfg, self.max_order, self.config.family, rng,
                    attention=self.config.attention, active_orders=self.config.active_orders,
                )
                params.update({_head_prefix(l, h) + name: value for name, value in head.items()})
        params.update(init_readout_params(self.config.readout, self.output_width, self.max_order + 1, rng))
        self.params = params
        _log.info(
            "model initialized family=%s layers=%d store_size=%d",
            self.config.family, len(self.layers), self.parameter_store_size(),
        )
        return self

    def _head_nodes(self, nodes: dict[str, Node], layer: int, heads: int) -> list[dict[str, Node]]:
        out = []
        for h in range(heads):
            prefix = _head_prefix(layer, h)
            out.append({name[len(prefix):]: node for name, node in nodes.items() if name.startswith(prefix)})
        return out

    def encode(
        self,
        tape: Tape,
        ops: ComplexOperators,
        bundle: CochainBundle,
        record: dict | None = None,
    ) -> list[Node]:
        """Run the layer stack; returns the last layer's block per order."""
        if bundle.width != self.input_width:
            raise ShapeError(f"input width {bundle.width}, model expects {self.input_width}")
        if ops.max_order != self.max_order:
            raise ShapeError(f"complex of order {ops.max_order}, model built for {self.max_order}")
        nodes = {name: tape.param(name, value) for name, value in self.params.items()}
        Z = [tape.const(block) for block in bundle.blocks]
        for l, cfg in enumerate(self.layers):
            Z = layer_nodes(
                tape, ops, cfg, self.config.family, self._head_nodes(nodes, l, cfg.heads), Z,
                self.config.active_orders, self.config.attention, record, layer=l,
            )
        return Z

    def forward(
        self,
        tape: Tape,
        ops: ComplexOperators,
        bundle: CochainBundle,
        faces: np.ndarray | None = None,
        orientation: Sequence[np.ndarray] | None = None,
        record: dict | None = None,
    ) -> Node:
        Z = self.encode(tape, ops, bundle, record)
        readout = {name: tape.param(name, self.params[name]) for name in self.params if name.startswith("readout.")}
        return readout_nodes(tape, self.config.readout, readout, Z, faces, orientation)

    def predict(
        self,
        ops: ComplexOperators,
        bundle: CochainBundle,
        faces: np.ndarray | None = None,
        orientation: Sequence[np.ndarray] | None = None,
    ) -> np.ndarray:
        return self.forward(Tape(), ops, bundle, faces, orientation).value

    def parameter_store_size(self) -> int:
        """Entries actually materialized, readout included."""
        return store_size(self.params)

    def filter_parameter_size(self) -> int:
        return filter_parameter_size(self.params)

    def published_parameter_count(self) -> int:
        """Sum of the closed-form per-layer counts (readout excluded)."""
        return sum(parameter_count(cfg) for cfg in self.layers)

    def parameter_breakdown(self) -> dict[str, int]:
        """Closed-form store size by kind; the values add up to :meth:`parameter_store_size`."""
        totals = {"filters": 0, "harmonic": 0, "attention": 0}
        for cfg in self.layers:
            head = parameter_breakdown(
                cfg, self.max_order, self.config.family, self.config.attention, self.config.active_orders
            )
            for kind, size in head.items():
                totals[kind] += cfg.heads * size
        totals["readout"] = store_size({n: v for n, v in self.params.items() if n.startswith("readout.")})
        return totals


def complexity_estimate(config: LayerConfig, n_neighbors: int) -> dict[str, int]:
    """Worst-case dense cost of one layer per simplex neighborhood of size ``n_neighbors``.

    ``filtering`` covers the recursive convolutions, ``attention`` the
    coefficient computation; both scale with the number of heads.
    """
    if config.F_in is None:
        raise ShapeError("layer F_in must be resolved before estimating cost")
    J, F, G, H = config.J, config.F_in, config.F_out, config.heads
    U = int(n_neighbors)
    filtering = U * (6 * J * F * G + 4 * J * G + 2 * (J + J // 2) * (F * G + G))
    attention = U * (3 * J * F * G + math.ceil(J / 2) * F * G)
    return {"filtering": H * filtering, "attention": H * attention}
