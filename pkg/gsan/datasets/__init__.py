from __future__ import annotations

from ..config import RunConfig
from ..errors import ConfigError
from .archive import load_archive, save_archive
from .common import TaskDataset, split_indices
from .cyclic_flow import generate_cyclic_flow
from .lifting import clique_lift, lift_node_features
from .mdi import generate_mdi_task
from .simplex_prediction import enumerate_candidates, generate_simplex_prediction_task
from .synthetic_flow import generate_synthetic_flow


def generate_for_config(config: RunConfig) -> TaskDataset:
    """Build the dataset a run config describes."""
    p = config.dataset
    seed = config.seed
    if config.task == "synthetic_flow":
        return generate_synthetic_flow(p.n_points, p.n_holes, p.n_traj, seed)
    if config.task == "cyclic_flow":
        return generate_cyclic_flow(p.n_rings, p.n_traj, seed, ring_size=p.ring_size, noise=p.noise)
    if config.task == "mdi":
        return generate_mdi_task(
            p.n_vertices, p.edge_prob, p.max_order, p.order, p.miss_fraction, seed,
            log_mean=p.log_mean, log_sigma=p.log_sigma,
        )
    if config.task == "simplex_prediction":
        return generate_simplex_prediction_task(
            p.n_vertices, p.edge_prob, p.order, seed, fill_fraction=p.fill_fraction, signal_boost=p.signal_boost,
        )
    raise ConfigError(f"unknown task {config.task!r}")


__all__ = [
    "TaskDataset",
    "clique_lift",
    "enumerate_candidates",
    "generate_cyclic_flow",
    "generate_for_config",
    "generate_mdi_task",
    "generate_simplex_prediction_task",
    "generate_synthetic_flow",
    "lift_node_features",
    "load_archive",
    "save_archive",
    "split_indices",
]
