from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .settings import get_settings


_PROJECT_ROOT = Path(__file__).resolve().parents[1]

TASKS = ("synthetic_flow", "cyclic_flow", "mdi", "simplex_prediction")


@dataclass(frozen=True)
class Paths:
    project_root: str

    @property
    def data_dir(self) -> str:
        return get_settings().DATA_DIR or os.path.join(self.project_root, "data")

    @property
    def runs_dir(self) -> str:
        return get_settings().RUNS_DIR or os.path.join(self.project_root, "runs")

    @property
    def configs_dir(self) -> str:
        return os.path.join(self.project_root, "configs")


def get_paths() -> Paths:
    return Paths(project_root=str(_PROJECT_ROOT))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# -- datasets -----------------------------------------------------------------

class SyntheticFlowParams(_Strict):
    kind: Literal["synthetic_flow"] = "synthetic_flow"
    n_points: int = Field(200, ge=50)
    n_holes: int = Field(2, ge=2, le=2)
    n_traj: int = Field(1000, ge=2)


class CyclicFlowParams(_Strict):
    kind: Literal["cyclic_flow"] = "cyclic_flow"
    n_rings: int = Field(2, ge=1)
    ring_size: int = Field(12, ge=4)
    n_traj: int = Field(400, ge=2)
    noise: float = Field(0.2, ge=0.0)


class MdiParams(_Strict):
    kind: Literal["mdi"] = "mdi"
    n_vertices: int = Field(40, ge=4)
    edge_prob: float = Field(0.2, gt=0.0, le=1.0)
    max_order: int = Field(2, ge=1, le=4)
    order: int = Field(1, ge=0)
    miss_fraction: float = Field(0.1, ge=0.1, le=0.5)
    log_mean: float = 3.0
    log_sigma: float = Field(0.4, gt=0.0)


class SimplexPredictionParams(_Strict):
    kind: Literal["simplex_prediction"] = "simplex_prediction"
    n_vertices: int = Field(60, ge=6)
    edge_prob: float = Field(0.2, gt=0.0, le=1.0)
    order: int = Field(2, ge=2, le=3)
    fill_fraction: float = Field(0.5, gt=0.0, lt=1.0)
    signal_boost: float = Field(1.0, ge=0.0)


_DATASET_PARAMS: dict[str, type[_Strict]] = {
    "synthetic_flow": SyntheticFlowParams,
    "cyclic_flow": CyclicFlowParams,
    "mdi": MdiParams,
    "simplex_prediction": SimplexPredictionParams,
}

DatasetParams = Annotated[
    Union[SyntheticFlowParams, CyclicFlowParams, MdiParams, SimplexPredictionParams],
    Field(discriminator="kind"),
]


# -- model --------------------------------------------------------------------

class LayerConfig(_Strict):
    """Hyperparameters of one GSAN/GSCCN/GSAN-joint layer."""

    J: int = Field(2, ge=1)
    F_in: int | None = Field(None, ge=1)
    F_out: int = Field(16, ge=1)
    heads: int = Field(1, ge=1)
    head_combine: Literal["concat", "average"] = "concat"
    nonlinearity: Literal["identity", "relu", "tanh", "leaky_relu", "sigmoid", "elu"] = "relu"
    attention_slope: float = Field(0.2, ge=0.0)
    signed_masking: bool = False
    use_harmonic: bool = True
    harmonic_J: int | None = Field(None, ge=1)
    harmonic_eps: Union[Literal["auto"], float, dict[int, float]] = "auto"

    @property
    def projector_steps(self) -> int:
        return self.harmonic_J or self.J

    @property
    def width_out(self) -> int:
        return self.heads * self.F_out if self.head_combine == "concat" else self.F_out

    def eps_for(self, k: int) -> float | str:
        if isinstance(self.harmonic_eps, dict):
            return self.harmonic_eps.get(k, "auto")
        return self.harmonic_eps


class ReadoutConfig(_Strict):
    kind: Literal["simplex", "complex", "candidate"] = "complex"
    hidden: int = Field(32, ge=1)
    n_classes: int = Field(2, ge=1)
    target_order: int = Field(1, ge=0)
    unflip_orientation: bool = False


class ModelConfig(_Strict):
    family: Literal["gsan", "gsccn", "gsan-joint"] = "gsan"
    layers: list[LayerConfig] = Field(default_factory=lambda: [LayerConfig(), LayerConfig()], min_length=1)
    attention: bool = True
    active_orders: list[int] | None = None
    readout: ReadoutConfig = Field(default_factory=ReadoutConfig)

    def resolved_layers(self, input_width: int) -> list[LayerConfig]:
        out = []
        width = input_width
        for layer in self.layers:
            resolved = layer.model_copy(update={"F_in": width})
            out.append(resolved)
            width = resolved.width_out
        return out


class TrainingConfig(_Strict):
    optimizer: Literal["adam", "sgd"] = "adam"
    lr: float = Field(1e-3, gt=0.0)
    betas: tuple[float, float] = (0.9, 0.999)
    momentum: float = Field(0.0, ge=0.0, lt=1.0)
    weight_decay: float = Field(0.0, ge=0.0)
    epochs: int = Field(100, ge=1)
    patience: int = Field(20, ge=1)
    batch_size: int = Field(16, ge=1)


class RunConfig(_Strict):
    task: Literal["synthetic_flow", "cyclic_flow", "mdi", "simplex_prediction"]
    dataset: DatasetParams
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    seed: int = 0
    out: str | None = None

    @model_validator(mode="before")
    @classmethod
    def _dataset_for_task(cls, data: Any) -> Any:
        if isinstance(data, dict):
            task = data.get("task")
            raw = data.get("dataset", {})
            if task in _DATASET_PARAMS and isinstance(raw, dict):
                data = {**data, "dataset": {**raw, "kind": task}}
        return data

    @model_validator(mode="after")
    def _check_orders(self) -> "RunConfig":
        if self.model.active_orders is not None and not self.model.active_orders:
            raise ValueError("active_orders must list at least one order when given")
        return self

    def resolved_out(self) -> str:
        return self.out or os.path.join(get_paths().runs_dir, f"{self.task}-seed{self.seed}")


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err.get("loc", ()))
        parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)


def validate_run_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc


def load_run_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read a JSON run config, apply CLI overrides (``task``, ``seed``, ``out``), validate."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    if "dataset" not in data and data.get("task") in _DATASET_PARAMS:
        data["dataset"] = {}
    return validate_run_config(data)


def config_dict(config: RunConfig) -> dict:
    return config.model_dump(mode="json")
