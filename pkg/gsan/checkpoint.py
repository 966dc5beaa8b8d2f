"""Model checkpoints: ``manifest.json`` plus ``tensors.bin``.

The manifest names every tensor with its shape in storage order; the binary
file holds them back to back as little-endian float64.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .config import RunConfig, config_dict, validate_run_config
from .errors import ConfigError, IncompatibleCheckpoint
from .models import SimplicialModel

_log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_DTYPE = np.dtype("<f8")


def save_checkpoint(model: SimplicialModel, config: RunConfig, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(model.params)
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": config_dict(config),
        "seed": config.seed,
        "max_order": model.max_order,
        "input_width": model.input_width,
        "tensors": [{"name": name, "shape": list(model.params[name].shape)} for name in names],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    blob = b"".join(np.ascontiguousarray(model.params[name], dtype=_DTYPE).tobytes() for name in names)
    (out / "tensors.bin").write_bytes(blob)
    _log.info("checkpoint saved path=%s tensors=%d values=%d", out, len(names), len(blob) // _DTYPE.itemsize)
    return out


def load_checkpoint(in_dir: str | Path) -> tuple[RunConfig, SimplicialModel]:
    src = Path(in_dir)
    try:
        manifest = json.loads((src / "manifest.json").read_text(encoding="utf-8"))
        blob = (src / "tensors.bin").read_bytes()
    except FileNotFoundError as exc:
        raise IncompatibleCheckpoint(f"checkpoint file missing: {exc.filename}") from exc
    except json.JSONDecodeError as exc:
        raise IncompatibleCheckpoint(f"manifest.json: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise IncompatibleCheckpoint(f"unsupported checkpoint format_version {manifest.get('format_version')!r}")
    try:
        config = validate_run_config(manifest["config"])
    except ConfigError as exc:
        raise IncompatibleCheckpoint(f"checkpoint config is invalid: {exc.message}") from exc

    model = SimplicialModel(config.model, int(manifest["max_order"]), int(manifest["input_width"]))
    values = np.frombuffer(blob, dtype=_DTYPE)
    params, offset = {}, 0
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        if offset + size > values.size:
            raise IncompatibleCheckpoint(f"tensors.bin ends before tensor {entry['name']!r}")
        params[entry["name"]] = values[offset:offset + size].reshape(shape).astype(np.float64)
        offset += size
    if offset != values.size:
        raise IncompatibleCheckpoint(f"tensors.bin has {values.size - offset} trailing values")

    expected = SimplicialModel(config.model, model.max_order, model.input_width).init(np.random.default_rng(0)).params
    if {k: v.shape for k, v in expected.items()} != {k: v.shape for k, v in params.items()}:
        raise IncompatibleCheckpoint("checkpoint tensors do not match the model its config describes")
    model.params = params
    _log.info("checkpoint loaded path=%s tensors=%d", src, len(params))
    return config, model


def check_compatible(model: SimplicialModel, max_order: int, input_width: int) -> None:
    if model.max_order != max_order or model.input_width != input_width:
        raise IncompatibleCheckpoint(
            f"model built for order {model.max_order} width {model.input_width}, "
            f"dataset has order {max_order} width {input_width}"
        )
