"""Dataset archive: a directory with

* ``complex.json``    the complex document
* ``signals.bin``     every input bundle, stacked, little-endian float64
* ``orientations.bin`` per-sample orientation signs (only when present)
* ``labels.csv``      labels, plus candidate vertices or imputation masks
* ``splits.json``     train/val/test indices
* ``meta.json``       format version, task, seed, params, shapes
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..complex import complex_from_json
from ..errors import ArchiveError
from ..filters import CochainBundle
from .common import SPLITS, TaskDataset

_log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_DTYPE = np.dtype("<f8")


def _dump(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def save_archive(dataset: TaskDataset, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    X = dataset.complex
    width = dataset.inputs[0].width if dataset.inputs else 0

    _dump(out / "complex.json", X.to_json())
    stacked = [b.stacked() for b in dataset.inputs]
    signals = np.concatenate([s.ravel() for s in stacked]) if stacked else np.zeros(0)
    (out / "signals.bin").write_bytes(signals.astype(_DTYPE).tobytes())
    if dataset.orientations is not None:
        signs = np.concatenate([np.concatenate(o) for o in dataset.orientations])
        (out / "orientations.bin").write_bytes(signs.astype(_DTYPE).tobytes())

    frame = pd.DataFrame({"label": dataset.labels})
    if dataset.candidates is not None:
        for j in range(dataset.candidates.shape[1]):
            frame[f"v{j}"] = dataset.candidates[:, j]
    for name, mask in (dataset.masks or {}).items():
        frame[name] = np.asarray(mask, dtype=bool)
    frame.to_csv(out / "labels.csv", index=False)

    _dump(out / "splits.json", {name: dataset.split[name].tolist() for name in SPLITS})
    _dump(out / "meta.json", {
        "format_version": FORMAT_VERSION,
        "task": dataset.task,
        "seed": dataset.seed,
        "params": dataset.params,
        "sizes": list(X.sizes),
        "n_samples": dataset.n_samples,
        "width": width,
        "has_orientations": dataset.orientations is not None,
        "masks": sorted((dataset.masks or {}).keys()),
        "label_dtype": str(np.asarray(dataset.labels).dtype),
        "meta": dataset.meta,
    })
    _log.info("archive written path=%s task=%s samples=%d", out, dataset.task, dataset.n_samples)
    return out


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ArchiveError(f"archive file missing: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_archive(in_dir: str | Path) -> TaskDataset:
    src = Path(in_dir)
    meta = _read_json(src / "meta.json")
    if meta.get("format_version") != FORMAT_VERSION:
        raise ArchiveError(f"unsupported archive format_version {meta.get('format_version')!r}")
    X = complex_from_json(_read_json(src / "complex.json"))
    sizes = tuple(meta["sizes"])
    if X.sizes != sizes:
        raise ArchiveError(f"complex sizes {X.sizes} disagree with meta sizes {sizes}")

    n, width, total = int(meta["n_samples"]), int(meta["width"]), sum(sizes)
    try:
        signals = np.frombuffer((src / "signals.bin").read_bytes(), dtype=_DTYPE)
    except FileNotFoundError as exc:
        raise ArchiveError(f"archive file missing: {src / 'signals.bin'}") from exc
    if signals.size != n * total * width:
        raise ArchiveError(f"signals.bin holds {signals.size} values, expected {n * total * width}")
    signals = signals.reshape(n, total, width).astype(np.float64)
    inputs = [CochainBundle.from_stacked(s, sizes) for s in signals]

    orientations = None
    if meta.get("has_orientations"):
        try:
            raw = np.frombuffer((src / "orientations.bin").read_bytes(), dtype=_DTYPE)
        except FileNotFoundError as exc:
            raise ArchiveError(f"archive file missing: {src / 'orientations.bin'}") from exc
        if raw.size != n * total:
            raise ArchiveError(f"orientations.bin holds {raw.size} values, expected {n * total}")
        raw = raw.reshape(n, total)
        cuts = np.cumsum(sizes)[:-1]
        orientations = [tuple(np.split(row.astype(np.float64), cuts)) for row in raw]

    frame = pd.read_csv(src / "labels.csv")
    labels = frame["label"].to_numpy().astype(meta.get("label_dtype", "float64"))
    vertex_cols = [c for c in frame.columns if c.startswith("v") and c[1:].isdigit()]
    candidates = frame[vertex_cols].to_numpy(dtype=np.int64) if vertex_cols else None
    masks = {name: frame[name].to_numpy(dtype=bool) for name in meta.get("masks", [])} or None

    splits = _read_json(src / "splits.json")
    split = {name: np.asarray(splits.get(name, []), dtype=np.int64) for name in SPLITS}
    _log.info("archive loaded path=%s task=%s samples=%d", src, meta["task"], n)
    return TaskDataset(
        task=meta["task"],
        complex=X,
        inputs=inputs,
        labels=labels,
        split=split,
        seed=int(meta["seed"]),
        params=meta.get("params", {}),
        masks=masks,
        orientations=orientations,
        candidates=candidates,
        meta=meta.get("meta", {}),
    )
