import json

import numpy as np
import pytest

from gsan.datasets import generate_cyclic_flow, generate_mdi_task, generate_simplex_prediction_task, load_archive, save_archive
from gsan.errors import ArchiveError


def _same(a, b):
    assert a.task == b.task and a.seed == b.seed
    assert a.complex.simplices == b.complex.simplices
    assert np.array_equal(a.labels, b.labels)
    assert all(np.array_equal(a.split[n], b.split[n]) for n in ("train", "val", "test"))
    assert all(np.array_equal(x.stacked(), y.stacked()) for x, y in zip(a.inputs, b.inputs))


def test_cyclic_archive_keeps_orientations(tmp_path):
    ds = generate_cyclic_flow(n_rings=1, n_traj=10, seed=3, ring_size=6)
    loaded = load_archive(save_archive(ds, tmp_path / "cyc"))
    _same(ds, loaded)
    for a, b in zip(ds.orientations, loaded.orientations):
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert sorted(p.name for p in (tmp_path / "cyc").iterdir()) == [
        "complex.json", "labels.csv", "meta.json", "orientations.bin", "signals.bin", "splits.json",
    ]


def test_mdi_archive_keeps_masks_and_scale(tmp_path):
    ds = generate_mdi_task(n_vertices=15, edge_prob=0.4, seed=1)
    loaded = load_archive(save_archive(ds, tmp_path / "mdi"))
    _same(ds, loaded)
    assert np.array_equal(loaded.masks["missing"], ds.masks["missing"])
    assert loaded.meta["target_scale"] == pytest.approx(ds.meta["target_scale"])


def test_candidate_archive_keeps_candidates(tmp_path):
    ds = generate_simplex_prediction_task(n_vertices=40, edge_prob=0.35, seed=2)
    loaded = load_archive(save_archive(ds, tmp_path / "sp"))
    _same(ds, loaded)
    assert np.array_equal(loaded.candidates, ds.candidates)
    assert loaded.labels.dtype == ds.labels.dtype


def test_truncated_signals_are_rejected(tmp_path):
    out = save_archive(generate_cyclic_flow(n_rings=1, n_traj=4, seed=0, ring_size=5), tmp_path / "a")
    data = (out / "signals.bin").read_bytes()
    (out / "signals.bin").write_bytes(data[:-8])
    with pytest.raises(ArchiveError):
        load_archive(out)


def test_missing_orientations_are_rejected(tmp_path):
    out = save_archive(generate_cyclic_flow(n_rings=1, n_traj=4, seed=0, ring_size=5), tmp_path / "a")
    (out / "orientations.bin").unlink()
    with pytest.raises(ArchiveError):
        load_archive(out)


def test_unknown_format_version(tmp_path):
    out = save_archive(generate_mdi_task(n_vertices=10, edge_prob=0.5, seed=0), tmp_path / "a")
    meta = json.loads((out / "meta.json").read_text())
    meta["format_version"] = 99
    (out / "meta.json").write_text(json.dumps(meta))
    with pytest.raises(ArchiveError):
        load_archive(out)


def test_missing_directory(tmp_path):
    with pytest.raises(ArchiveError):
        load_archive(tmp_path / "nowhere")
