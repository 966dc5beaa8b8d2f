import numpy as np
import pytest

from gsan.complex import build_complex
from gsan.datasets import (
    clique_lift,
    enumerate_candidates,
    generate_cyclic_flow,
    generate_mdi_task,
    generate_simplex_prediction_task,
    generate_synthetic_flow,
    lift_node_features,
    split_indices,
)
from gsan.datasets.common import random_orientation
from gsan.datasets.cyclic_flow import CLOCKWISE, COUNTER_CLOCKWISE, annulus_complex, loop_flow
from gsan.datasets.mdi import mean_imputation, within_tolerance
from gsan.datasets.synthetic_flow import HOLES, circumcenter, walk_flow
from gsan.errors import InsufficientCandidates, OrderOutOfRange, ShapeError
from gsan.nn.readout import candidate_faces
from gsan.operators import betti_number, hodge_decompose


@pytest.fixture(scope="session")
def synthetic():
    return generate_synthetic_flow(n_points=150, n_traj=24, seed=0)


@pytest.fixture(scope="session")
def cyclic():
    return generate_cyclic_flow(n_rings=1, n_traj=40, seed=0, ring_size=8)


@pytest.fixture(scope="session")
def mdi():
    return generate_mdi_task(n_vertices=30, edge_prob=0.3, max_order=2, order=1, miss_fraction=0.2, seed=0)


def _assert_partition(split, n):
    parts = [set(split[name].tolist()) for name in ("train", "val", "test")]
    assert not parts[0] & parts[1] and not parts[0] & parts[2] and not parts[1] & parts[2]
    assert set().union(*parts) == set(range(n))


def test_split_indices_partition():
    split = split_indices(50, np.random.default_rng(0))
    _assert_partition(split, 50)
    assert len(split["train"]) == 40


def test_clique_lift_fills_every_clique():
    k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert clique_lift(k4, 3).sizes == (4, 6, 4, 1)
    assert clique_lift(k4, 1).sizes == (4, 6)
    assert clique_lift([(0, 1)], 2, vertices=range(3)).sizes == (3, 1, 0)


def test_lifted_features_average_the_vertices():
    X = build_complex([(0, 1, 2)], 2)
    bundle = lift_node_features(X, np.array([1.0, 2.0, 6.0]))
    assert bundle[1].ravel().tolist() == [1.5, 3.5, 4.0]
    assert bundle[2].ravel().tolist() == pytest.approx([3.0])
    with pytest.raises(ShapeError):
        lift_node_features(X, np.ones(4))


def test_walk_flow_follows_reference_orientation():
    X = build_complex([(0, 1), (1, 2)], 1)
    assert walk_flow(X, [2, 1, 0]).tolist() == [-1.0, -1.0]
    assert walk_flow(X, [0, 1, 0]).tolist() == [0.0, 0.0]


def test_synthetic_flow_has_two_holes(synthetic):
    assert betti_number(synthetic.complex, 1) == 2
    assert set(np.unique(synthetic.labels).tolist()) <= {0, 1}
    _assert_partition(synthetic.split, 24)


def test_synthetic_flow_lives_on_edges(synthetic):
    for bundle in synthetic.inputs:
        assert not bundle[0].any() and not bundle[2].any()
        assert bundle[1].any()


def test_synthetic_flow_is_seeded(synthetic):
    again = generate_synthetic_flow(n_points=150, n_traj=24, seed=0)
    assert np.array_equal(again.labels, synthetic.labels)
    assert all(np.array_equal(a.stacked(), b.stacked()) for a, b in zip(again.inputs, synthetic.inputs))


def test_circumcenter_of_a_right_triangle_is_the_hypotenuse_midpoint():
    tri = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    assert np.allclose(circumcenter(tri), [1.0, 0.5])


def test_no_kept_triangle_has_its_circumcenter_in_a_hole(synthetic):
    coords = np.asarray(synthetic.meta["coords"])
    assert synthetic.complex.n_simplices(2) > 0
    for tri in synthetic.complex.simplices[2]:
        center = circumcenter(coords[list(tri)])
        for hole in HOLES:
            assert np.linalg.norm(center - np.asarray(hole.center)) >= hole.radius
    for hole in HOLES:
        assert np.all(np.linalg.norm(coords - np.asarray(hole.center), axis=1) >= hole.radius)


def test_annulus_has_one_hole():
    X = annulus_complex(2, 8)
    assert X.sizes == (24, 56, 32)
    assert betti_number(X, 1) == 1


def test_loop_directions_are_opposite():
    X = annulus_complex(1, 6)
    cw = loop_flow(X, 0, 6, CLOCKWISE)
    ccw = loop_flow(X, 0, 6, COUNTER_CLOCKWISE)
    assert np.array_equal(cw, -ccw)
    assert np.count_nonzero(ccw) == 6


@pytest.mark.parametrize("n_rings,ring_size", [(1, 6), (1, 8), (2, 8), (3, 12)])
def test_loop_flow_keeps_a_fixed_share_of_harmonic_energy(n_rings, ring_size):
    X = annulus_complex(n_rings, ring_size)
    for circle in range(n_rings + 1):
        for direction in (CLOCKWISE, COUNTER_CLOCKWISE):
            flow = loop_flow(X, circle, ring_size, direction)
            grad, _, harm = hodge_decompose(X, 1, flow)
            assert np.allclose(grad, 0.0, atol=1e-10)
            assert harm @ harm == pytest.approx(2.0 * (flow @ flow) / (3 * n_rings + 2), rel=1e-9)


def test_cyclic_flow_reorients_only_the_test_split(cyclic):
    test = set(cyclic.split["test"].tolist())
    for i, signs in enumerate(cyclic.orientations):
        assert all(np.all(np.abs(s) == 1.0) for s in signs)
        assert np.all(signs[0] == 1.0) and np.all(signs[2] == 1.0)
        if i not in test:
            assert np.all(signs[1] == 1.0)


def test_random_orientation_touches_listed_orders():
    X = annulus_complex(1, 6)
    signs = random_orientation(X, np.random.default_rng(0), orders=(1,))
    assert np.all(signs[0] == 1.0)
    assert set(np.unique(signs[1]).tolist()) <= {-1.0, 1.0}


def test_mdi_masks_partition_the_signal(mdi):
    observed, missing = mdi.masks["observed"], mdi.masks["missing"]
    assert not np.any(observed & missing)
    assert np.all(observed | missing)
    assert missing.sum() == int(round(0.2 * mdi.labels.size))
    assert mdi.split["val"].size == 0
    assert np.array_equal(mdi.split["test"], np.flatnonzero(missing))


def test_mdi_input_is_mean_filled_and_scaled(mdi):
    scale = mdi.meta["target_scale"]
    x = mdi.inputs[0][1].ravel()
    observed = mdi.masks["observed"]
    assert scale == pytest.approx(mdi.labels[observed].mean())
    assert np.allclose(x[~observed], 1.0)
    assert np.allclose(x[observed] * scale, mdi.labels[observed])
    assert not mdi.inputs[0][0].any()


def test_mdi_order_must_be_lifted():
    with pytest.raises(OrderOutOfRange):
        generate_mdi_task(n_vertices=10, max_order=1, order=2)


def test_within_tolerance_and_mean_baseline(mdi):
    assert within_tolerance(np.array([104.0, 96.0, 90.0]), np.array([100.0, 100.0, 100.0])).tolist() == [True, True, False]
    baseline = mean_imputation(mdi)
    observed = mdi.masks["observed"]
    assert np.array_equal(baseline[observed], mdi.labels[observed])
    assert np.allclose(baseline[~observed], mdi.labels[observed].mean())


def test_enumerate_candidates_on_a_small_complex():
    X = build_complex([(0, 1, 2), (1, 3), (2, 3)], 2)
    closed, open_ = enumerate_candidates(X, 2)
    assert closed == [(0, 1, 2)]
    assert open_ == [(1, 2, 3)]


def test_simplex_prediction_is_balanced_and_answerable():
    ds = generate_simplex_prediction_task(n_vertices=60, edge_prob=0.3, order=2, seed=0)
    assert ds.complex.max_order == 1
    assert ds.labels.sum() * 2 == ds.labels.size
    _assert_partition(ds.split, ds.labels.size)
    faces = candidate_faces(ds.complex, ds.candidates)
    assert faces.shape == (ds.labels.size, 3)
    assert ds.inputs[0].width == 4


def test_simplex_prediction_needs_enough_candidates():
    with pytest.raises(InsufficientCandidates):
        generate_simplex_prediction_task(n_vertices=8, edge_prob=0.1, order=2, seed=0)
